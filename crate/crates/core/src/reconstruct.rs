//! Empirical check of approximate duality on band-limited test signals.
//!
//! Analysis against `D_{a^j}T_{kβ}ψ̃` followed by synthesis with
//! `D_{a^j}T_{kβ}ψ` (`β = b/N`) is computed in the Fourier domain. Summing
//! over all `k` at once turns each scale into a finite alias sum:
//!
//! `(Rf)^(γ) = Σ_j (1/β) ψ̂(γ/a^j) Σ_n f̂(γ + n a^j/β) conj(ψ̃̂((γ + n a^j/β)/a^j))`
//!
//! which is what [`ReconstructionEngine`] evaluates. The explicit coefficient
//! pipeline ([`analysis_coefficients`], [`synthesize`]) computes the same
//! thing with one FFT per scale and is used as a cross-check.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::FrameParams;
use crate::numeric::{trapezoid, trapezoid_complex, CompensatedComplex};
use crate::spectrum::{Form, Spectrum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default spectral grid step.
pub const DEFAULT_STEP: f64 = 1.0 / 1024.0;
/// Largest `|j|` any scale loop may reach.
pub const MAX_SCALE: i64 = 64;
/// Largest `|k|` per scale in the explicit coefficient pipeline.
pub const MAX_K: u64 = 1 << 20;
/// Alias pieces per sign evaluated by quadrature for the out-of-window budget.
const ALIAS_TERMS: i64 = 32;
const QUIET_SCALES: usize = 3;
/// Shifted exponentials per random test signal.
const SIGNAL_ATOMS: usize = 8;

/// Frequency band `lo < |γ| < hi` of a test signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParams(format!("band needs 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// Smooth bump on `lo < |γ| < hi`, equal to 1 at the centre.
    pub fn bump(&self, gamma: f64) -> f64 {
        let x = gamma.abs();
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let s = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Closed form of a random test spectrum, kept for off-grid evaluation.
#[derive(Debug, Clone, PartialEq)]
struct Recipe {
    band: Band,
    amps: Vec<Complex64>,
    shifts: Vec<f64>,
    scale: f64,
}

impl Recipe {
    fn eval(&self, gamma: f64) -> Complex64 {
        let w = self.band.bump(gamma);
        if w == 0.0 {
            return ZERO;
        }
        let mut acc = CompensatedComplex::new();
        for (z, t) in self.amps.iter().zip(&self.shifts) {
            acc.add(z * Complex64::cis(-2.0 * PI * t * gamma));
        }
        acc.value() * (w * self.scale)
    }
}

/// Samples of `f̂` on `{m·step : |m| ≤ half}`, `half·step = omega_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedSignal {
    pub omega_max: f64,
    pub step: f64,
    pub values: Vec<Complex64>,
    recipe: Option<Arc<Recipe>>,
}

fn half_count(extent: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && extent >= 0.0 && extent.is_finite()) {
        return Err(Error::InvalidParams(format!("grid needs step > 0 and extent >= 0, got {step}, {extent}")));
    }
    let h = (extent / step).round();
    if (h * step - extent).abs() > 1e-9 * step.max(extent) {
        return Err(Error::GridMisaligned(format!("extent {extent} is not a multiple of the step {step}")));
    }
    Ok(h as usize)
}

impl BandlimitedSignal {
    pub fn new(omega_max: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        let half = half_count(omega_max, step)?;
        if values.len() != 2 * half + 1 {
            return Err(Error::InvalidParams(format!(
                "signal on [-{omega_max}, {omega_max}] with step {step} needs {} samples, got {}",
                2 * half + 1,
                values.len()
            )));
        }
        Ok(Self { omega_max, step, values, recipe: None })
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(omega_max: f64, step: f64, mut f: F) -> Result<Self> {
        let half = half_count(omega_max, step)? as i64;
        let values = (-half..=half).map(|m| f(m as f64 * step)).collect();
        Self::new(omega_max, step, values)
    }

    pub fn zero(omega_max: f64, step: f64) -> Result<Self> {
        Self::from_fn(omega_max, step, |_| ZERO)
    }

    pub fn half(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    pub fn gamma(&self, index: usize) -> f64 {
        (index as f64 - self.half() as f64) * self.step
    }

    /// `f̂(γ)`: exact for generated signals, linear interpolation otherwise,
    /// zero outside the grid.
    pub fn eval(&self, gamma: f64) -> Complex64 {
        if let Some(r) = &self.recipe {
            return r.eval(gamma);
        }
        let pos = gamma / self.step + self.half() as f64;
        let last = (self.values.len() - 1) as f64;
        if !(pos >= 0.0 && pos <= last) {
            return ZERO;
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.values[i];
        }
        let w = pos - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// `‖f‖ = ‖f̂‖` by trapezoid quadrature.
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        trapezoid(&sq, self.step).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == ZERO)
    }

    /// Smallest and largest `|γ|` with a nonzero sample.
    pub fn extent(&self) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for (i, v) in self.values.iter().enumerate() {
            if *v != ZERO {
                let g = self.gamma(i).abs();
                out = Some(match out {
                    None => (g, g),
                    Some((lo, hi)) => (lo.min(g), hi.max(g)),
                });
            }
        }
        out
    }

    /// `α f + β g` on a shared grid.
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        if self.values.len() != other.values.len() || self.step != other.step {
            return Err(Error::InvalidParams("signals live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| alpha * x + beta * y).collect();
        Self::new(self.omega_max, self.step, values)
    }

    /// The samples as a sampled spectrum (support = grid range).
    pub fn as_spectrum(&self) -> Result<Spectrum> {
        let grid = crate::spectrum::SampledGrid::new(self.omega_max, self.step, self.values.clone())?;
        Ok(Spectrum::sampled(grid, None, Some(crate::spectrum::Support::symmetric(self.omega_max))))
    }
}

/// `count` signals with `f̂ = bump · Σ_r z_r e^{−2πi t_r γ}` on the band,
/// `z_r` complex Gaussian and `t_r` uniform in `[−spread, spread]`,
/// normalised to `‖f‖ = 1`. Signal `i` is drawn from seed `seed + i`.
pub fn random_bandlimited_in(seed: u64, band: Band, step: f64, count: usize, spread: f64) -> Result<Vec<BandlimitedSignal>> {
    half_count(band.hi, step)?;
    (0..count as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let shift = Uniform::new_inclusive(-spread, spread);
            let mut amps = Vec::with_capacity(SIGNAL_ATOMS);
            let mut shifts = Vec::with_capacity(SIGNAL_ATOMS);
            for _ in 0..SIGNAL_ATOMS {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                amps.push(Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
                shifts.push(shift.sample(&mut rng));
            }
            let mut recipe = Recipe { band, amps, shifts, scale: 1.0 };
            let raw = BandlimitedSignal::from_fn(band.hi, step, |g| recipe.eval(g))?;
            let norm = raw.norm();
            if !(norm > 0.0) {
                return Err(Error::InvalidParams("band too narrow for the grid step".into()));
            }
            recipe.scale = 1.0 / norm;
            let mut sig = BandlimitedSignal::from_fn(band.hi, step, |g| recipe.eval(g))?;
            sig.recipe = Some(Arc::new(recipe));
            Ok(sig)
        })
        .collect()
}

/// Test signals on `Ω/4 < |γ| < Ω` with shifts in `[−4, 4]`.
pub fn random_bandlimited(seed: u64, omega_max: f64, step: f64, count: usize) -> Result<Vec<BandlimitedSignal>> {
    random_bandlimited_in(seed, Band::new(omega_max / 4.0, omega_max)?, step, count, 4.0)
}

/// `⟨f, D_{a^j}T_c g⟩ = ∫ f̂(u) a^{−j/2} e^{2πicu/a^j} conj(ĝ(u/a^j)) du`,
/// trapezoid on the grid of `f`.
pub fn inner_product_fourier(f: &BandlimitedSignal, g: &Spectrum, a: f64, j: i64, c: f64) -> Result<Complex64> {
    let d = a.powi(j as i32);
    let amp = d.powf(-0.5);
    let vals = (0..f.values.len())
        .map(|i| {
            let u = f.gamma(i);
            let v = f.values[i];
            if v == ZERO {
                return Ok(ZERO);
            }
            Ok(v * Complex64::cis(2.0 * PI * c * u / d) * g.eval(u / d)?.conj() * amp)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid_complex(&vals, f.step))
}

/// `x ↦ Σ_m w_m v_m e^{2πixγ_m}` on a uniform spectral grid.
fn inverse_transform(values: &[Complex64], gamma0: f64, step: f64, xs: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    xs.iter()
        .map(|&x| {
            let rot = Complex64::cis(2.0 * PI * x * step);
            let mut acc = CompensatedComplex::new();
            let mut phase = Complex64::cis(2.0 * PI * x * gamma0);
            for (m, v) in values.iter().enumerate() {
                if m % 64 == 0 {
                    phase = Complex64::cis(2.0 * PI * x * (gamma0 + m as f64 * step));
                }
                let w = if m == 0 || m == n - 1 { 0.5 } else { 1.0 };
                acc.add(v * phase * w);
                phase *= rot;
            }
            acc.value() * step
        })
        .collect()
}

/// Independent check of one inner product `⟨f, D_{a^j}T_c g⟩`: both
/// functions are brought to the time domain by trapezoid inverse transforms
/// and the product is integrated with `quad_points` trapezoid nodes.
///
/// `g` must be compactly supported; sampled spectra are used at their own
/// nodes, analytic ones are sampled with the step of `f`.
pub fn time_domain_oracle(f: &BandlimitedSignal, g: &Spectrum, a: f64, j: i64, c: f64, quad_points: usize) -> Result<Complex64> {
    if !(3..=(1 << 16) + 1).contains(&quad_points) {
        return Err(Error::InvalidParams(format!("quad_points must be in 3..=65537, got {quad_points}")));
    }
    let (g_vals, g0, g_step) = match g.form() {
        Form::Sampled(grid) => (grid.values.clone(), -grid.gamma_max, grid.step),
        _ => {
            let Some(s) = g.support() else {
                return Err(Error::NoTailControl("time-domain oracle needs a compactly supported generator".into()));
            };
            let h = (s.radius() / f.step).ceil() as i64;
            let vals = (-h..=h).map(|m| g.eval(m as f64 * f.step)).collect::<Result<Vec<_>>>()?;
            (vals, -(h as f64) * f.step, f.step)
        }
    };
    let d = a.powi(j as i32);
    // stay well inside one period of both sampled transforms
    let reach = (0.27 / f.step).min((0.27 / g_step - c.abs()) / d.max(1e-300));
    if !(reach > 0.0) {
        return Err(Error::InvalidParams("shift too large for the oracle grid".into()));
    }
    let h = 2.0 * reach / (quad_points - 1) as f64;
    let xs: Vec<f64> = (0..quad_points).map(|i| -reach + i as f64 * h).collect();
    let fx = inverse_transform(&f.values, -f.omega_max, f.step, &xs);
    let ys: Vec<f64> = xs.iter().map(|x| d * x - c).collect();
    let gx = inverse_transform(&g_vals, g0, g_step, &ys);
    let amp = d.sqrt();
    let prod: Vec<Complex64> = fx.iter().zip(&gx).map(|(p, q)| p * q.conj() * amp).collect();
    Ok(trapezoid_complex(&prod, h))
}

/// Coefficients `⟨f, D_{a^j}T_{kβ}ψ̃⟩` of one scale, `k` from `k_lo` on.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleCoefficients {
    pub j: i64,
    pub k_lo: i64,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    /// `β = b/N`.
    pub translation_step: f64,
    pub scales: Vec<ScaleCoefficients>,
}

impl CoefficientSet {
    pub fn j_range(&self) -> Option<(i64, i64)> {
        Some((self.scales.first()?.j, self.scales.last()?.j))
    }

    pub fn get(&self, j: i64, k: i64) -> Option<Complex64> {
        let s = self.scales.iter().find(|s| s.j == j)?;
        let idx = k.checked_sub(s.k_lo)?;
        s.values.get(usize::try_from(idx).ok()?).copied()
    }

    pub fn count(&self) -> usize {
        self.scales.iter().map(|s| s.values.len()).sum()
    }

    /// `Σ |c_{j,k}|²`.
    pub fn energy(&self) -> f64 {
        self.scales.iter().flat_map(|s| s.values.iter()).map(|v| v.norm_sqr()).sum()
    }
}

fn dual_radius(dual: &Spectrum) -> Result<f64> {
    dual.support()
        .map(|s| s.radius())
        .ok_or_else(|| Error::InvalidParams("the dual generator must be compactly supported".into()))
}

/// Smallest `j` with `a^j K ≥ lo`; below it every dilated dual misses the signal.
fn lowest_scale(a: f64, k: f64, lo: f64) -> i64 {
    if lo <= 0.0 {
        return -MAX_SCALE - 1;
    }
    let mut j = (lo / k).ln().div_euclid(a.ln()).floor() as i64;
    while a.powi(j as i32) * k < lo {
        j += 1;
    }
    while a.powi(j as i32 - 1) * k >= lo {
        j -= 1;
    }
    j
}

/// Period `a^j/(βδ)` of the discrete coefficient sequence at scale `j`.
fn scale_period(a: f64, j: i64, beta: f64, step: f64) -> Result<usize> {
    let m = a.powi(j as i32) / (beta * step);
    let r = m.round();
    if (m - r).abs() > 1e-9 * m.max(1.0) || r < 1.0 {
        return Err(Error::GridMisaligned(format!(
            "scale {j}: a^j N/b = {} is not a multiple of the grid step {step}",
            m * step
        )));
    }
    if r > 2.0 * MAX_K as f64 {
        return Err(Error::TruncationBudgetExceeded { what: format!("coefficients at scale {j}"), limit: MAX_K });
    }
    Ok(r as usize)
}

/// `⟨f, D_{a^j}T_{k b/N}ψ̃⟩` for every scale that sees `f`, by trapezoid
/// quadrature on the grid of `f` and one inverse FFT per scale. The grid
/// step must divide `a^j N/b`.
pub fn analysis_coefficients(
    f: &BandlimitedSignal,
    dual: &Spectrum,
    params: &FrameParams,
    n: u64,
    tol: f64,
) -> Result<CoefficientSet> {
    params.validate()?;
    let beta = params.b / n as f64;
    let mut set = CoefficientSet { translation_step: beta, scales: Vec::new() };
    let Some((lo, _)) = f.extent() else {
        return Ok(set);
    };
    let k = dual_radius(dual)?;
    let a = params.a;
    let energy_f = f.norm().powi(2);
    let mut planner = FftPlanner::new();
    let half = f.half() as i64;
    let mut quiet = 0;
    let mut j = lowest_scale(a, k, lo);
    loop {
        if j.abs() > MAX_SCALE {
            return Err(Error::TruncationBudgetExceeded { what: "scale range".into(), limit: MAX_SCALE as u64 });
        }
        let period = scale_period(a, j, beta, f.step)?;
        let d = a.powi(j as i32);
        let mut folded = vec![ZERO; period];
        for (i, v) in f.values.iter().enumerate() {
            if *v == ZERO {
                continue;
            }
            let m = i as i64 - half;
            let u = m as f64 * f.step;
            folded[m.rem_euclid(period as i64) as usize] += v * dual.eval(u / d)?.conj();
        }
        planner.plan_fft_inverse(period).process(&mut folded);
        let amp = f.step / d.sqrt();
        let k_lo = -(period as i64 / 2);
        let values: Vec<Complex64> = (0..period as i64)
            .map(|i| folded[(k_lo + i).rem_euclid(period as i64) as usize] * amp)
            .collect();
        let e: f64 = values.iter().map(|v| v.norm_sqr()).sum();
        set.scales.push(ScaleCoefficients { j, k_lo, values });
        quiet = if e < tol * energy_f { quiet + 1 } else { 0 };
        if quiet >= QUIET_SCALES && dual.tails().low_bound(f.omega_max / d).is_some() {
            return Ok(set);
        }
        j += 1;
    }
}

/// `Σ_{j,k} c_{j,k} (D_{a^j}T_{kβ}ψ)^` sampled on `[−omega_out, omega_out]`
/// with one FFT per scale. The output step must divide `a^j N/b`; take
/// `omega_out ≥ a·Ω` to catch what spills past the input band.
pub fn synthesize(
    coeffs: &CoefficientSet,
    synth: &Spectrum,
    params: &FrameParams,
    n: u64,
    omega_out: f64,
    step: f64,
) -> Result<BandlimitedSignal> {
    params.validate()?;
    let beta = params.b / n as f64;
    if (beta - coeffs.translation_step).abs() > 1e-15 * beta {
        return Err(Error::InvalidParams("coefficients were computed for a different b/N".into()));
    }
    let half = half_count(omega_out, step)? as i64;
    let mut out = vec![ZERO; (2 * half + 1) as usize];
    let mut planner = FftPlanner::new();
    for s in &coeffs.scales {
        let period = scale_period(params.a, s.j, beta, step)?;
        if s.values.len() > period {
            return Err(Error::InvalidParams(format!("scale {} has more coefficients than its period", s.j)));
        }
        let mut buf = vec![ZERO; period];
        for (i, c) in s.values.iter().enumerate() {
            buf[(s.k_lo + i as i64).rem_euclid(period as i64) as usize] += c;
        }
        planner.plan_fft_forward(period).process(&mut buf);
        let d = params.a.powi(s.j as i32);
        let amp = 1.0 / d.sqrt();
        for m in -half..=half {
            let g = m as f64 * step;
            let p = synth.eval(g / d)?;
            if p != ZERO {
                out[(m + half) as usize] += p * buf[m.rem_euclid(period as i64) as usize] * amp;
            }
        }
    }
    BandlimitedSignal::new(omega_out, step, out)
}

/// `‖ψ̂‖₂`, by quadrature over the support or over `[−2^10, 2^10]` plus the
/// envelope tail.
pub fn l2_norm_estimate(spec: &Spectrum) -> Result<f64> {
    let step = 1.0 / 64.0;
    let (reach, tail) = match (spec.support(), spec.envelope(), spec.tails().power_tail) {
        (Some(s), _, _) if s.radius() <= 1024.0 => (s.radius(), 0.0),
        (_, Some(env), _) => {
            let r: f64 = 1024.0;
            let q = 2.0 * env.rate();
            (r, 2.0 * env.c * env.c * r.powf(1.0 - q) / (q - 1.0))
        }
        (_, None, Some(pt)) if pt.q > 0.5 => {
            let r: f64 = 1024.0;
            let q = 2.0 * pt.q;
            (r, 2.0 * pt.t * pt.t * r.powf(1.0 - q) / (q - 1.0))
        }
        _ => return Err(Error::NoTailControl(format!("{}: L2 norm needs support or decay", spec.name()))),
    };
    let n = (reach / step).ceil() as i64;
    let sq = (-n..=n).map(|i| spec.abs(i as f64 * step).map(|v| v * v)).collect::<Result<Vec<_>>>()?;
    Ok((trapezoid(&sq, step) + tail).sqrt())
}

/// Result of one reconstruction run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub relative_error: f64,
    pub theoretical_bound: f64,
    /// Scales summed explicitly.
    pub j_range: (i64, i64),
    /// Coefficients one period per scale would hold.
    pub coefficient_count: u64,
    /// Relative energy not seen by the measurement: alias pieces leaving
    /// the output window and scales past the last one summed.
    pub tail_budget: f64,
    /// `relative_error + tail_budget ≤ theoretical_bound`, up to 1e−9 of quadrature noise.
    pub pass: bool,
    /// Set when `f = 0` (error defined as 0).
    pub degenerate: bool,
}

/// Absolute slack allowed on the bound comparison for quadrature noise.
pub const BOUND_SLACK: f64 = 1e-9;

struct ScaleData {
    /// `a^j/β`.
    shift: f64,
    /// `shift/δ` when it is an integer.
    shift_idx: Option<i64>,
    /// `conj(ψ̃̂(u/a^j))/β` on the input grid.
    dual_conj: Vec<Complex64>,
    /// `ψ̂(γ/a^j)` on the output window.
    synth: Vec<Complex64>,
    /// `Σ_{0<|n|≤ALIAS_TERMS} |ψ̂((u − n·shift)/a^j)|²` over the pieces landing outside the window.
    alias_weight: Vec<f64>,
    /// Bound on the same sum over `|n| > ALIAS_TERMS`.
    alias_tail: f64,
}

/// Reusable reconstruction setup: per-scale tables depend only on the
/// generators and the grid, so a batch of signals shares them.
pub struct ReconstructionEngine<'a> {
    dual: &'a Spectrum,
    synth: &'a Spectrum,
    params: FrameParams,
    n: u64,
    beta: f64,
    omega: f64,
    step: f64,
    half_in: i64,
    half_out: i64,
    tol: f64,
    dual_k: f64,
    synth_norm: f64,
    scales: BTreeMap<i64, ScaleData>,
}

impl<'a> ReconstructionEngine<'a> {
    /// Signals are expected on `[−omega, omega]` with grid step `step`; the
    /// output window is `[−aΩ, aΩ]` on the same step.
    pub fn new(
        dual: &'a Spectrum,
        synth: &'a Spectrum,
        params: &FrameParams,
        n: u64,
        omega: f64,
        step: f64,
        tol: f64,
    ) -> Result<Self> {
        params.validate()?;
        if !(tol > 0.0) {
            return Err(Error::InvalidParams(format!("tolerance must be > 0, got {tol}")));
        }
        let half_in = half_count(omega, step)? as i64;
        let half_out = (params.a * omega / step).ceil() as i64;
        Ok(Self {
            dual,
            synth,
            params: *params,
            n,
            beta: params.b / n as f64,
            omega,
            step,
            half_in,
            half_out,
            tol,
            dual_k: dual_radius(dual)?,
            synth_norm: l2_norm_estimate(synth)?,
            scales: BTreeMap::new(),
        })
    }

    fn window(&self) -> f64 {
        self.half_out as f64 * self.step
    }

    /// Bound on `Σ_{n > ALIAS_TERMS} |ψ̂(x_n)|²` (one sign), `|x_n| ≥ n N/b − K`.
    fn alias_tail_bound(&self) -> Result<f64> {
        let spacing = self.n as f64 / self.params.b;
        let x0 = (ALIAS_TERMS + 1) as f64 * spacing - self.dual_k;
        if let Some(s) = self.synth.support() {
            if x0 > s.radius() {
                return Ok(0.0);
            }
        }
        let t = self.synth.tails();
        let (amp, q) = match (t.envelope, t.power_tail) {
            (Some(e), _) => (e.c, e.rate()),
            (None, Some(p)) if x0 >= 1.0 => (p.t, p.q),
            _ => return Err(Error::NoTailControl(format!("{}: alias tail needs decay", self.synth.name()))),
        };
        let p = 2.0 * q;
        // sum over a lattice of spacing N/b of amp² x^{-p}, by integral comparison
        Ok(amp * amp * (x0.powf(-p) + x0.powf(1.0 - p) / ((p - 1.0) * spacing)))
    }

    fn ensure_scale(&mut self, j: i64) -> Result<()> {
        if !self.scales.contains_key(&j) {
            let d = self.params.a.powi(j as i32);
            let shift = d / self.beta;
            let ratio = shift / self.step;
            let shift_idx = ((ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0)).then(|| ratio.round() as i64);
            let inv_beta = 1.0 / self.beta;
            let dual_conj = (-self.half_in..=self.half_in)
                .into_par_iter()
                .map(|m| self.dual.eval(m as f64 * self.step / d).map(|v| v.conj() * inv_beta))
                .collect::<Result<Vec<_>>>()?;
            let synth = (-self.half_out..=self.half_out)
                .into_par_iter()
                .map(|m| self.synth.eval(m as f64 * self.step / d))
                .collect::<Result<Vec<_>>>()?;
            let win = self.window();
            let alias_weight = (0..dual_conj.len())
                .into_par_iter()
                .map(|i| {
                    if dual_conj[i] == ZERO {
                        return Ok(0.0);
                    }
                    let u = (i as i64 - self.half_in) as f64 * self.step;
                    let mut w = 0.0;
                    for n in (1..=ALIAS_TERMS).flat_map(|n| [n, -n]) {
                        let g = u - n as f64 * shift;
                        if g.abs() > win {
                            w += self.synth.abs(g / d)?.powi(2);
                        }
                    }
                    Ok(w)
                })
                .collect::<Result<Vec<_>>>()?;
            let alias_tail = 2.0 * self.alias_tail_bound()?;
            self.scales.insert(j, ScaleData { shift, shift_idx, dual_conj, synth, alias_weight, alias_tail });
        }
        Ok(())
    }

    /// Bound on `Σ_{j' > j} ‖S_{j'}‖`, the norm of all scales above `j`.
    fn remainder_above(&self, j: i64, f_sup: f64) -> Option<f64> {
        let a = self.params.a;
        let mut total = 0.0;
        for jj in j + 1..=j + 400 {
            let d = a.powi(jj as i32);
            let (m, _) = self.dual.tails().low_bound(self.omega / d)?;
            let overlap = (2.0 * self.omega * self.beta / d).floor() + 1.0;
            let term = d.sqrt() * self.synth_norm * overlap * f_sup * m / self.beta;
            total += term;
            if term == 0.0 || term < 1e-30 * total.max(1e-300) {
                return Some(total);
            }
        }
        None
    }

    pub fn run(&mut self, f: &BandlimitedSignal, theoretical_bound: f64) -> Result<ReconstructionReport> {
        if f.step != self.step || f.half() as i64 != self.half_in {
            return Err(Error::InvalidParams(format!(
                "signal grid (Ω = {}, step {}) does not match the engine (Ω = {}, step {})",
                f.omega_max, f.step, self.omega, self.step
            )));
        }
        let Some((lo, _)) = f.extent() else {
            return Ok(ReconstructionReport {
                relative_error: 0.0,
                theoretical_bound,
                j_range: (0, -1),
                coefficient_count: 0,
                tail_budget: 0.0,
                pass: true,
                degenerate: true,
            });
        };
        let norm = f.norm();
        let energy = norm * norm;
        let f_sup = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let (hi_in, hi_out) = (self.half_in, self.half_out);
        let width = (2 * hi_out + 1) as usize;
        let mut total = vec![ZERO; width];
        let mut out_budget = 0.0;
        let mut count: u64 = 0;
        let j_lo = lowest_scale(self.params.a, self.dual_k, lo);
        let mut j = j_lo;
        let mut quiet = 0;
        let remainder = loop {
            if j.abs() > MAX_SCALE {
                return Err(Error::TruncationBudgetExceeded { what: "scale range".into(), limit: MAX_SCALE as u64 });
            }
            let step = self.step;
            let d = self.params.a.powi(j as i32);
            self.ensure_scale(j)?;
            let sd = &self.scales[&j];
            let h: Vec<Complex64> = f.values.iter().zip(&sd.dual_conj).map(|(x, y)| x * y).collect();
            let h_at = |u_idx: i64, u: f64| -> Result<Complex64> {
                if sd.shift_idx.is_some() {
                    Ok(if u_idx.abs() <= hi_in { h[(u_idx + hi_in) as usize] } else { ZERO })
                } else if u.abs() > self.omega {
                    Ok(ZERO)
                } else {
                    Ok(f.eval(u) * self.dual.eval(u / d)?.conj() / self.beta)
                }
            };
            let mut scale_vals = vec![ZERO; width];
            for (w, slot) in scale_vals.iter_mut().enumerate() {
                let p = sd.synth[w];
                if p == ZERO {
                    continue;
                }
                let wi = w as i64 - hi_out;
                let gamma = wi as f64 * step;
                let n_lo = ((-self.omega - gamma) / sd.shift).ceil() as i64;
                let n_hi = ((self.omega - gamma) / sd.shift).floor() as i64;
                let mut acc = CompensatedComplex::new();
                for n in n_lo..=n_hi {
                    let u_idx = wi + n * sd.shift_idx.unwrap_or(0);
                    acc.add(h_at(u_idx, gamma + n as f64 * sd.shift)?);
                }
                *slot = p * acc.value();
            }
            let sq: Vec<f64> = scale_vals.iter().map(|v| v.norm_sqr()).collect();
            let e_j = trapezoid(&sq, step);
            for (t, v) in total.iter_mut().zip(&scale_vals) {
                *t += v;
            }
            let h_sq: Vec<f64> = h.iter().map(|v| v.norm_sqr()).collect();
            let weighted: Vec<f64> = h_sq.iter().zip(&sd.alias_weight).map(|(x, w)| x * w).collect();
            let e_out = trapezoid(&weighted, step) + sd.alias_tail * trapezoid(&h_sq, step);
            let overlap = (2.0 * self.omega / sd.shift).floor() + 1.0;
            out_budget += (overlap * e_out).sqrt();
            count = count.saturating_add((sd.shift / step).round() as u64);
            quiet = if e_j < self.tol * energy { quiet + 1 } else { 0 };
            if quiet >= QUIET_SCALES {
                if let Some(r) = self.remainder_above(j, f_sup) {
                    if r < self.tol.sqrt() * norm {
                        break r;
                    }
                }
            }
            j += 1;
        };
        let diff: Vec<f64> = total
            .iter()
            .enumerate()
            .map(|(w, s)| {
                let m = w as i64 - hi_out;
                let target = if m.abs() <= hi_in { f.values[(m + hi_in) as usize] } else { ZERO };
                (s - target).norm_sqr()
            })
            .collect();
        let relative_error = trapezoid(&diff, self.step).sqrt() / norm;
        let tail_budget = (out_budget + remainder) / norm;
        Ok(ReconstructionReport {
            relative_error,
            theoretical_bound,
            j_range: (j_lo, j),
            coefficient_count: count,
            tail_budget,
            pass: relative_error + tail_budget <= theoretical_bound + BOUND_SLACK,
            degenerate: false,
        })
    }

    pub fn oversampling(&self) -> u64 {
        self.n
    }
}

/// `‖f − Σ⟨f, D T ψ̃⟩ D T ψ‖ / ‖f‖` for one signal, compared with `theoretical_bound`.
pub fn reconstruction_error(
    f: &BandlimitedSignal,
    dual: &Spectrum,
    synth: &Spectrum,
    params: &FrameParams,
    n: u64,
    tol: f64,
    theoretical_bound: f64,
) -> Result<ReconstructionReport> {
    ReconstructionEngine::new(dual, synth, params, n, f.omega_max, f.step, tol)?.run(f, theoretical_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx_dual;
    use crate::frame::AnnulusGrid;
    use crate::generators;

    fn shannon_setup() -> (Spectrum, Spectrum, FrameParams) {
        let p = FrameParams::new(2.0, 1.0).unwrap();
        let s = generators::shannon();
        let grid = AnnulusGrid::new(2.0, 64).unwrap();
        let dual = approx_dual::dual_spectrum(&s.restricted(1.0), &p, 3, 1e-9, &grid).unwrap();
        (s, dual, p)
    }

    #[test]
    fn signals_are_deterministic_and_normalised() {
        let a = random_bandlimited(7, 2.0, 1.0 / 256.0, 3).unwrap();
        let b = random_bandlimited(7, 2.0, 1.0 / 256.0, 3).unwrap();
        assert_eq!(a, b);
        for s in &a {
            assert!((s.norm() - 1.0).abs() < 1e-12);
            assert_eq!(s.values.len(), 1025);
        }
        assert!(random_bandlimited(7, 2.0, 1.0 / 256.0, 0).unwrap().is_empty());
        assert_ne!(a[0], random_bandlimited(8, 2.0, 1.0 / 256.0, 1).unwrap()[0]);
    }

    #[test]
    fn recipe_matches_grid() {
        let s = &random_bandlimited(1, 2.0, 1.0 / 128.0, 1).unwrap()[0];
        for i in (0..s.values.len()).step_by(37) {
            assert!((s.eval(s.gamma(i)) - s.values[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn shannon_only_scale_zero_contributes() {
        let (_, dual, p) = shannon_setup();
        let band = Band::new(0.5, 1.0).unwrap();
        let f = &random_bandlimited_in(3, band, 1.0 / 256.0, 1, 2.0).unwrap()[0];
        let c = analysis_coefficients(f, &dual, &p, 3, 1e-12).unwrap();
        for s in &c.scales {
            let e: f64 = s.values.iter().map(|v| v.norm_sqr()).sum();
            assert_eq!(e > 0.0, s.j == 0, "scale {} energy {e}", s.j);
        }
    }

    #[test]
    fn single_coefficient_synthesis_is_generator() {
        let p = FrameParams::new(2.0, 1.0).unwrap();
        let bl = generators::battle_lemarie(2);
        let step = 1.0 / 64.0;
        let set = CoefficientSet {
            translation_step: 1.0 / 3.0,
            scales: vec![ScaleCoefficients { j: 0, k_lo: 0, values: vec![Complex64::new(1.0, 0.0)] }],
        };
        let out = synthesize(&set, &bl, &p, 3, 4.0, step).unwrap();
        for i in (0..out.values.len()).step_by(11) {
            assert!((out.values[i] - bl.eval(out.gamma(i)).unwrap()).norm() < 1e-13);
        }
        let empty = CoefficientSet { translation_step: 1.0 / 3.0, scales: vec![] };
        assert!(synthesize(&empty, &bl, &p, 3, 4.0, step).unwrap().is_zero());
    }

    #[test]
    fn zero_signal_is_degenerate() {
        let (s, dual, p) = shannon_setup();
        let f = BandlimitedSignal::zero(1.0, 1.0 / 256.0).unwrap();
        let r = reconstruction_error(&f, &dual, &s, &p, 3, 1e-12, 0.0).unwrap();
        assert!(r.degenerate && r.relative_error == 0.0);
        assert_eq!(analysis_coefficients(&f, &dual, &p, 3, 1e-12).unwrap().count(), 0);
    }

    #[test]
    fn misaligned_grid_is_reported() {
        let (_, dual, p) = shannon_setup();
        let f = &random_bandlimited_in(3, Band::new(0.5, 1.2).unwrap(), 0.4, 1, 2.0).unwrap()[0];
        assert!(matches!(analysis_coefficients(f, &dual, &p, 3, 1e-12), Err(Error::GridMisaligned(_))));
    }

    #[test]
    fn lowest_scale_rule() {
        assert_eq!(lowest_scale(2.0, 1.0, 0.5), -1);
        assert_eq!(lowest_scale(2.0, 1.0, 0.5 + 1e-9), 0);
        assert_eq!(lowest_scale(2.0, 4.0, 0.5), -3);
        assert_eq!(lowest_scale(3.0, 1.0, 2.0), 1);
    }
}
