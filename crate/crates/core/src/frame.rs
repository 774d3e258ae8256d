//! Lattice sums over the dilation/translation grid and the frame-bound
//! estimates built on them.
//!
//! Every infinite sum is accumulated in the fixed order `0, 1, -1, 2, -2, ...`
//! with compensated addition and stops once a rigorous bound on the omitted
//! terms drops below the requested tolerance.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::spectrum::{DecayEnvelope, Spectrum, Support};

/// Hard cap on the number of terms in any single lattice sum.
pub const MAX_TERMS: u64 = 1_000_000;

/// Default number of annulus samples per sign.
pub const DEFAULT_ANNULUS_COUNT: usize = 2048;

/// Dilation factor `a` and translation step `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    pub a: f64,
    pub b: f64,
}

impl FrameParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = Self { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(Error::InvalidParams(format!("dilation a must be > 1, got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParams(format!("translation step b must be > 0, got {}", self.b)));
        }
        Ok(())
    }

    /// `a^j`.
    #[inline]
    pub fn dilate(&self, j: i64) -> f64 {
        self.a.powi(j as i32)
    }
}

/// Sample points with `|γ| ∈ [1, a]`, log-uniform, both signs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusGrid {
    a: f64,
    count: usize,
    points: Vec<f64>,
}

impl AnnulusGrid {
    pub fn new(a: f64, count: usize) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!("annulus needs a > 1, got {a}")));
        }
        if count < 2 {
            return Err(Error::InvalidParams(format!("annulus needs at least 2 points per sign, got {count}")));
        }
        let la = a.ln();
        let mut points = Vec::with_capacity(2 * count);
        for i in 0..count {
            let g = if i == 0 {
                1.0
            } else if i == count - 1 {
                a
            } else {
                (la * i as f64 / (count - 1) as f64).exp()
            };
            points.push(-g);
            points.push(g);
        }
        Ok(Self { a, count, points })
    }

    /// Adds extra sample points; those outside the annulus are ignored.
    pub fn with_points(mut self, extra: &[f64]) -> Self {
        self.points
            .extend(extra.iter().copied().filter(|g| g.abs() >= 1.0 && g.abs() <= self.a));
        self
    }

    /// Same annulus with twice the density.
    pub fn refined(&self) -> Result<Self> {
        AnnulusGrid::new(self.a, 2 * self.count - 1)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Walks `0, 1, -1, 2, -2, ...` until both directions report done.
struct Outward {
    step: u64,
    up_done: bool,
    down_done: bool,
}

impl Outward {
    fn new() -> Self {
        Self { step: 0, up_done: false, down_done: false }
    }
}

fn budget(what: &str) -> Error {
    Error::TruncationBudgetExceeded { what: what.to_string(), limit: MAX_TERMS }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParams(format!("lattice sums need a finite gamma != 0, got {gamma}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be > 0, got {tol}")));
    }
    Ok(())
}

/// Bound on `Σ_{i ≥ 0} |ψ̂(a^i x)|^power` for `|x| ≥ r`, from the high tail.
fn upper_tail(spec: &Spectrum, a: f64, r: f64, power: i32) -> Option<f64> {
    let (m, q) = spec.tails().high_bound(r, spec.support())?;
    if m == 0.0 {
        return Some(0.0);
    }
    Some(m.powi(power) / (1.0 - a.powf(-q * power as f64)))
}

/// Bound on `Σ_{i ≥ 0} |ψ̂(a^{-i} x)|^power` for `|x| ≤ r`, from the low tail.
fn lower_tail(spec: &Spectrum, a: f64, r: f64, power: i32) -> Option<f64> {
    let (m, p) = spec.tails().low_bound(r)?;
    if m == 0.0 {
        return Some(0.0);
    }
    Some(m.powi(power) / (1.0 - a.powf(-p * power as f64)))
}

fn require_control(spec: &Spectrum, up: bool, down: bool) -> Result<()> {
    let t = spec.tails();
    if up && !t.has_high_control(spec.support()) {
        return Err(Error::NoTailControl(format!(
            "{}: no envelope, power tail or support bounds the dilation sum as |gamma| grows",
            spec.name()
        )));
    }
    if down && !t.has_low_control() {
        return Err(Error::NoTailControl(format!(
            "{}: nothing bounds the spectrum near 0, so the dilation sum toward j -> -inf cannot be truncated",
            spec.name()
        )));
    }
    Ok(())
}

/// Generic dilation sum `Σ_j term(j)` where `|term(j)| ≤ weight·|ψ̂(a^jγ)|^power`.
/// `j_max` caps the upward direction (inclusive) when given.
#[allow(clippy::too_many_arguments)]
fn dilation_sum<F>(
    spec: &Spectrum,
    params: &FrameParams,
    gamma: f64,
    tol: f64,
    power: i32,
    weight: f64,
    j_max: Option<i64>,
    mut term: F,
) -> Result<f64>
where
    F: FnMut(i64) -> Result<f64>,
{
    check_gamma(gamma)?;
    check_tol(tol)?;
    if spec.is_zero() {
        return Ok(0.0);
    }
    require_control(spec, j_max.is_none(), true)?;
    let a = params.a;
    let g = gamma.abs();
    let half = 0.5 * tol / weight.max(f64::MIN_POSITIVE);
    let mut acc = CompensatedSum::new();
    let mut walk = Outward::new();
    let mut terms = 0u64;
    loop {
        let n = walk.step as i64;
        let mut visit = |j: i64, acc: &mut CompensatedSum| -> Result<()> {
            terms += 1;
            if terms > MAX_TERMS {
                return Err(budget("dilation sum"));
            }
            acc.add(term(j)?);
            Ok(())
        };
        if !walk.up_done {
            if j_max.is_none_or(|jm| n <= jm) {
                visit(n, &mut acc)?;
            }
            let next = n + 1;
            walk.up_done = match j_max {
                Some(jm) if next > jm => true,
                _ => upper_tail(spec, a, params.dilate(next) * g, power).is_some_and(|t| t < half),
            };
        }
        if n > 0 && !walk.down_done
            && j_max.is_none_or(|jm| -n <= jm) {
                visit(-n, &mut acc)?;
            }
        if !walk.down_done {
            let next = -(n + 1);
            walk.down_done = lower_tail(spec, a, params.dilate(next) * g, power).is_some_and(|t| t < half);
        }
        if walk.up_done && walk.down_done {
            return Ok(acc.value());
        }
        walk.step += 1;
        if walk.step > MAX_TERMS {
            return Err(budget("dilation sum"));
        }
    }
}

/// Calderón sum `Σ_j |ψ̂(a^jγ)|²`, omitted tail below `tol`.
pub fn calderon_sum(spec: &Spectrum, params: &FrameParams, gamma: f64, tol: f64) -> Result<f64> {
    let a = params.a;
    dilation_sum(spec, params, gamma, tol, 2, 1.0, None, |j| {
        Ok(spec.eval(a.powi(j as i32) * gamma)?.norm_sqr())
    })
}

/// Partial Calderón sum `Σ_{j ≤ j0} |ψ̂(a^jγ)|²`.
pub fn partial_calderon_sum(spec: &Spectrum, params: &FrameParams, gamma: f64, j0: i64, tol: f64) -> Result<f64> {
    let a = params.a;
    dilation_sum(spec, params, gamma, tol, 2, 1.0, Some(j0), |j| {
        Ok(spec.eval(a.powi(j as i32) * gamma)?.norm_sqr())
    })
}

/// `Σ_j |ψ̂(a^jγ)|`.
pub fn dilation_abs_sum(spec: &Spectrum, params: &FrameParams, gamma: f64, tol: f64) -> Result<f64> {
    let a = params.a;
    dilation_sum(spec, params, gamma, tol, 1, 1.0, None, |j| spec.abs(a.powi(j as i32) * gamma))
}

/// Uniform bound on `Σ_k |ψ̂(x + k/b)|` over all `x`.
pub fn translation_sum_bound(spec: &Spectrum, b: f64) -> Option<f64> {
    let t = spec.tails();
    let mut best: Option<f64> = None;
    let mut offer = |v: f64| best = Some(best.map_or(v, |b: f64| b.min(v)));
    if let Some(env) = t.envelope {
        let s = env.rate();
        offer(2.0 * env.c * (1.0 + b * std::f64::consts::PI / (s * (std::f64::consts::PI / s).sin())));
    }
    if let (Some(pt), Some(sup)) = (t.power_tail, t.sup) {
        if pt.q > 1.0 {
            offer((2.0 * b + 1.0) * sup + 2.0 * pt.t * (1.0 + b / (pt.q - 1.0)));
        }
    }
    if let (Some(s), Some(sup)) = (spec.support(), t.sup) {
        offer(sup * ((b * (s.hi - s.lo)).floor() + 1.0));
    }
    best
}

/// Lattice indices `k` with `x + k/b` inside any of `intervals` and `support`.
fn lattice_points(intervals: &[(f64, f64)], support: Option<&Support>, x: f64, b: f64) -> Result<BTreeSet<(u64, i64)>> {
    let mut set = BTreeSet::new();
    for &(lo, hi) in intervals {
        let (lo, hi) = match support {
            Some(s) => (lo.max(s.lo), hi.min(s.hi)),
            None => (lo, hi),
        };
        if lo > hi {
            continue;
        }
        let k_lo = ((lo - x) * b).ceil() as i64;
        let k_hi = ((hi - x) * b).floor() as i64;
        if k_hi >= k_lo && (k_hi - k_lo) as u64 + set.len() as u64 > MAX_TERMS {
            return Err(budget("translation sum"));
        }
        for k in k_lo..=k_hi {
            // ordered by |k| then sign so accumulation order is fixed
            set.insert((k.unsigned_abs(), k));
        }
    }
    Ok(set)
}

/// `Σ_k |ψ̂(x + k/b)|` with omitted tail below `tol`.
pub fn translation_abs_sum(spec: &Spectrum, b: f64, x: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if spec.is_zero() {
        return Ok(0.0);
    }
    let t = spec.tails();
    if let Some(iv) = &t.intervals {
        let points = lattice_points(iv, spec.support(), x, b)?;
        let mut acc = CompensatedSum::new();
        for &(_, k) in &points {
            acc.add(spec.abs(x + k as f64 / b)?);
        }
        return Ok(acc.value());
    }
    if let Some(s) = spec.support() {
        let k_lo = ((s.lo - x) * b).ceil() as i64;
        let k_hi = ((s.hi - x) * b).floor() as i64;
        if k_hi >= k_lo && (k_hi - k_lo) as u64 > MAX_TERMS {
            return Err(budget("translation sum"));
        }
        let mut acc = CompensatedSum::new();
        let reach = k_lo.unsigned_abs().max(k_hi.unsigned_abs()) as i64;
        for n in 0..=reach {
            for k in if n == 0 { vec![0] } else { vec![n, -n] } {
                if k >= k_lo && k <= k_hi {
                    acc.add(spec.abs(x + k as f64 / b)?);
                }
            }
        }
        return Ok(acc.value());
    }
    if t.envelope.is_none() && !t.power_tail.is_some_and(|p| p.q > 1.0) {
        return Err(Error::NoTailControl(format!(
            "{}: translation sum needs an envelope or a power tail with q > 1",
            spec.name()
        )));
    }
    // one-sided tail bound for lattice points at distance >= rho from 0
    let side_tail = |rho: f64| -> f64 {
        if rho <= 0.0 {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        if let Some(env) = t.envelope {
            let s = env.sigma;
            best = best.min(env.c * rho.powf(-1.0 - s) + b * env.c / (s * rho.powf(s)));
        }
        if let Some(pt) = t.power_tail {
            if pt.q > 1.0 && rho >= 1.0 {
                best = best.min(pt.t * rho.powf(-pt.q) + b * pt.t / ((pt.q - 1.0) * rho.powf(pt.q - 1.0)));
            }
        }
        best
    };
    let mut acc = CompensatedSum::new();
    acc.add(spec.abs(x)?);
    let mut n: i64 = 0;
    loop {
        let up = x + (n + 1) as f64 / b;
        let down = x - (n + 1) as f64 / b;
        if side_tail(up) + side_tail(-down) < tol {
            return Ok(acc.value());
        }
        n += 1;
        if n as u64 > MAX_TERMS / 2 {
            return Err(budget("translation sum"));
        }
        acc.add(spec.abs(x + n as f64 / b)?);
        acc.add(spec.abs(x - n as f64 / b)?);
    }
}

/// Calderón and cross-term sums at one frequency, computed together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSums {
    /// `Σ_j |ψ̂(a^jγ)|²`
    pub calderon: f64,
    /// `Σ_{j,k} |ψ̂(a^jγ) ψ̂(a^jγ + k/b)|`
    pub cross: f64,
}

impl LatticeSums {
    /// The `k ≠ 0` part of the cross sum.
    pub fn off_diagonal(&self) -> f64 {
        (self.cross - self.calderon).max(0.0)
    }
}

/// Both lattice sums at `γ`, each with error below `tol`.
pub fn lattice_sums(spec: &Spectrum, params: &FrameParams, gamma: f64, tol: f64) -> Result<LatticeSums> {
    check_gamma(gamma)?;
    check_tol(tol)?;
    if spec.is_zero() {
        return Ok(LatticeSums { calderon: 0.0, cross: 0.0 });
    }
    let b = params.b;
    let u = translation_sum_bound(spec, b).ok_or_else(|| {
        Error::NoTailControl(format!("{}: no uniform bound on the translation sum", spec.name()))
    })?;
    let a = params.a;
    let mut cal = CompensatedSum::new();
    let cross = dilation_sum(spec, params, gamma, 0.5 * tol, 1, u, None, |j| {
        let x = a.powi(j as i32) * gamma;
        let w = spec.abs(x)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        cal.add(w * w);
        // the j-th share of a tol/4 budget, 2^{-|j|-1} summing to 1 over ℤ
        let share = 0.25 * tol * (-(j.unsigned_abs() as f64) - 1.0).exp2() / w;
        Ok(w * translation_abs_sum(spec, b, x, share)?)
    })?;
    // the Calderón part shares the j range; its omitted tail is below the cross tail
    Ok(LatticeSums { calderon: cal.value(), cross })
}

/// `Σ_{j,k} |ψ̂(a^jγ) ψ̂(a^jγ + k/b)|`.
pub fn cross_term_sum(spec: &Spectrum, params: &FrameParams, gamma: f64, tol: f64) -> Result<f64> {
    lattice_sums(spec, params, gamma, tol).map(|s| s.cross)
}

fn over_grid<T, F>(grid: &AnnulusGrid, f: F) -> Result<Vec<(f64, T)>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    grid.points().par_iter().map(|&g| f(g).map(|v| (g, v))).collect()
}

/// `(1/b) · max` over the grid of the cross sum: an estimate of the Bessel bound.
pub fn bessel_bound_estimate(spec: &Spectrum, params: &FrameParams, grid: &AnnulusGrid, tol: f64) -> Result<f64> {
    params.validate()?;
    let vals = over_grid(grid, |g| cross_term_sum(spec, params, g, tol))?;
    Ok(vals.iter().map(|v| v.1).fold(0.0, f64::max) / params.b)
}

/// `(1/b) · min` over the grid of `Σ_j |ψ̂(a^jγ)|² − Σ_{j, k≠0} |ψ̂(a^jγ) ψ̂(a^jγ + k/b)|`.
/// A value `≤ 0` is inconclusive.
pub fn lower_bound_estimate(spec: &Spectrum, params: &FrameParams, grid: &AnnulusGrid, tol: f64) -> Result<f64> {
    params.validate()?;
    let vals = over_grid(grid, |g| lattice_sums(spec, params, g, tol))?;
    Ok(vals
        .iter()
        .map(|(_, s)| s.calderon - s.off_diagonal())
        .fold(f64::INFINITY, f64::min)
        / params.b)
}

/// Both frame-bound estimates from one sweep of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBoundEstimates {
    pub lower: f64,
    pub upper: f64,
}

pub fn frame_bound_estimates(
    spec: &Spectrum,
    params: &FrameParams,
    grid: &AnnulusGrid,
    tol: f64,
) -> Result<FrameBoundEstimates> {
    params.validate()?;
    let vals = over_grid(grid, |g| lattice_sums(spec, params, g, tol))?;
    let lower = vals.iter().map(|(_, s)| s.calderon - s.off_diagonal()).fold(f64::INFINITY, f64::min);
    let upper = vals.iter().map(|(_, s)| s.cross).fold(0.0, f64::max);
    Ok(FrameBoundEstimates { lower: lower / params.b, upper: upper / params.b })
}

/// Minimum of the Calderón sum over the grid, with its location.
pub fn calderon_argmin(spec: &Spectrum, params: &FrameParams, grid: &AnnulusGrid, tol: f64) -> Result<(f64, f64)> {
    params.validate()?;
    let vals = over_grid(grid, |g| calderon_sum(spec, params, g, tol))?;
    Ok(argmin(vals))
}

fn argmin(vals: Vec<(f64, f64)>) -> (f64, f64) {
    vals.into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, (g, v)| if v < best.1 { (g, v) } else { best })
}

/// Minimum of the partial sums `Σ_{j ≤ j0} |ψ̂(a^jγ)|²` over the grid, with its location.
pub fn partial_calderon_argmin(
    spec: &Spectrum,
    params: &FrameParams,
    j0: i64,
    grid: &AnnulusGrid,
    tol: f64,
) -> Result<(f64, f64)> {
    params.validate()?;
    let vals = over_grid(grid, |g| partial_calderon_sum(spec, params, g, j0, tol))?;
    Ok(argmin(vals))
}

/// `inf` over the grid of `Σ_{j ≤ j0} |ψ̂(a^jγ)|²`.
pub fn partial_calderon_inf(spec: &Spectrum, params: &FrameParams, j0: i64, grid: &AnnulusGrid, tol: f64) -> Result<f64> {
    partial_calderon_argmin(spec, params, j0, grid, tol).map(|(_, v)| v)
}

/// Result of [`fit_decay_envelope`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub envelope: DecayEnvelope,
    /// Set for the zero spectrum, where any `C > 0` works.
    pub degenerate: bool,
}

fn just_inside(x: f64, toward_zero: bool) -> f64 {
    if x == 0.0 {
        return x;
    }
    let bits = x.to_bits();
    // for either sign, decrementing the bit pattern moves toward zero
    if toward_zero {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

/// Smallest `C` on a probe grid (step 1/128 up to `probe_max`, plus support
/// and interval edges) with `|ψ̂(γ)|(1 + |γ|^{1+σ}) ≤ C`. The fit is accepted
/// only when the spectrum is known to vanish beyond the probe range or a
/// power tail with `q ≥ 1 + σ` controls it there.
pub fn fit_decay_envelope(spec: &Spectrum, sigma: f64, probe_max: f64) -> Result<EnvelopeFit> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParams(format!("sigma must be > 0, got {sigma}")));
    }
    if !(probe_max > 0.0 && probe_max.is_finite()) {
        return Err(Error::InvalidParams(format!("probe range must be > 0, got {probe_max}")));
    }
    if spec.is_zero() {
        return Ok(EnvelopeFit::degenerate(sigma));
    }
    let s = 1.0 + sigma;
    let t = spec.tails();
    let mut reach = probe_max;
    let mut beyond = None;
    if let Some(sup) = spec.support() {
        if sup.radius() <= probe_max {
            reach = sup.radius();
            beyond = Some(0.0);
        }
    }
    if beyond.is_none() {
        if let Some(pt) = t.power_tail {
            if pt.q >= s && probe_max >= 1.0 {
                beyond = Some(pt.t * (probe_max.powf(-pt.q) + probe_max.powf(s - pt.q)));
            }
        }
    }
    let Some(beyond) = beyond else {
        return Err(Error::EnvelopeUnsound { probe_max });
    };
    let step = 1.0 / 128.0;
    let n = (reach / step).ceil() as i64;
    let mut probes: Vec<f64> = (-n..=n).map(|i| (i as f64 * step).clamp(-reach, reach)).collect();
    let mut edges = Vec::new();
    if let Some(sup) = spec.support() {
        edges.extend([sup.lo, sup.hi]);
    }
    if let Some(iv) = &t.intervals {
        edges.extend(iv.iter().flat_map(|&(lo, hi)| [lo, hi]));
    }
    for e in edges.into_iter().filter(|e| e.abs() <= reach) {
        probes.extend([e, just_inside(e, true), just_inside(e, false)]);
    }
    let worst = probes
        .par_iter()
        .map(|&g| spec.abs(g).map(|v| v * (1.0 + g.abs().powf(s))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(beyond, f64::max);
    if worst == 0.0 {
        return Ok(EnvelopeFit::degenerate(sigma));
    }
    Ok(EnvelopeFit { envelope: DecayEnvelope { c: worst, sigma }, degenerate: false })
}

impl EnvelopeFit {
    fn degenerate(sigma: f64) -> Self {
        Self { envelope: DecayEnvelope { c: f64::MIN_POSITIVE, sigma }, degenerate: true }
    }
}
