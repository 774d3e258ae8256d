//! Fourier-domain representation of wavelet generators.
//!
//! The convention throughout the crate is `f̂(γ) = ∫ f(x) e^{-2πixγ} dx`.
//! A [`Spectrum`] is either one of the named analytic generators or a
//! uniformly sampled grid, together with the tail information needed to
//! truncate the infinite lattice sums with a controlled error.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, FrameParams};
use crate::generators::{self, BattleLemarie, CounterexampleParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Constants `(C, σ)` with `|ψ̂(γ)| ≤ C / (1 + |γ|^{1+σ})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    #[serde(rename = "C")]
    pub c: f64,
    pub sigma: f64,
}

impl DecayEnvelope {
    pub fn new(c: f64, sigma: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!("envelope C must be >= 0, got {c}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("envelope sigma must be > 0, got {sigma}")));
        }
        Ok(Self { c, sigma })
    }

    #[inline]
    pub fn bound(&self, gamma: f64) -> f64 {
        self.c / (1.0 + gamma.abs().powf(1.0 + self.sigma))
    }

    /// Exponent `1 + σ` of the algebraic decay.
    #[inline]
    pub fn rate(&self) -> f64 {
        1.0 + self.sigma
    }
}

/// Closed interval `[lo, hi]` outside of which the spectrum vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn symmetric(k: f64) -> Self {
        Self { lo: -k, hi: k }
    }

    #[inline]
    pub fn contains(&self, gamma: f64) -> bool {
        gamma >= self.lo && gamma <= self.hi
    }

    pub fn radius(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn intersect(&self, other: &Support) -> Support {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            Support { lo: 0.0, hi: 0.0 }
        } else {
            Support { lo, hi }
        }
    }
}

/// `|ψ̂(γ)| ≤ c |γ|^p` for `|γ| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowFreqBound {
    pub c: f64,
    pub p: f64,
}

/// `|ψ̂(γ)| ≤ t |γ|^{-q}` for `|γ| ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub t: f64,
    pub q: f64,
}

/// Everything known about where and how fast a spectrum vanishes.
#[derive(Debug, Clone, Default)]
pub struct TailControl {
    pub envelope: Option<DecayEnvelope>,
    pub power_tail: Option<PowerTail>,
    pub low_freq: Option<LowFreqBound>,
    /// The spectrum is exactly zero for `|γ| < inner_gap`.
    pub inner_gap: Option<f64>,
    /// Uniform bound on `|ψ̂|`.
    pub sup: Option<f64>,
    /// Closed intervals covering the set where the spectrum may be nonzero.
    pub intervals: Option<Arc<Vec<(f64, f64)>>>,
}

impl TailControl {
    /// Amplitude bound `M` and decay exponent `q` with `|ψ̂(x)| ≤ M (r/|x|)^q` for `|x| ≥ r`.
    pub fn high_bound(&self, r: f64, support: Option<&Support>) -> Option<(f64, f64)> {
        if let Some(s) = support {
            if r > s.radius() {
                return Some((0.0, 1.0));
            }
        }
        let mut best: Option<(f64, f64)> = None;
        if let Some(env) = self.envelope {
            let q = env.rate();
            best = Some((env.c * r.powf(-q), q));
        }
        if let Some(pt) = self.power_tail {
            if r >= 1.0 {
                let cand = (pt.t * r.powf(-pt.q), pt.q);
                best = Some(match best {
                    Some(b) if b.0 <= cand.0 => b,
                    _ => cand,
                });
            }
        }
        best
    }

    /// Amplitude bound `M` and exponent `p` with `|ψ̂(x)| ≤ M (|x|/r)^p` for `|x| ≤ r`.
    pub fn low_bound(&self, r: f64) -> Option<(f64, f64)> {
        if let Some(gap) = self.inner_gap {
            if r < gap {
                return Some((0.0, 1.0));
            }
        }
        match self.low_freq {
            Some(lf) if r <= 1.0 => Some((lf.c * r.powf(lf.p), lf.p)),
            _ => None,
        }
    }

    pub fn has_high_control(&self, support: Option<&Support>) -> bool {
        support.is_some() || self.envelope.is_some() || self.power_tail.is_some()
    }

    pub fn has_low_control(&self) -> bool {
        self.inner_gap.is_some() || self.low_freq.is_some()
    }

    fn scaled(&self, factor: f64) -> TailControl {
        let f = factor.abs();
        TailControl {
            envelope: self.envelope.map(|e| DecayEnvelope { c: e.c * f, sigma: e.sigma }),
            power_tail: self.power_tail.map(|p| PowerTail { t: p.t * f, q: p.q }),
            low_freq: self.low_freq.map(|l| LowFreqBound { c: l.c * f, p: l.p }),
            inner_gap: self.inner_gap,
            sup: self.sup.map(|s| s * f),
            intervals: self.intervals.clone(),
        }
    }
}

/// Uniformly sampled spectrum on `[-gamma_max, gamma_max]`, odd sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    pub gamma_max: f64,
    pub step: f64,
    pub values: Vec<Complex64>,
}

impl SampledGrid {
    pub fn new(gamma_max: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0) || !(gamma_max >= 0.0) {
            return Err(Error::InvalidParams("sampled grid needs step > 0 and gamma_max >= 0".into()));
        }
        if values.len().is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "sampled grid needs an odd sample count, got {}",
                values.len()
            )));
        }
        let half = (values.len() - 1) / 2;
        let span = half as f64 * step;
        if (span - gamma_max).abs() > 1e-9 * gamma_max.max(step) {
            return Err(Error::InvalidParams(format!(
                "grid of {} samples with step {step} does not cover [-{gamma_max}, {gamma_max}]",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParams("sampled grid contains non-finite values".into()));
        }
        Ok(Self { gamma_max, step, values })
    }

    /// Samples `f` on the symmetric grid `{m·step : |m| ≤ half}`.
    pub fn from_fn<F>(half: usize, step: f64, f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<Complex64>,
    {
        let mut f = f;
        let values = (0..2 * half + 1)
            .map(|i| f((i as f64 - half as f64) * step))
            .collect::<Result<Vec<_>>>()?;
        Self::new(half as f64 * step, step, values)
    }

    pub fn half(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    pub fn gamma(&self, index: usize) -> f64 {
        (index as f64 - self.half() as f64) * self.step
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn interpolate(&self, gamma: f64) -> Option<Complex64> {
        let pos = gamma / self.step + self.half() as f64;
        let last = (self.values.len() - 1) as f64;
        if !(pos >= -1e-9) || pos > last + 1e-9 {
            return None;
        }
        let pos = pos.clamp(0.0, last);
        let i = pos.floor() as usize;
        if i as f64 == pos || i + 1 >= self.values.len() {
            return Some(self.values[i.min(self.values.len() - 1)]);
        }
        let w = pos - i as f64;
        Some(self.values[i] * (1.0 - w) + self.values[i + 1] * w)
    }

    /// Discrete L² energy `step · Σ |v|²`.
    pub fn energy(&self) -> f64 {
        crate::numeric::sum(&self.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>()) * self.step
    }

    /// Writes the grid as CSV with header `gamma,re,im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["gamma", "re", "im"])?;
        for (i, v) in self.values.iter().enumerate() {
            wtr.write_record([
                format!("{}", self.gamma(i)),
                format!("{}", v.re),
                format!("{}", v.im),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a `gamma,re,im` CSV; rows must be ascending, uniformly spaced and symmetric about 0.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() != 3 || &header[0] != "gamma" || &header[1] != "re" || &header[2] != "im" {
            return Err(Error::Format(format!(
                "spectrum CSV header must be exactly `gamma,re,im`, got `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut gammas = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != 3 {
                return Err(Error::Format("spectrum CSV rows need three fields".into()));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad number `{s}`: {e}")))
            };
            gammas.push(parse(&record[0])?);
            values.push(Complex64::new(parse(&record[1])?, parse(&record[2])?));
        }
        if gammas.len() < 3 {
            return Err(Error::Format("spectrum CSV needs at least three rows".into()));
        }
        let step = gammas[1] - gammas[0];
        if !(step > 0.0) {
            return Err(Error::Format("spectrum CSV gamma column must be ascending".into()));
        }
        for (i, g) in gammas.iter().enumerate() {
            let expected = gammas[0] + i as f64 * step;
            if (g - expected).abs() > 1e-9 * step.max(g.abs() * 1e-3) + 1e-12 {
                return Err(Error::Format(format!("non-uniform gamma step at row {}", i + 1)));
            }
        }
        let gamma_max = *gammas.last().unwrap();
        if (gammas[0] + gamma_max).abs() > 1e-9 * step.max(gamma_max) {
            return Err(Error::Format("spectrum CSV grid must be symmetric about 0".into()));
        }
        SampledGrid::new(gamma_max, step, values).map_err(|e| Error::Format(e.to_string()))
    }
}

/// The dual generator `b ψ̂_K / (N Σ_k |ψ̂_K(a^k ·)|²)`, evaluated lazily.
#[derive(Debug, Clone)]
pub struct DualForm {
    pub trunc: Spectrum,
    pub params: FrameParams,
    pub oversampling: u64,
    pub tol: f64,
}

impl DualForm {
    pub fn scale(&self) -> f64 {
        self.params.b / self.oversampling as f64
    }
}

#[derive(Debug, Clone)]
pub enum Form {
    Zero,
    Shannon,
    BSpline { m: u32 },
    BattleLemarie(Arc<BattleLemarie>),
    Counterexample(CounterexampleParams),
    Perturbed { base: Arc<Spectrum>, eta: f64 },
    Scaled { base: Arc<Spectrum>, factor: f64 },
    Dual(Arc<DualForm>),
    Sampled(Arc<SampledGrid>),
}

/// A generator in the Fourier domain.
#[derive(Debug, Clone)]
pub struct Spectrum {
    form: Form,
    support: Option<Support>,
    tails: TailControl,
}

impl Spectrum {
    pub(crate) fn from_parts(form: Form, support: Option<Support>, tails: TailControl) -> Self {
        Self { form, support, tails }
    }

    pub fn zero() -> Self {
        Self {
            form: Form::Zero,
            support: Some(Support { lo: 0.0, hi: 0.0 }),
            tails: TailControl {
                inner_gap: Some(f64::INFINITY),
                sup: Some(0.0),
                intervals: Some(Arc::new(Vec::new())),
                ..TailControl::default()
            },
        }
    }

    /// A sampled spectrum. Without an envelope, evaluation outside the grid fails.
    pub fn sampled(grid: SampledGrid, envelope: Option<DecayEnvelope>, support: Option<Support>) -> Self {
        let sup = grid.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let range = Support::symmetric(grid.gamma_max);
        let tails = TailControl {
            envelope,
            sup: if envelope.is_some() || support.is_some() { Some(sup) } else { None },
            ..TailControl::default()
        };
        let support = match (support, envelope) {
            (Some(s), _) => Some(s),
            (None, Some(_)) => Some(range),
            (None, None) => None,
        };
        Self { form: Form::Sampled(Arc::new(grid)), support, tails }
    }

    /// `c · ψ̂`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            form: Form::Scaled { base: Arc::new(self.clone()), factor },
            support: self.support,
            tails: self.tails.scaled(factor),
        }
    }

    /// Same spectrum with its support restricted to `[-k, k]`.
    pub fn restricted(&self, k: f64) -> Self {
        let window = Support::symmetric(k);
        let support = Some(match self.support {
            Some(s) => s.intersect(&window),
            None => window,
        });
        let mut tails = self.tails.clone();
        if tails.sup.is_none() {
            if let Some(env) = tails.envelope {
                tails.sup = Some(env.c);
            }
        }
        Self { form: self.form.clone(), support, tails }
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn support(&self) -> Option<&Support> {
        self.support.as_ref()
    }

    pub fn tails(&self) -> &TailControl {
        &self.tails
    }

    pub fn envelope(&self) -> Option<DecayEnvelope> {
        self.tails.envelope
    }

    /// Attaches a decay envelope (e.g. a caller override or a fitted one).
    pub fn with_envelope(mut self, envelope: DecayEnvelope) -> Self {
        self.tails.envelope = Some(envelope);
        if self.tails.sup.is_none() {
            self.tails.sup = Some(envelope.c);
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        match self.form {
            Form::Zero => true,
            _ => matches!(self.support, Some(s) if s.lo == s.hi && s.lo == 0.0),
        }
    }

    /// Registry name (`shannon`, `battle-lemarie:2`, ...).
    pub fn name(&self) -> String {
        match &self.form {
            Form::Zero => "zero".into(),
            Form::Shannon => "shannon".into(),
            Form::BSpline { m } => format!("bspline:{m}"),
            Form::BattleLemarie(bl) => format!("battle-lemarie:{}", bl.m()),
            Form::Counterexample(p) => format!("counterexample:{}", p.n_max),
            Form::Perturbed { base, eta } => format!("perturbed:{}:{}", base.name(), eta),
            Form::Scaled { base, factor } => format!("scaled:{}:{}", base.name(), factor),
            Form::Dual(d) => format!("dual:{}", d.trunc.name()),
            Form::Sampled(_) => "sampled".into(),
        }
    }

    /// ψ̂(γ).
    pub fn eval(&self, gamma: f64) -> Result<Complex64> {
        if let Some(s) = &self.support {
            if !s.contains(gamma) {
                return Ok(ZERO);
            }
        }
        match &self.form {
            Form::Zero => Ok(ZERO),
            Form::Shannon => Ok(generators::shannon_type_spectrum(gamma)),
            Form::BSpline { m } => Ok(generators::bspline_spectrum(*m, gamma)),
            Form::BattleLemarie(bl) => Ok(bl.eval(gamma)),
            Form::Counterexample(p) => Ok(generators::counterexample_spectrum(p, gamma)),
            Form::Perturbed { base, eta } => {
                let w = eta / std::f64::consts::SQRT_2;
                Ok(base.eval(gamma)? + base.eval(gamma / 2.0)? * w)
            }
            Form::Scaled { base, factor } => Ok(base.eval(gamma)? * *factor),
            Form::Dual(d) => {
                let v = d.trunc.eval(gamma)?;
                if v == ZERO {
                    return Ok(ZERO);
                }
                let cal = frame::calderon_sum(&d.trunc, &d.params, gamma, d.tol)?;
                Ok(v * (d.scale() / cal))
            }
            Form::Sampled(grid) => match grid.interpolate(gamma) {
                Some(v) => Ok(v),
                None if self.tails.envelope.is_some() => Ok(ZERO),
                None => Err(Error::OutOfRange { gamma }),
            },
        }
    }

    /// |ψ̂(γ)|.
    #[inline]
    pub fn abs(&self, gamma: f64) -> Result<f64> {
        self.eval(gamma).map(|v| v.norm())
    }

    /// Samples the spectrum on `{m·step : |m| ≤ half}`.
    pub fn sample(&self, half: usize, step: f64) -> Result<SampledGrid> {
        SampledGrid::from_fn(half, step, |g| self.eval(g))
    }
}

/// Evaluates a spectrum at one frequency.
pub fn eval_spectrum(spec: &Spectrum, gamma: f64) -> Result<Complex64> {
    spec.eval(gamma)
}
