//! Truncation `ψ̂_K = ψ̂·χ_[−K,K]`, the oversampling factor `N`, the dual
//! generator of the truncated oversampled system and the closed-form error
//! certificate that goes with it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, AnnulusGrid, FrameParams};
use crate::spectrum::{DecayEnvelope, DualForm, Form, LowFreqBound, Spectrum, TailControl};

/// Default cap for the `K` search.
pub const DEFAULT_K_CAP: u64 = 1 << 32;

/// Frequency half-width of the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    #[serde(rename = "K")]
    pub k: f64,
}

impl TruncationParams {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParams(format!("truncation K must be > 0, got {k}")));
        }
        Ok(Self { k })
    }
}

/// `ψ̂_K`: equal to `ψ̂` on `[−K, K]`, exactly zero outside.
pub fn truncate_spectrum(spec: &Spectrum, k: TruncationParams) -> Result<Spectrum> {
    if let Form::Sampled(grid) = spec.form() {
        let covered = spec.support().is_some_and(|s| s.radius() <= grid.gamma_max);
        if grid.gamma_max < k.k && spec.envelope().is_none() && !covered {
            return Err(Error::OutOfRange { gamma: k.k });
        }
    }
    Ok(spec.restricted(k.k))
}

/// The unique odd `N` with `N − 2 ≤ 2bK < N`.
pub fn select_oversampling(b: f64, k: f64) -> u64 {
    let x = 2.0 * b * k;
    let f = x.floor() as u64;
    if (f + 1) % 2 == 1 {
        f + 1
    } else {
        f + 2
    }
}

/// Annulus grid for feasibility and denominator checks, refined at the
/// points where a generator is known to have thin zero sets.
pub fn feasibility_grid(spec: &Spectrum, params: &FrameParams, k: f64, count: usize) -> Result<AnnulusGrid> {
    let grid = AnnulusGrid::new(params.a, count)?;
    let extra = match spec.form() {
        Form::Counterexample(p) if params.a == 2.0 => {
            // the single dilate of γ ∈ 2^{-n}A_{n+1} − 2 sits at 2^n γ, beyond K once 2^{n+1} − 1 > K
            let j0 = (k + 1.0).log2().ceil() as i32 - 2;
            p.violating_points(j0, 64)
        }
        _ => Vec::new(),
    };
    Ok(grid.with_points(&extra))
}

/// Outcome of the necessary-condition check on the truncated Calderón sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub pass: bool,
    #[serde(rename = "K")]
    pub k: f64,
    /// Smallest truncated Calderón sum found on the grid.
    pub min: f64,
    /// Where it was found.
    pub argmin: f64,
    pub threshold: f64,
}

/// Minimum over the annulus of `Σ_j |ψ̂_K(a^jγ)|²`; fails when it is below `tol`.
pub fn check_feasibility(spec: &Spectrum, params: &FrameParams, k: f64, grid: &AnnulusGrid, tol: f64) -> Result<FeasibilityReport> {
    let trunc = truncate_spectrum(spec, TruncationParams::new(k)?)?;
    let (argmin, min) = frame::calderon_argmin(&trunc, params, grid, 0.1 * tol)?;
    Ok(FeasibilityReport { pass: min >= tol, k, min, argmin, threshold: tol })
}

/// Default denominator threshold `1e−9·b/N`.
pub fn default_denom_tol(b: f64, n: u64) -> f64 {
    1e-9 * b / n as f64
}

/// `ψ̃̂_K = b ψ̂_K / (N Σ_k |ψ̂_K(a^k ·)|²)`, zero where `ψ̂_K` vanishes.
///
/// The denominator is checked on `grid` (it is dilation invariant, so the
/// annulus suffices); any value below `denom_tol` raises
/// [`Error::DenominatorVanishes`].
pub fn dual_spectrum(
    trunc: &Spectrum,
    params: &FrameParams,
    n: u64,
    denom_tol: f64,
    grid: &AnnulusGrid,
) -> Result<Spectrum> {
    params.validate()?;
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("oversampling factor must be odd, got {n}")));
    }
    let Some(support) = trunc.support().copied() else {
        return Err(Error::InvalidParams("dual construction needs a truncated (compactly supported) spectrum".into()));
    };
    if trunc.is_zero() {
        return Ok(Spectrum::zero());
    }
    let tol = (0.01 * denom_tol).min(1e-12);
    let (argmin, min) = frame::calderon_argmin(trunc, params, grid, tol)?;
    if min < denom_tol {
        return Err(Error::DenominatorVanishes { gamma: argmin, value: min });
    }
    let scale = params.b / n as f64;
    let lift = scale / min;
    let t = trunc.tails();
    let tails = TailControl {
        envelope: t.envelope.map(|e| DecayEnvelope { c: e.c * lift, sigma: e.sigma }),
        power_tail: None,
        low_freq: t.low_freq.map(|l| LowFreqBound { c: l.c * lift, p: l.p }),
        inner_gap: t.inner_gap,
        sup: t.sup.map(|s| s * lift),
        intervals: t.intervals.clone(),
    };
    let form = Form::Dual(Arc::new(DualForm { trunc: trunc.clone(), params: *params, oversampling: n, tol }));
    Ok(Spectrum::from_parts(form, Some(support), tails))
}

fn dilation_factor(env: &DecayEnvelope, a: f64) -> f64 {
    let p = a.powf(env.rate());
    p / (p - 1.0)
}

/// `(2C²/(σK^{1+2σ}))(σ/K + b) a^{1+σ}/(a^{1+σ} − 1)`: Bessel bound of the
/// part of the system carried by `|γ| > K`.
pub fn tail_bessel_bound(env: &DecayEnvelope, params: &FrameParams, k: f64) -> f64 {
    let s = env.sigma;
    2.0 * env.c * env.c / (s * k.powf(1.0 + 2.0 * s)) * (s / k + params.b) * dilation_factor(env, params.a)
}

/// `R_K = (4C²/K^{2+2σ})(K + 1/b)(1 + 1/(2σ)) a^{1+σ}/(a^{1+σ} − 1)`.
pub fn compute_rk(env: &DecayEnvelope, params: &FrameParams, k: u64) -> f64 {
    let s = env.sigma;
    let kf = k as f64;
    4.0 * env.c * env.c / kf.powf(2.0 + 2.0 * s)
        * (kf + 1.0 / params.b)
        * (1.0 + 1.0 / (2.0 * s))
        * dilation_factor(env, params.a)
}

/// `ε_K = 2C √((K + 1/b)/K^{3+2σ}) √((1 + 1/(2σ)) a^{1+σ}/(a^{1+σ} − 1))`.
pub fn compute_epsilon_k(env: &DecayEnvelope, params: &FrameParams, k: u64) -> f64 {
    let s = env.sigma;
    let kf = k as f64;
    ((kf + 1.0 / params.b) / kf.powf(3.0 + 2.0 * s)).sqrt()
        * 2.0
        * env.c
        * ((1.0 + 1.0 / (2.0 * s)) * dilation_factor(env, params.a)).sqrt()
}

/// `ε_K / (√(2bA) − ε_K)`.
pub fn error_bound(epsilon_k: f64, a_lower: f64, b: f64) -> Result<f64> {
    if !(a_lower > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidParams(format!("need A > 0 and b > 0, got A = {a_lower}, b = {b}")));
    }
    let threshold = (2.0 * b * a_lower).sqrt();
    if !(epsilon_k < threshold) {
        return Err(Error::BoundInapplicable { epsilon_k, threshold });
    }
    Ok(epsilon_k / (threshold - epsilon_k))
}

/// The full certificate for one truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxDualPlan {
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "A")]
    pub a_lower: f64,
    #[serde(rename = "R_K")]
    pub r_k: f64,
    #[serde(rename = "epsilon_K")]
    pub epsilon_k: f64,
    pub error_bound: f64,
    pub oversampled_lower_bound: f64,
    pub perturbed_lower_bound: f64,
    pub params: FrameParams,
    pub envelope: DecayEnvelope,
}

impl ApproxDualPlan {
    /// Plan at a fixed `K` from the closed forms alone. A generator whose
    /// support already lies in `[−K, K]` loses nothing to truncation, so the
    /// certificate is exact there (`R_K = ε_K = 0`).
    pub fn at(k: u64, params: &FrameParams, a_lower: f64, env: &DecayEnvelope, exact: bool) -> Result<Self> {
        params.validate()?;
        if k == 0 {
            return Err(Error::InvalidParams("K must be >= 1".into()));
        }
        let (r_k, epsilon_k) = if exact {
            (0.0, 0.0)
        } else {
            (compute_rk(env, params, k), compute_epsilon_k(env, params, k))
        };
        let err = error_bound(epsilon_k, a_lower, params.b)?;
        let n = select_oversampling(params.b, k as f64);
        let oversampled = a_lower * n as f64;
        let shrink = 1.0 - (r_k / (2.0 * params.b * a_lower * k as f64)).sqrt();
        Ok(Self {
            k,
            n,
            a_lower,
            r_k,
            epsilon_k,
            error_bound: err,
            oversampled_lower_bound: oversampled,
            perturbed_lower_bound: oversampled * shrink * shrink,
            params: *params,
            envelope: *env,
        })
    }

    /// Checks every structural invariant and that the stored numbers are the
    /// closed forms of the stored inputs.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Format(format!("plan invariant violated: {msg}")));
        self.params.validate()?;
        DecayEnvelope::new(self.envelope.c, self.envelope.sigma)?;
        if self.k == 0 {
            return bad("K must be >= 1".into());
        }
        if !(self.a_lower > 0.0) {
            return bad(format!("A must be > 0, got {}", self.a_lower));
        }
        let twice = 2.0 * self.params.b * self.k as f64;
        if self.n.is_multiple_of(2) || !((self.n as f64 - 2.0) <= twice && twice < self.n as f64) {
            return bad(format!("N = {} is not the odd integer with N - 2 <= 2bK < N", self.n));
        }
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
        if !close(self.epsilon_k, (self.r_k / self.k as f64).sqrt()) {
            return bad(format!("epsilon_K = {} differs from sqrt(R_K/K)", self.epsilon_k));
        }
        let exact = self.r_k == 0.0 && self.epsilon_k == 0.0;
        if !exact {
            if !close(self.r_k, compute_rk(&self.envelope, &self.params, self.k)) {
                return bad("R_K does not match its closed form".into());
            }
            if !close(self.epsilon_k, compute_epsilon_k(&self.envelope, &self.params, self.k)) {
                return bad("epsilon_K does not match its closed form".into());
            }
        }
        let err = error_bound(self.epsilon_k, self.a_lower, self.params.b)
            .map_err(|e| Error::Format(format!("plan invariant violated: {e}")))?;
        if !close(err, self.error_bound) && !(err == 0.0 && self.error_bound == 0.0) {
            return bad(format!("error_bound = {} but the closed form gives {err}", self.error_bound));
        }
        if !(self.error_bound >= 0.0) {
            return bad("error_bound must be >= 0".into());
        }
        if !close(self.oversampled_lower_bound, self.a_lower * self.n as f64) {
            return bad("oversampled_lower_bound must equal A N".into());
        }
        let shrink = 1.0 - (self.r_k / (2.0 * self.params.b * self.a_lower * self.k as f64)).sqrt();
        let expected = self.oversampled_lower_bound * shrink * shrink;
        if !close(self.perturbed_lower_bound, expected) && !(expected == 0.0 && self.perturbed_lower_bound == 0.0) {
            return bad("perturbed_lower_bound does not match A N (1 - sqrt(R_K/(2bAK)))^2".into());
        }
        Ok(())
    }
}

/// Search and feasibility settings for [`plan_for_target`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    pub k_cap: u64,
    pub grid_count: usize,
    /// Feasibility threshold on the truncated Calderón sum.
    pub feasibility_tol: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { k_cap: DEFAULT_K_CAP, grid_count: frame::DEFAULT_ANNULUS_COUNT, feasibility_tol: 1e-6 }
    }
}

/// True when the generator vanishes outside `[−K, K]`.
pub fn exact_at(spec: &Spectrum, k: f64) -> bool {
    spec.support().is_some_and(|s| s.radius() <= k)
}

fn bound_at(spec: &Spectrum, params: &FrameParams, a_lower: f64, env: &DecayEnvelope, k: u64) -> Option<f64> {
    if exact_at(spec, k as f64) {
        return Some(0.0);
    }
    error_bound(compute_epsilon_k(env, params, k), a_lower, params.b).ok()
}

/// Runs the feasibility check at `K` and turns a failure into
/// [`Error::FrameConditionViolated`].
pub fn require_feasible(spec: &Spectrum, params: &FrameParams, k: f64, opts: &PlanOptions) -> Result<FeasibilityReport> {
    let grid = feasibility_grid(spec, params, k, opts.grid_count)?;
    let report = check_feasibility(spec, params, k, &grid, opts.feasibility_tol)?;
    if !report.pass {
        return Err(Error::FrameConditionViolated { gamma: report.argmin, min: report.min });
    }
    Ok(report)
}

/// Plan at a caller-chosen `K`, after the feasibility check.
pub fn plan_for_k(
    spec: &Spectrum,
    params: &FrameParams,
    a_lower: f64,
    env: &DecayEnvelope,
    k: u64,
    opts: &PlanOptions,
) -> Result<ApproxDualPlan> {
    let plan = ApproxDualPlan::at(k, params, a_lower, env, exact_at(spec, k as f64))?;
    require_feasible(spec, params, k as f64, opts)?;
    Ok(plan)
}

/// Smallest integer `K` whose certified bound is at most `eps_target`.
///
/// Small `K` are scanned one by one; past that the bound is strictly
/// decreasing in `K`, so the scan continues by doubling and bisection.
pub fn smallest_k(
    spec: &Spectrum,
    params: &FrameParams,
    a_lower: f64,
    env: &DecayEnvelope,
    eps_target: f64,
    k_cap: u64,
) -> Result<u64> {
    params.validate()?;
    if !(eps_target > 0.0) {
        return Err(Error::InvalidParams(format!("target epsilon must be > 0, got {eps_target}")));
    }
    if !(a_lower > 0.0) {
        return Err(Error::InvalidParams(format!("lower frame bound A must be > 0, got {a_lower}")));
    }
    let meets = |k: u64| bound_at(spec, params, a_lower, env, k).is_some_and(|v| v <= eps_target);
    const SCAN: u64 = 1 << 16;
    for k in 1..=SCAN.min(k_cap) {
        if meets(k) {
            return Ok(k);
        }
    }
    let mut lo = SCAN;
    let mut hi = SCAN;
    loop {
        if hi >= k_cap {
            hi = k_cap;
            if !meets(hi) {
                return Err(Error::TargetUnreachable { cap: k_cap });
            }
            break;
        }
        let next = hi.saturating_mul(2);
        lo = hi;
        hi = next;
        if hi < k_cap && meets(hi) {
            break;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Plan for the smallest `K` meeting `eps_target`, feasibility checked.
pub fn plan_for_target(
    spec: &Spectrum,
    params: &FrameParams,
    a_lower: f64,
    env: &DecayEnvelope,
    eps_target: f64,
    opts: &PlanOptions,
) -> Result<ApproxDualPlan> {
    let k = smallest_k(spec, params, a_lower, env, eps_target, opts.k_cap)?;
    plan_for_k(spec, params, a_lower, env, k, opts)
}

/// Dual generator for a plan: truncate at `K` and divide by the truncated
/// Calderón sum.
pub fn plan_dual(spec: &Spectrum, plan: &ApproxDualPlan, grid_count: usize) -> Result<Spectrum> {
    let trunc = truncate_spectrum(spec, TruncationParams::new(plan.k as f64)?)?;
    let grid = feasibility_grid(spec, &plan.params, plan.k as f64, grid_count)?;
    dual_spectrum(&trunc, &plan.params, plan.n, default_denom_tol(plan.params.b, plan.n), &grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn unit() -> (DecayEnvelope, FrameParams) {
        (DecayEnvelope::new(1.0, 1.0).unwrap(), FrameParams::new(2.0, 1.0).unwrap())
    }

    #[test]
    fn oversampling_examples() {
        assert_eq!(select_oversampling(1.0, 1.0), 3);
        assert_eq!(select_oversampling(1.0, 2.0), 5);
        assert_eq!(select_oversampling(0.5, 3.0), 5);
        assert_eq!(select_oversampling(1.0, 10.0), 21);
        assert_eq!(select_oversampling(0.1, 0.5), 1);
    }

    #[test]
    fn zero_envelope_gives_zero() {
        let (_, p) = unit();
        let env = DecayEnvelope::new(0.0, 1.0).unwrap();
        assert_eq!(tail_bessel_bound(&env, &p, 10.0), 0.0);
        assert_eq!(compute_rk(&env, &p, 10), 0.0);
        assert_eq!(compute_epsilon_k(&env, &p, 10), 0.0);
        assert_eq!(error_bound(0.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn doubling_c_quadruples_tail_bound() {
        let (env, p) = unit();
        let twice = DecayEnvelope::new(2.0, 1.0).unwrap();
        let r = tail_bessel_bound(&twice, &p, 7.5) / tail_bessel_bound(&env, &p, 7.5);
        assert!((r - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rk_dominates_scaled_tail_bound() {
        let (env, p) = unit();
        for k in [1u64, 3, 10, 100] {
            let n = select_oversampling(p.b, k as f64);
            let fine = FrameParams::new(p.a, p.b / n as f64).unwrap();
            let chained = (n as f64 / p.b) * tail_bessel_bound(&env, &fine, k as f64);
            assert!(compute_rk(&env, &p, k) >= chained * (1.0 - 1e-12), "K={k}");
        }
    }

    #[test]
    fn error_bound_boundary() {
        let e = 2f64.sqrt();
        assert!(matches!(error_bound(e, 1.0, 1.0), Err(Error::BoundInapplicable { .. })));
    }

    #[test]
    fn plan_round_trip_and_tamper() {
        let (env, p) = unit();
        let plan = ApproxDualPlan::at(10, &p, 1.0, &env, false).unwrap();
        plan.validate().unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        for key in ["\"K\"", "\"N\"", "\"A\"", "\"R_K\"", "\"epsilon_K\"", "\"error_bound\"", "\"C\"", "\"sigma\""] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
        let back: ApproxDualPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);
        let mut bad = plan;
        bad.epsilon_k *= 1.01;
        assert!(bad.validate().is_err());
        let mut bad = plan;
        bad.n = 23;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn target_search_matches_scan() {
        let (env, p) = unit();
        let bl = generators::battle_lemarie(2);
        assert_eq!(smallest_k(&bl, &p, 1.0, &env, 2.2e-2, DEFAULT_K_CAP).unwrap(), 10);
        assert_eq!(
            smallest_k(&bl, &p, 1.0, &env, 1e-300, 1000),
            Err(Error::TargetUnreachable { cap: 1000 })
        );
        // beyond the linear scan the bisection must still land on the first K
        let k = smallest_k(&bl, &p, 1.0, &env, 1e-12, DEFAULT_K_CAP).unwrap();
        let b = |k| error_bound(compute_epsilon_k(&env, &p, k), 1.0, 1.0).unwrap();
        assert!(k > 1 << 16);
        assert!(b(k) <= 1e-12 && b(k - 1) > 1e-12);
    }

    #[test]
    fn shannon_dual_is_a_third() {
        let p = FrameParams::new(2.0, 1.0).unwrap();
        let s = generators::shannon();
        let trunc = truncate_spectrum(&s, TruncationParams::new(1.0).unwrap()).unwrap();
        let grid = AnnulusGrid::new(2.0, 64).unwrap();
        let dual = dual_spectrum(&trunc, &p, 3, default_denom_tol(1.0, 3), &grid).unwrap();
        for g in [-0.9, -0.5, 0.5, 0.75, 0.99, 0.3, 1.2] {
            assert_eq!(dual.eval(g).unwrap(), s.eval(g).unwrap() / 3.0);
        }
    }

    #[test]
    fn zero_dual_is_zero() {
        let p = FrameParams::new(2.0, 1.0).unwrap();
        let grid = AnnulusGrid::new(2.0, 8).unwrap();
        let dual = dual_spectrum(&Spectrum::zero(), &p, 3, 1e-9, &grid).unwrap();
        assert!(dual.is_zero());
    }

    #[test]
    fn zero_spectrum_is_infeasible() {
        let p = FrameParams::new(2.0, 1.0).unwrap();
        let grid = AnnulusGrid::new(2.0, 8).unwrap();
        let r = check_feasibility(&Spectrum::zero(), &p, 1.0, &grid, 1e-6).unwrap();
        assert!(!r.pass);
    }
}
