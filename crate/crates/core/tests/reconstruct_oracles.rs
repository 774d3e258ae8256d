//! Reconstruction pipeline: exact cases, the FFT path against the alias-sum
//! engine, and the time-domain oracle.

use approx::assert_relative_eq;
use dualframe::approx_dual::{self, ApproxDualPlan};
use dualframe::generators;
use dualframe::numeric::trapezoid;
use dualframe::reconstruct::{self, Band, BandlimitedSignal, ReconstructionEngine};
use dualframe::spectrum::{SampledGrid, Support};
use dualframe::{FrameParams, Spectrum};
use num_complex::Complex64;

fn dyadic() -> FrameParams {
    FrameParams::new(2.0, 1.0).unwrap()
}

fn shannon_dual() -> (Spectrum, Spectrum) {
    let s = generators::shannon();
    let plan = ApproxDualPlan::at(1, &dyadic(), 1.0, &dualframe::DecayEnvelope::new(2.0, 1.0).unwrap(), true).unwrap();
    let dual = approx_dual::plan_dual(&s, &plan, 256).unwrap();
    (s, dual)
}

fn shannon_signals(count: usize, step: f64) -> Vec<BandlimitedSignal> {
    reconstruct::random_bandlimited_in(11, Band::new(0.5, 1.0).unwrap(), step, count, 3.0).unwrap()
}

fn perturbed(k: u64) -> (Spectrum, Spectrum, ApproxDualPlan) {
    let spec = generators::from_name("perturbed:battle-lemarie:2:0.5").unwrap();
    let plan = ApproxDualPlan::at(k, &dyadic(), 0.25, &spec.envelope().unwrap(), false).unwrap();
    let dual = approx_dual::plan_dual(&spec, &plan, 512).unwrap();
    (spec, dual, plan)
}

fn l2_diff(x: &BandlimitedSignal, y: &BandlimitedSignal) -> f64 {
    assert_eq!(x.step, y.step);
    let h = x.half().max(y.half()) as i64;
    let at = |s: &BandlimitedSignal, m: i64| {
        let i = m + s.half() as i64;
        if i < 0 || i >= s.values.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            s.values[i as usize]
        }
    };
    let sq: Vec<f64> = (-h..=h).map(|m| (at(x, m) - at(y, m)).norm_sqr()).collect();
    trapezoid(&sq, x.step).sqrt()
}

#[test]
fn shannon_parseval() {
    let (_, dual) = shannon_dual();
    for f in shannon_signals(3, 1.0 / 1024.0) {
        let c = reconstruct::analysis_coefficients(&f, &dual, &dyadic(), 3, 1e-12).unwrap();
        assert_relative_eq!(c.energy(), f.norm().powi(2) / 3.0, max_relative = 1e-9);
    }
}

#[test]
fn shannon_round_trip_is_pointwise_exact() {
    let (s, dual) = shannon_dual();
    for f in shannon_signals(3, 1.0 / 512.0) {
        let c = reconstruct::analysis_coefficients(&f, &dual, &dyadic(), 3, 1e-12).unwrap();
        let out = reconstruct::synthesize(&c, &s, &dyadic(), 3, 2.0, f.step).unwrap();
        for (i, v) in out.values.iter().enumerate() {
            let g = out.gamma(i);
            assert!((v - f.eval(g)).norm() < 1e-9, "gamma = {g}");
        }
    }
}

#[test]
fn shannon_error_is_stable_under_grid_halving() {
    let (s, dual) = shannon_dual();
    for step in [1.0 / 512.0, 1.0 / 1024.0] {
        let f = &shannon_signals(1, step)[0];
        let r = reconstruct::reconstruction_error(f, &dual, &s, &dyadic(), 3, 1e-12, 1e-9).unwrap();
        assert!(r.relative_error <= 1e-9 && r.pass && !r.degenerate);
    }
}

#[test]
fn fft_pipeline_matches_engine() {
    let (spec, dual, plan) = perturbed(4);
    let step = 1.0 / 64.0;
    let fs = reconstruct::random_bandlimited(5, 2.0, step, 2).unwrap();
    let mut engine = ReconstructionEngine::new(&dual, &spec, &plan.params, plan.n, 2.0, step, 1e-8).unwrap();
    for f in &fs {
        let c = reconstruct::analysis_coefficients(f, &dual, &plan.params, plan.n, 1e-8).unwrap();
        let out = reconstruct::synthesize(&c, &spec, &plan.params, plan.n, 4.0, step).unwrap();
        let direct = l2_diff(&out, f) / f.norm();
        let r = engine.run(f, plan.error_bound).unwrap();
        assert_relative_eq!(direct, r.relative_error, max_relative = 1e-6);
        assert!(r.relative_error > 1e-6, "the K = 4 system is not exact");
    }
}

#[test]
fn bound_holds_and_error_shrinks_with_k() {
    let fs = reconstruct::random_bandlimited(77, 2.0, 1.0 / 512.0, 4).unwrap();
    let mut prev: Option<Vec<f64>> = None;
    for k in [4, 8, 16] {
        let (spec, dual, plan) = perturbed(k);
        let mut engine = ReconstructionEngine::new(&dual, &spec, &plan.params, plan.n, 2.0, 1.0 / 512.0, 1e-8).unwrap();
        let errs: Vec<f64> = fs
            .iter()
            .map(|f| {
                let r = engine.run(f, plan.error_bound).unwrap();
                assert!(r.pass && r.relative_error + r.tail_budget <= plan.error_bound);
                assert!(r.tail_budget.is_finite() && r.j_range.0 <= r.j_range.1);
                r.relative_error
            })
            .collect();
        if let Some(p) = &prev {
            for (e, q) in errs.iter().zip(p) {
                assert!(*e <= 1.05 * q, "K = {k}: {e} > {q}");
            }
        }
        prev = Some(errs);
    }
}

#[test]
fn analysis_is_linear() {
    let (_, dual, plan) = perturbed(4);
    let fs = reconstruct::random_bandlimited(3, 2.0, 1.0 / 64.0, 2).unwrap();
    let (al, be) = (Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.5));
    let mix = fs[0].combine(al, &fs[1], be).unwrap();
    let c0 = reconstruct::analysis_coefficients(&fs[0], &dual, &plan.params, plan.n, 1e-8).unwrap();
    let c1 = reconstruct::analysis_coefficients(&fs[1], &dual, &plan.params, plan.n, 1e-8).unwrap();
    let cm = reconstruct::analysis_coefficients(&mix, &dual, &plan.params, plan.n, 1e-8).unwrap();
    let scale = cm.energy().sqrt();
    for s in &cm.scales {
        for (i, v) in s.values.iter().enumerate().step_by(7) {
            let k = s.k_lo + i as i64;
            let z = Complex64::new(0.0, 0.0);
            let expect = al * c0.get(s.j, k).unwrap_or(z) + be * c1.get(s.j, k).unwrap_or(z);
            assert!((v - expect).norm() <= 1e-9 * scale);
        }
    }
}

#[test]
fn dilation_is_unitary() {
    let bl = generators::battle_lemarie(2);
    let base: f64 = {
        let sq: Vec<f64> = (-40_000..=40_000).map(|i| bl.abs(i as f64 / 1024.0).unwrap().powi(2)).collect();
        trapezoid(&sq, 1.0 / 1024.0)
    };
    for j in [-2i32, 1, 3] {
        let d = 2f64.powi(j);
        let h = 1.0 / 1024.0 * d;
        let sq: Vec<f64> = (-40_000..=40_000)
            .map(|i| (bl.abs(i as f64 * h / d).unwrap() / d.sqrt()).powi(2))
            .collect();
        assert_relative_eq!(trapezoid(&sq, h), base, max_relative = 1e-9);
    }
}

#[test]
fn oracle_self_product_and_orthogonality() {
    let step = 1.0 / 256.0;
    let f = &reconstruct::random_bandlimited_in(4, Band::new(0.25, 1.0).unwrap(), step, 1, 2.0).unwrap()[0];
    let g = f.as_spectrum().unwrap();
    let v = reconstruct::time_domain_oracle(f, &g, 2.0, 0, 0.0, 1 << 12 | 1).unwrap();
    assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-6, "{v}");

    let far = &reconstruct::random_bandlimited_in(4, Band::new(1.5, 2.0).unwrap(), step, 1, 2.0).unwrap()[0];
    let grid = SampledGrid::new(far.omega_max, far.step, far.values.clone()).unwrap();
    let far = Spectrum::sampled(grid, None, Some(Support::symmetric(2.0)));
    let v = reconstruct::time_domain_oracle(f, &far, 2.0, 0, 0.7, 1 << 12 | 1).unwrap();
    assert!(v.norm() < 1e-8, "{v}");
}

#[test]
fn shannon_coefficient_matches_oracle() {
    let (_, dual) = shannon_dual();
    let f = &shannon_signals(1, 1.0 / 512.0)[0];
    let c = reconstruct::analysis_coefficients(f, &dual, &dyadic(), 3, 1e-12).unwrap();
    for k in [-2i64, 0, 3] {
        let coeff = c.get(0, k).unwrap();
        let oracle = reconstruct::time_domain_oracle(f, &dual, 2.0, 0, k as f64 / 3.0, 1 << 12 | 1).unwrap();
        let fourier = reconstruct::inner_product_fourier(f, &dual, 2.0, 0, k as f64 / 3.0).unwrap();
        assert!((coeff - oracle).norm() < 1e-6 && (coeff - fourier).norm() < 1e-12);
    }
}

#[test]
fn zero_signal_report() {
    let (spec, dual, plan) = perturbed(4);
    let f = BandlimitedSignal::zero(2.0, 1.0 / 256.0).unwrap();
    let r = reconstruct::reconstruction_error(&f, &dual, &spec, &plan.params, plan.n, 1e-10, plan.error_bound).unwrap();
    assert!(r.degenerate && r.relative_error == 0.0 && r.pass);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["degenerate"], true);
}
