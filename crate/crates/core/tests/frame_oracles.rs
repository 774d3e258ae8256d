//! Lattice sums and generator values against brute-force sums written out here.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use dualframe::approx_dual;
use dualframe::frame::{self, AnnulusGrid};
use dualframe::generators;
use dualframe::{Error, FrameParams};
use num_complex::Complex64;

fn dyadic() -> FrameParams {
    FrameParams::new(2.0, 1.0).unwrap()
}

/// `Σ_k |N̂_m(γ+k)|²` by direct summation; the far terms share the factor
/// `sin^{2m}(πγ)` and their sum is closed by a midpoint integral.
fn g_brute(m: i32, gamma: f64) -> f64 {
    let term = |x: f64| {
        if x == 0.0 {
            1.0
        } else {
            ((PI * x).sin() / (PI * x)).powi(2 * m)
        }
    };
    let gamma = gamma - gamma.round();
    let n = 4000;
    let s: f64 = (-n..=n).map(|k| term(gamma + k as f64)).sum();
    let edge = n as f64 + 0.5;
    let far = ((edge + gamma).powi(1 - 2 * m) + (edge - gamma).powi(1 - 2 * m)) / (2 * m - 1) as f64;
    s + (PI * gamma).sin().powi(2 * m) * PI.powi(-2 * m) * far
}

/// Battle–Lemarié magnitude from the closed form, using the brute-force periodisation.
fn bl_abs(m: i32, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let amp = (g_brute(m, gamma / 2.0 + 0.5) / (g_brute(m, gamma) * g_brute(m, gamma / 2.0))).sqrt();
    let s = (PI * gamma / 2.0).sin();
    amp * (2.0 * s * s / (PI * gamma)).abs().powi(m)
}

#[test]
fn periodization_matches_series() {
    for m in 1..=4 {
        for i in 0..64 {
            let g = -1.0 + i as f64 / 32.0 + 0.003;
            assert_relative_eq!(generators::periodization_g(m as u32, g), g_brute(m, g), max_relative = 1e-9);
            assert_relative_eq!(
                generators::periodization_g(m as u32, g),
                generators::periodization_g_series(m as u32, g, 2000),
                max_relative = 1e-9
            );
        }
    }
}

#[test]
fn battle_lemarie_magnitude_matches_closed_form() {
    for m in [2u32, 3] {
        let bl = generators::battle_lemarie(m);
        for i in 1..200 {
            let g = i as f64 * 0.07 - 7.0;
            assert_relative_eq!(bl.abs(g).unwrap(), bl_abs(m as i32, g), max_relative = 1e-8, epsilon = 1e-14);
        }
    }
}

#[test]
fn battle_lemarie_calderon_brute_force() {
    let p = dyadic();
    for m in [2, 3] {
        let bl = generators::battle_lemarie(m as u32);
        for g in [1.0, 1.13, 1.5, 1.77, -1.31, 1.999] {
            let brute: f64 = (-50..=50).map(|j| bl_abs(m, 2f64.powi(j) * g).powi(2)).sum();
            let lib = frame::calderon_sum(&bl, &p, g, 1e-12).unwrap();
            assert_relative_eq!(lib, brute, max_relative = 1e-7);
            assert_relative_eq!(lib, 1.0, max_relative = 1e-7);
        }
    }
}

#[test]
fn battle_lemarie_cross_sum_brute_force() {
    let p = dyadic();
    let bl = generators::battle_lemarie(3);
    for g in [1.0, 1.37, -1.62] {
        let mut brute = 0.0;
        for j in -40..=30 {
            let x = 2f64.powi(j) * g;
            let v = bl_abs(3, x);
            if v < 1e-300 {
                continue;
            }
            let kmax = 20_000i64;
            let mut row: f64 = (-kmax..=kmax).map(|k| bl.abs(x + k as f64).unwrap()).sum();
            // |ψ̂(y)| ≤ t |y|^{-3}: both far tails
            let t = 1.0;
            row += 2.0 * t / (2.0 * (kmax as f64 - x.abs()).powi(2));
            brute += v * row;
        }
        let lib = frame::cross_term_sum(&bl, &p, g, 1e-8).unwrap();
        assert_relative_eq!(lib, brute, max_relative = 1e-6);
    }
}

#[test]
fn frame_bounds_of_orthonormal_bases() {
    let p = dyadic();
    let grid = AnnulusGrid::new(2.0, 32).unwrap();
    let sh = frame::frame_bound_estimates(&generators::shannon(), &p, &grid, 1e-9).unwrap();
    assert_relative_eq!(sh.lower, 1.0, max_relative = 1e-12);
    assert_relative_eq!(sh.upper, 1.0, max_relative = 1e-12);
    let bl = frame::frame_bound_estimates(&generators::battle_lemarie(3), &p, &grid, 1e-6).unwrap();
    assert!(bl.upper >= 1.0 - 1e-6 && bl.lower <= 1.0 + 1e-6);
}

#[test]
fn bspline_sums_have_no_tail_control() {
    let p = dyadic();
    let b = generators::bspline(2);
    assert!(matches!(frame::calderon_sum(&b, &p, 1.3, 1e-6), Err(Error::NoTailControl(_))));
    let grid = AnnulusGrid::new(2.0, 8).unwrap();
    assert!(matches!(frame::bessel_bound_estimate(&b, &p, &grid, 1e-3), Err(Error::NoTailControl(_))));
    // N̂_m(0) = 1, so the low scales diverge even after truncation
    assert!(frame::calderon_sum(&b.restricted(4.0), &p, 1.3, 1e-9).is_err());
}

#[test]
fn dual_reproduces_scaled_identity() {
    // Σ_j ψ̂_K(a^jγ) conj(ψ̃̂(a^jγ)) = b/N wherever the truncated sum is positive
    let p = dyadic();
    let spec = generators::from_name("perturbed:battle-lemarie:2:0.5").unwrap();
    let env = spec.envelope().unwrap();
    let plan = approx_dual::ApproxDualPlan::at(8, &p, 0.25, &env, false).unwrap();
    let dual = approx_dual::plan_dual(&spec, &plan, 512).unwrap();
    let trunc = spec.restricted(8.0);
    for g in [1.0, 1.21, 1.5, -1.9, 1.73] {
        let s: Complex64 = (-60..=10)
            .map(|j| {
                let x = 2f64.powi(j) * g;
                trunc.eval(x).unwrap() * dual.eval(x).unwrap().conj()
            })
            .sum();
        assert_relative_eq!(s.re, 1.0 / plan.n as f64, max_relative = 1e-9);
        assert!(s.im.abs() < 1e-12);
    }
}

#[test]
fn counterexample_never_feasible() {
    let p = dyadic();
    let spec = generators::from_name("counterexample:24").unwrap();
    for k in [1.0, 3.0, 16.0, 100.0] {
        let grid = approx_dual::feasibility_grid(&spec, &p, k, 256).unwrap();
        assert!(!approx_dual::check_feasibility(&spec, &p, k, &grid, 1e-6).unwrap().pass, "K = {k}");
    }
}

#[test]
fn envelope_fit_is_an_upper_bound() {
    let spec = generators::from_name("perturbed:battle-lemarie:2:0.5").unwrap();
    let env = spec.envelope().unwrap();
    for i in 0..20_000 {
        let g = i as f64 * 0.013;
        assert!(spec.abs(g).unwrap() <= env.bound(g) * (1.0 + 1e-12));
    }
}
