//! Lower bounds on how close an equal-norm (wavelet-structured) system can
//! get to perfect reconstruction against a Riesz basis whose dual has
//! unequal norms.

use serde::Serialize;

use crate::error::{Error, Result};

/// Lower frame bound of a Riesz basis plus a finite list of dual-basis norms.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszDualData {
    pub a_lower: f64,
    pub dual_norms: Vec<((i64, i64), f64)>,
}

impl RieszDualData {
    pub fn new(a_lower: f64, dual_norms: Vec<((i64, i64), f64)>) -> Result<Self> {
        if !(a_lower > 0.0) {
            return Err(Error::InvalidParams(format!("lower frame bound must be > 0, got {a_lower}")));
        }
        if dual_norms.iter().any(|(_, n)| !(*n > 0.0)) {
            return Err(Error::InvalidParams("dual norms must be > 0".into()));
        }
        Ok(Self { a_lower, dual_norms })
    }

    /// Largest gap `max |‖g_j‖ − ‖g_l‖|` between two dual norms.
    pub fn delta(&self) -> f64 {
        let norms = self.dual_norms.iter().map(|(_, n)| *n);
        let hi = norms.clone().fold(f64::NEG_INFINITY, f64::max);
        let lo = norms.fold(f64::INFINITY, f64::min);
        if hi.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }
}

/// `A·dist²`: the squared worst-case deviation forced by a single dual
/// element sitting at distance `dist` from its replacement.
pub fn deviation_floor(a_lower: f64, dist: f64) -> f64 {
    a_lower * dist * dist
}

/// `A·δ²/4` with `δ` the largest gap between dual norms.
pub fn equal_norm_floor(data: &RieszDualData) -> f64 {
    let d = data.delta();
    data.a_lower * d * d / 4.0
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParams(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(())
}

/// Riesz data for `θ = ψ + η D₂ψ` over an orthonormal wavelet basis:
/// `A = (1 − η)²`, `‖ω_{0,1}‖ = 1`, `‖ω_{0,0}‖ = (1 − η²)^{-1/2}`.
pub fn daubechies_example_norms(eta: f64) -> Result<RieszDualData> {
    check_eta(eta)?;
    RieszDualData::new(
        (1.0 - eta).powi(2),
        vec![((0, 0), 1.0 / (1.0 - eta * eta).sqrt()), ((0, 1), 1.0)],
    )
}

/// `((1 − η)²/4)(1/√(1 − η²) − 1)²`.
pub fn nogo_floor(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let gap = 1.0 / (1.0 - eta * eta).sqrt() - 1.0;
    Ok((1.0 - eta).powi(2) / 4.0 * gap * gap)
}

/// One row of the `nogo` command output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NogoRow {
    pub eta: f64,
    #[serde(rename = "A")]
    pub a_lower: f64,
    pub delta: f64,
    pub floor: f64,
    pub sqrt_floor: f64,
}

pub fn nogo_row(eta: f64) -> Result<NogoRow> {
    let data = daubechies_example_norms(eta)?;
    let floor = nogo_floor(eta)?;
    Ok(NogoRow { eta, a_lower: data.a_lower, delta: data.delta(), floor, sqrt_floor: floor.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_examples() {
        assert_eq!(deviation_floor(1.0, 0.0), 0.0);
        assert!((deviation_floor(0.25, 0.2) - 0.01).abs() < 1e-17);
        assert!((deviation_floor(0.3, 0.4) * 4.0 - deviation_floor(0.3, 0.8)).abs() < 1e-15);
    }

    #[test]
    fn equal_norms_have_no_floor() {
        let d = RieszDualData::new(0.5, vec![((0, 0), 2.0), ((1, 3), 2.0)]).unwrap();
        assert_eq!(equal_norm_floor(&d), 0.0);
    }

    #[test]
    fn half_gap_matches_deviation() {
        let d = daubechies_example_norms(0.4).unwrap();
        assert!((equal_norm_floor(&d) - deviation_floor(d.a_lower, d.delta() / 2.0)).abs() < 1e-18);
    }

    #[test]
    fn example_norms() {
        let d = daubechies_example_norms(0.75).unwrap();
        assert_eq!(d.a_lower, 0.0625);
        assert!((d.dual_norms[0].1 - 1.511858).abs() < 1e-6);
        let d = daubechies_example_norms(1e-9).unwrap();
        assert!((d.a_lower - 1.0).abs() < 1e-8 && (d.dual_norms[0].1 - 1.0).abs() < 1e-12);
        assert!(daubechies_example_norms(1.5).is_err());
        assert!(nogo_floor(0.0).is_err());
    }

    #[test]
    fn floor_vanishes_near_zero() {
        assert!(nogo_floor(1e-6).unwrap() < 1e-20);
    }
}
