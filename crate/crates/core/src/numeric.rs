//! Small numerical helpers shared by the summation and quadrature code.

use num_complex::Complex64;

/// Neumaier-compensated accumulator for real sums.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated accumulator for complex sums.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedComplex {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum of a slice, in slice order.
pub fn sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().value()
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let mut acc = CompensatedSum::new();
            acc.add(0.5 * values[0]);
            for v in &values[1..n - 1] {
                acc.add(*v);
            }
            acc.add(0.5 * values[n - 1]);
            acc.value() * step
        }
    }
}

/// Trapezoid rule for a complex integrand on a uniform grid.
pub fn trapezoid_complex(values: &[Complex64], step: f64) -> Complex64 {
    match values.len() {
        0 | 1 => Complex64::new(0.0, 0.0),
        n => {
            let mut acc = CompensatedComplex::new();
            acc.add(values[0] * 0.5);
            for v in &values[1..n - 1] {
                acc.add(*v);
            }
            acc.add(values[n - 1] * 0.5);
            acc.value() * step
        }
    }
}

/// Relative difference `|x - y| / max(|x|, |y|, tiny)`.
pub fn rel_diff(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    (x - y).abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-12).abs() < 1e-20);
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let step = 0.25;
        let values: Vec<f64> = (0..=8).map(|i| 3.0 * (i as f64) * step + 1.0).collect();
        // integral of 3x + 1 over [0, 2]
        assert!((trapezoid(&values, step) - 8.0).abs() < 1e-14);
    }
}
