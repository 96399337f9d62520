//! Modified Akima piecewise cubic Hermite interpolation.

use crate::error::{invalid, Result};

#[derive(Debug, Clone)]
pub struct Makima {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl Makima {
    /// `x` must be strictly increasing; at least three knots.
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return invalid("knot arrays differ in length");
        }
        if n < 3 {
            return invalid("modified Akima needs at least 3 knots");
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return invalid("non-finite knot");
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("knot abscissae must be strictly increasing");
        }
        // secant slopes padded with two extrapolated values on each side
        let mut m = vec![0.0; n + 3];
        for i in 0..n - 1 {
            m[i + 2] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        m[1] = 2.0 * m[2] - m[3];
        m[0] = 2.0 * m[1] - m[2];
        m[n + 1] = 2.0 * m[n] - m[n - 1];
        m[n + 2] = 2.0 * m[n + 1] - m[n];

        let w = |a: usize| (m[a + 1] - m[a]).abs() + 0.5 * (m[a + 1] + m[a]).abs();
        let f1: Vec<f64> = (0..n).map(|i| w(i + 2)).collect();
        let f2: Vec<f64> = (0..n).map(|i| w(i)).collect();
        let fmax = (0..n).map(|i| f1[i] + f2[i]).fold(f64::NEG_INFINITY, f64::max);
        let slopes = (0..n)
            .map(|i| {
                let f12 = f1[i] + f2[i];
                if f12 > 1e-9 * fmax {
                    (f1[i] * m[i + 1] + f2[i] * m[i + 2]) / f12
                } else {
                    0.5 * (m[i + 3] + m[i])
                }
            })
            .collect();
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            slopes,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value at `t`; `None` outside the knot range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&t) {
            return None;
        }
        let i = self.x.partition_point(|&v| v <= t).clamp(1, self.x.len() - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        Some(
            (2.0 * u3 - 3.0 * u2 + 1.0) * y0
                + (u3 - 2.0 * u2 + u) * d0
                + (-2.0 * u3 + 3.0 * u2) * y1
                + (u3 - u2) * d1,
        )
    }
}
