use crate::error::{invalid, Result};
use crate::poly;
use crate::tf::RationalTF;

/// Bilinear (Tustin) map of a proper transfer function. Returns `(b, a)` in
/// ascending powers of z⁻¹ with `a[0] = 1`.
pub fn bilinear(tf: &RationalTF, dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(dt > 0.0) {
        return invalid("sample time must be positive");
    }
    if !tf.is_proper() {
        return invalid("bilinear map needs a proper transfer function");
    }
    let n = tf.den_degree();
    let k = 2.0 / dt;
    // (1 - z⁻¹)^i (1 + z⁻¹)^(n-i), ascending powers
    let basis = |i: usize| -> Vec<f64> {
        let mut p = vec![1.0];
        for _ in 0..i {
            p = poly::mul(&p, &[1.0, -1.0]);
        }
        for _ in i..n {
            p = poly::mul(&p, &[1.0, 1.0]);
        }
        p
    };
    let map = |c: &[f64]| -> Vec<f64> {
        let deg = c.len() - 1;
        let mut out = vec![0.0; n + 1];
        for (idx, &coef) in c.iter().enumerate() {
            let power = deg - idx;
            let term = basis(power);
            let w = coef * k.powi(power as i32);
            for (o, t) in out.iter_mut().zip(term) {
                *o += w * t;
            }
        }
        out
    };
    let b = map(tf.num());
    let a = map(tf.den());
    let a0 = a[0];
    Ok((b.iter().map(|v| v / a0).collect(), a.iter().map(|v| v / a0).collect()))
}

/// Direct form I IIR filter. The state is the recent input and output
/// history, so it stays meaningful when the coefficients are swapped.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFilter {
    b: Vec<f64>,
    a: Vec<f64>,
    /// Past inputs, most recent first.
    xs: Vec<f64>,
    /// Past outputs, most recent first.
    ys: Vec<f64>,
}

impl DiscreteFilter {
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Self {
        assert_eq!(b.len(), a.len(), "numerator and denominator must have equal length");
        let order = a.len() - 1;
        Self { b, a, xs: vec![0.0; order], ys: vec![0.0; order] }
    }

    pub fn from_tf(tf: &RationalTF, dt: f64) -> Result<Self> {
        let (b, a) = bilinear(tf, dt)?;
        Ok(Self::new(b, a))
    }

    /// Swaps coefficients of the same order, keeping the signal history.
    pub fn retune(&mut self, b: Vec<f64>, a: Vec<f64>) {
        assert_eq!(a.len(), self.a.len(), "filter order must not change");
        assert_eq!(b.len(), a.len());
        self.b = b;
        self.a = a;
    }

    pub fn feedthrough(&self) -> f64 {
        self.b[0]
    }

    /// Output contribution already fixed by past inputs and outputs.
    pub fn pending(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.xs.len() {
            acc += self.b[i + 1] * self.xs[i] - self.a[i + 1] * self.ys[i];
        }
        acc
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.pending();
        if !self.xs.is_empty() {
            self.xs.rotate_right(1);
            self.ys.rotate_right(1);
            self.xs[0] = x;
            self.ys[0] = y;
        }
        y
    }

    /// Past inputs then past outputs, most recent first.
    pub fn state(&self) -> Vec<f64> {
        self.xs.iter().chain(&self.ys).copied().collect()
    }

    pub fn coefficients(&self) -> (&[f64], &[f64]) {
        (&self.b, &self.a)
    }

    /// Frequency response at `ω` rad/s for sample time `dt`.
    pub fn freq(&self, omega: f64, dt: f64) -> num_complex::Complex64 {
        let zinv = num_complex::Complex64::from_polar(1.0, -omega * dt);
        let ev = |c: &[f64]| c.iter().rev().fold(num_complex::Complex64::new(0.0, 0.0), |acc, &v| acc * zinv + v);
        ev(&self.b) / ev(&self.a)
    }
}
