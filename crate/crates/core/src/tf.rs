use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

/// Continuous-time SISO transfer function with a monic denominator.
///
/// Coefficients are stored in descending powers of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTF {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RationalTF {
    /// Normalizes so the denominator is monic. Leading exact zeros are dropped.
    pub fn new(num: &[f64], den: &[f64]) -> Result<Self> {
        let den = poly::trim_leading(den, 0.0);
        let lead = den[0];
        if lead == 0.0 || !lead.is_finite() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let mut num = poly::trim_leading(num, 0.0);
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        for c in &mut num {
            *c /= lead;
        }
        let den = den.iter().map(|c| c / lead).collect();
        Ok(Self { num, den })
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn num_degree(&self) -> usize {
        poly::degree(&self.num)
    }

    pub fn den_degree(&self) -> usize {
        poly::degree(&self.den)
    }

    pub fn relative_degree(&self) -> isize {
        self.den_degree() as isize - self.num_degree() as isize
    }

    pub fn is_proper(&self) -> bool {
        self.relative_degree() >= 0
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval_complex(&self.num, s) / poly::eval_complex(&self.den, s)
    }

    pub fn freq(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            num: poly::scale(&self.num, k),
            den: self.den.clone(),
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly::roots(&self.den)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        poly::roots(&self.num)
    }
}
