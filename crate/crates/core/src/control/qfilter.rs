use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tf::RationalTF;

/// Unity-DC-gain second order low-pass `ω²/(s² + 2ξωs + ω²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QFilter {
    pub omega_n: f64,
    pub xi: f64,
}

pub fn make_q_filter(omega_n: f64, xi: f64) -> Result<QFilter> {
    if !(omega_n > 0.0 && omega_n.is_finite()) || !(xi > 0.0 && xi.is_finite()) {
        return invalid(format!("Q filter needs positive ω_n and ξ, got {omega_n}, {xi}"));
    }
    Ok(QFilter { omega_n, xi })
}

impl QFilter {
    pub fn num(&self) -> Vec<f64> {
        vec![self.omega_n * self.omega_n]
    }

    pub fn den(&self) -> Vec<f64> {
        vec![1.0, 2.0 * self.xi * self.omega_n, self.omega_n * self.omega_n]
    }

    pub fn tf(&self) -> RationalTF {
        RationalTF::new(&self.num(), &self.den()).expect("valid by construction")
    }
}

/// Gain of the nominal model relative to the plant.
pub const NOMINAL_SCALE: f64 = 1.01;

pub fn make_nominal(g: &RationalTF) -> RationalTF {
    g.scaled(NOMINAL_SCALE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn unity_dc_and_resonance() {
        let q = make_q_filter(100.0, 0.707).unwrap().tf();
        assert_eq!(q.freq(0.0).norm(), 1.0);
        assert!((q.freq(100.0).norm() - 1.0 / 1.414).abs() < 1e-12);
        let hi = q.freq(1e4).norm() / q.freq(1e5).norm();
        assert!((hi - 100.0).abs() < 0.1);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(make_q_filter(0.0, 0.7).is_err());
        assert!(make_q_filter(10.0, -0.7).is_err());
    }

    #[test]
    fn nominal_scales_numerator() {
        let g = RationalTF::new(&[4.0], &[1.0, 1.0]).unwrap();
        assert!((g.eval(Complex64::new(1.0, 0.0)).re - 2.0).abs() < 1e-15);
        let gn = make_nominal(&g);
        assert!((gn.eval(Complex64::new(1.0, 0.0)).re - 2.02).abs() < 1e-14);
        assert_eq!(gn.relative_degree(), g.relative_degree());
    }
}
