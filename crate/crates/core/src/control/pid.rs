use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Derivative filter time constant used unless configured otherwise, s.
pub const DEFAULT_TAU_D: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub tau_d: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd, tau_d: DEFAULT_TAU_D }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.kp, self.ki, self.kd].iter().all(|g| g.is_finite()) {
            return invalid("PID gains must be finite");
        }
        if !(self.tau_d > 0.0) {
            return invalid("derivative filter time constant must be positive");
        }
        Ok(())
    }

    /// `kp + ki/s + kd s`
    pub fn eval_ideal(&self, s: Complex64) -> Complex64 {
        self.kp + self.ki / s + self.kd * s
    }

    /// `kp + ki/s + kd s/(τ s + 1)`
    pub fn eval_filtered(&self, s: Complex64) -> Complex64 {
        self.kp + self.ki / s + self.kd * s / (self.tau_d * s + 1.0)
    }

    /// Componentwise `(1 − w) a + w b`.
    pub fn lerp(a: &PidGains, b: &PidGains, w: f64) -> PidGains {
        let f = |x: f64, y: f64| x + (y - x) * w;
        PidGains {
            kp: f(a.kp, b.kp),
            ki: f(a.ki, b.ki),
            kd: f(a.kd, b.kd),
            tau_d: f(a.tau_d, b.tau_d),
        }
    }
}

/// Sampled PID acting on the error signal with reference zero:
/// rectangular integral and a Tustin-discretised filtered derivative.
#[derive(Debug, Clone, Default)]
pub struct DiscretePid {
    integral: f64,
    derivative: f64,
    last: Option<f64>,
}

impl DiscretePid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&mut self, y: f64, g: &PidGains, dt: f64) -> f64 {
        let prev = self.last.unwrap_or(y);
        let den = 2.0 * g.tau_d + dt;
        self.derivative = (2.0 * g.tau_d - dt) / den * self.derivative + 2.0 / den * (y - prev);
        self.last = Some(y);
        let u = -(g.kp * y + g.ki * self.integral + g.kd * self.derivative);
        self.integral += dt * y;
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filtered_derivative_tracks_a_ramp() {
        let g = PidGains { kp: 0.0, ki: 0.0, kd: 1.0, tau_d: 0.01 };
        let mut pid = DiscretePid::new();
        let dt = 1e-3;
        let mut u = 0.0;
        for k in 0..2000 {
            u = pid.step(2.0 * k as f64 * dt, &g, dt);
        }
        assert!((u + 2.0).abs() < 1e-9);
    }

    #[test]
    fn integral_accumulates() {
        let g = PidGains { kp: 0.0, ki: 1.0, kd: 0.0, tau_d: 0.01 };
        let mut pid = DiscretePid::new();
        let mut u = 0.0;
        for _ in 0..=1000 {
            u = pid.step(1.0, &g, 1e-3);
        }
        assert!((u + 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_componentwise() {
        let a = PidGains::new(1.0, 2.0, 0.0);
        let b = PidGains::new(3.0, 6.0, 1.0);
        let m = PidGains::lerp(&a, &b, 0.25);
        assert_eq!((m.kp, m.ki, m.kd), (1.5, 3.0, 0.25));
    }
}
