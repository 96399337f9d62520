use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Pole placement region: decay at least `sigma_min`, damping at least
/// `zeta_min`, magnitude at most `omega_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DRegion {
    pub sigma_min: f64,
    pub zeta_min: f64,
    pub omega_max: f64,
}

impl DRegion {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_min >= 0.0 && self.sigma_min.is_finite()) {
            return invalid("σ_min must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.zeta_min) {
            return invalid("ζ_min must lie in [0, 1)");
        }
        if !(self.omega_max > self.sigma_min) {
            return invalid(format!(
                "ω_max = {} must exceed σ_min = {}",
                self.omega_max, self.sigma_min
            ));
        }
        Ok(())
    }
}

/// Bit flags naming which region bound a pole set violates.
pub mod violation {
    pub const DECAY_REAL: u8 = 1;
    pub const DECAY_COMPLEX: u8 = 2;
    pub const DAMPING: u8 = 4;
    pub const BANDWIDTH: u8 = 8;
}

/// Violated bounds, each required to hold with relative slack `margin`.
pub fn region_violations(poles: &[Complex64], region: &DRegion, margin: f64) -> u8 {
    let cone = (1.0 - region.zeta_min * region.zeta_min).sqrt();
    let mut flags = 0;
    for s in poles {
        let mag = s.norm();
        let tol = margin * mag.max(1.0);
        if mag == 0.0 {
            if region.sigma_min > 0.0 {
                flags |= violation::DECAY_REAL;
            }
            continue;
        }
        if s.re > -region.sigma_min - tol {
            let complex = s.im.abs() > 1e-9 * mag;
            flags |= if complex { violation::DECAY_COMPLEX } else { violation::DECAY_REAL };
        }
        if mag > region.omega_max * (1.0 - margin) {
            flags |= violation::BANDWIDTH;
        }
        if s.im.abs() > (cone - margin) * mag {
            flags |= violation::DAMPING;
        }
    }
    flags
}

/// True iff every pole lies in the region. A pole exactly at the origin only
/// passes when `sigma_min = 0`.
pub fn d_stable(poles: &[Complex64], region: &DRegion) -> bool {
    region_violations(poles, region, 0.0) == 0
}

/// How the decay bound depends on the scheduling speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayBound {
    /// Fixed decay rate, rad/s.
    Absolute(f64),
    /// Decay per metre travelled: `σ_min = rate · V`.
    PerMetre(f64),
}

/// Speed-dependent region used for the gain schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionPolicy {
    pub decay: DecayBound,
    pub zeta_min: f64,
    pub omega_max: f64,
}

impl Default for RegionPolicy {
    fn default() -> Self {
        Self {
            decay: DecayBound::PerMetre(0.395),
            zeta_min: 0.85,
            omega_max: 1e4,
        }
    }
}

impl RegionPolicy {
    pub fn at_speed(&self, v: f64) -> DRegion {
        let sigma_min = match self.decay {
            DecayBound::Absolute(s) => s,
            DecayBound::PerMetre(r) => r * v,
        };
        DRegion {
            sigma_min,
            zeta_min: self.zeta_min,
            omega_max: self.omega_max,
        }
    }

    pub fn validate(&self, v_max: f64) -> Result<()> {
        self.at_speed(v_max).validate()?;
        self.at_speed(0.0).validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn examples() {
        let r = DRegion { sigma_min: 0.5, zeta_min: 0.4, omega_max: 10.0 };
        assert!(d_stable(&[c(-1.0, 0.0), c(-2.0, 0.0)], &r));
        let r2 = DRegion { sigma_min: 0.1, zeta_min: 0.0, omega_max: 10.0 };
        assert!(!d_stable(&[c(0.0, 0.0)], &r2));
        let r3 = DRegion { sigma_min: 0.0, zeta_min: 0.7, omega_max: 100.0 };
        assert!(!d_stable(&[c(-1.0, 5.0), c(-1.0, -5.0)], &r3));
        let r4 = DRegion { sigma_min: 0.0, zeta_min: 0.0, omega_max: 100.0 };
        assert!(d_stable(&[c(0.0, 0.0)], &r4));
    }

    #[test]
    fn degenerate_region() {
        let r = DRegion { sigma_min: 5.0, zeta_min: 0.5, omega_max: 1.0 };
        assert!(r.validate().is_err());
        assert!(DRegion { sigma_min: 0.5, zeta_min: 1.0, omega_max: 10.0 }.validate().is_err());
    }

    #[test]
    fn flags_name_the_bound() {
        let r = DRegion { sigma_min: 1.0, zeta_min: 0.5, omega_max: 10.0 };
        assert_eq!(region_violations(&[c(-0.5, 0.0)], &r, 0.0), violation::DECAY_REAL);
        assert_eq!(
            region_violations(&[c(-0.5, 0.1), c(-0.5, -0.1)], &r, 0.0),
            violation::DECAY_COMPLEX
        );
        assert_eq!(region_violations(&[c(-20.0, 0.0)], &r, 0.0), violation::BANDWIDTH);
    }

    #[test]
    fn speed_proportional_decay() {
        let p = RegionPolicy::default();
        assert!((p.at_speed(1.0).sigma_min - 0.395).abs() < 1e-15);
        assert!((p.at_speed(0.1).sigma_min - 0.0395).abs() < 1e-15);
    }
}
