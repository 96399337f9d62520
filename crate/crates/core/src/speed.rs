//! Curvature- and acceleration-limited speed schedule with preview distance.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::path::CurvatureProfile;
use crate::Direction;

/// Largest arc-length spacing of speed samples, m.
pub const SAMPLE_SPACING: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedLimits {
    /// m/s²
    pub a_lat_max: f64,
    /// m/s²
    pub a_long_max: f64,
    /// m/s
    pub v_max: f64,
    /// m/s, also the model-scheduling floor
    pub v_min: f64,
    /// Preview time constant `K` in `l_s = K V`, s.
    pub preview_gain: f64,
}

impl Default for SpeedLimits {
    fn default() -> Self {
        Self {
            a_lat_max: 0.4905,
            a_long_max: 0.4905,
            v_max: 1.0,
            v_min: 0.1,
            preview_gain: 0.5,
        }
    }
}

impl SpeedLimits {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a_lat_max, self.a_long_max, self.v_max, self.v_min, self.preview_gain];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid("speed limits must be finite and positive");
        }
        if self.v_min >= self.v_max {
            return invalid("v_min must be below v_max");
        }
        Ok(())
    }
}

pub fn preview_distance(v: f64, k: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return invalid(format!("negative speed {v}"));
    }
    Ok(k * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedSample {
    pub s: f64,
    pub v: f64,
    pub ls: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    pub samples: Vec<SpeedSample>,
    pub direction: Direction,
    /// The path is too short to reach `v_min` anywhere.
    pub below_min_speed: bool,
    /// The lateral limit forces the speed below `v_min` somewhere inside the path.
    pub curvature_below_min: bool,
}

/// Builds the profile on a uniform grid no coarser than 0.01 m.
pub fn build_profile(curv: &CurvatureProfile, limits: &SpeedLimits) -> Result<SpeedProfile> {
    build_profile_with_spacing(curv, limits, SAMPLE_SPACING)
}

/// Caps V² by the lateral limit and `v_max`, then sweeps forward and backward
/// so that `|dV²/ds| ≤ 2 a_long_max`, starting and ending at rest.
///
/// The lateral cap wins over `v_min`; where it pushes the speed below `v_min`
/// the profile is flagged rather than violating the lateral limit.
pub fn build_profile_with_spacing(curv: &CurvatureProfile, limits: &SpeedLimits, ds: f64) -> Result<SpeedProfile> {
    limits.validate()?;
    if !(ds > 0.0) {
        return invalid("sample spacing must be positive");
    }
    let len = curv.total_length;
    if len == 0.0 {
        let rest = SpeedSample { s: 0.0, v: 0.0, ls: 0.0 };
        return Ok(SpeedProfile {
            samples: vec![rest, rest],
            direction: curv.direction,
            below_min_speed: true,
            curvature_below_min: false,
        });
    }
    // equal intervals no wider than `ds`, so the grid mirrors onto itself
    let n = ((len / ds).ceil() as usize).max(1);
    let s: Vec<f64> = (0..=n).map(|i| if i == n { len } else { len * i as f64 / n as f64 }).collect();
    let vmax2 = limits.v_max * limits.v_max;
    let cap: Vec<f64> = s
        .iter()
        .map(|&si| {
            let k = curv.kappa_at(si).abs();
            if k > 0.0 { vmax2.min(limits.a_lat_max / k) } else { vmax2 }
        })
        .collect();
    let curvature_below_min = cap[1..cap.len() - 1].iter().any(|&c| c < limits.v_min * limits.v_min);

    let mut v2 = cap;
    let last = v2.len() - 1;
    v2[0] = 0.0;
    for i in 1..=last {
        v2[i] = v2[i].min(v2[i - 1] + 2.0 * limits.a_long_max * (s[i] - s[i - 1]));
    }
    v2[last] = 0.0;
    for i in (0..last).rev() {
        v2[i] = v2[i].min(v2[i + 1] + 2.0 * limits.a_long_max * (s[i + 1] - s[i]));
    }
    let samples: Vec<SpeedSample> = s
        .iter()
        .zip(&v2)
        .map(|(&s, &v2)| {
            let v = v2.sqrt();
            SpeedSample { s, v, ls: limits.preview_gain * v }
        })
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, p| m.max(p.v));
    Ok(SpeedProfile {
        samples,
        direction: curv.direction,
        below_min_speed: peak < limits.v_min,
        curvature_below_min,
    })
}

impl SpeedProfile {
    /// Wraps externally produced samples; s must be non-decreasing and V ≥ 0.
    pub fn from_samples(samples: Vec<SpeedSample>, direction: Direction, v_min: f64) -> Result<Self> {
        if samples.len() < 2 {
            return invalid("speed profile needs at least two samples");
        }
        if samples.windows(2).any(|w| w[1].s < w[0].s) {
            return invalid("speed samples must be ordered in s");
        }
        if samples.iter().any(|p| !(p.v >= 0.0 && p.v.is_finite() && p.s.is_finite())) {
            return invalid("speed samples must be finite with V ≥ 0");
        }
        let peak = samples.iter().fold(0.0f64, |m, p| m.max(p.v));
        Ok(Self {
            samples,
            direction,
            below_min_speed: peak < v_min,
            curvature_below_min: false,
        })
    }

    pub fn length(&self) -> f64 {
        self.samples[self.samples.len() - 1].s
    }

    /// Time stamps assuming constant acceleration between samples.
    pub fn timing(&self) -> Result<Timing> {
        let mut t = vec![0.0];
        for w in self.samples.windows(2) {
            let ds = w[1].s - w[0].s;
            let vs = w[0].v + w[1].v;
            let dt = if ds == 0.0 {
                0.0
            } else if vs > 0.0 {
                2.0 * ds / vs
            } else {
                return invalid(format!("profile stalls at s = {}", w[0].s));
            };
            t.push(t[t.len() - 1] + dt);
        }
        Ok(Timing { t, samples: self.samples.clone() })
    }
}

/// Time parametrisation of a [`SpeedProfile`].
#[derive(Debug, Clone)]
pub struct Timing {
    t: Vec<f64>,
    samples: Vec<SpeedSample>,
}

impl Timing {
    pub fn duration(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Arc length and speed at time `t`, exact under piecewise constant
    /// acceleration. Clamped to the ends.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let n = self.t.len();
        if t <= 0.0 {
            return (self.samples[0].s, self.samples[0].v);
        }
        if t >= self.t[n - 1] {
            let p = self.samples[n - 1];
            return (p.s, p.v);
        }
        let i = (self.t.partition_point(|&ti| ti <= t) - 1).min(n - 2);
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        let ds = b.s - a.s;
        if ds == 0.0 {
            return (a.s, a.v);
        }
        let tau = (t - self.t[i]).min(self.t[i + 1] - self.t[i]);
        let acc = (b.v * b.v - a.v * a.v) / (2.0 * ds);
        let s = (a.s + a.v * tau + 0.5 * acc * tau * tau).min(b.s);
        let v = (a.v + acc * tau).max(0.0);
        (s, v)
    }
}
