use serde::{Deserialize, Serialize};

use super::fit::{poly_deriv, PathSpline};
use crate::error::{invalid, Error, Result};
use crate::Direction;

/// Speeds `‖(x', y')‖` at or below this are treated as stationary points.
pub const EPS_SPEED: f64 = 1e-9;

/// `order`-th λ-derivative of (x, y) on `segment` (0-based).
pub fn eval_path(spline: &PathSpline, segment: usize, lambda: f64, order: usize) -> Result<(f64, f64)> {
    if segment >= spline.m {
        return invalid(format!("segment {segment} out of range 0..{}", spline.m));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("λ = {lambda} outside [0, 1]"));
    }
    if order > spline.p {
        return invalid(format!("derivative order {order} exceeds p = {}", spline.p));
    }
    Ok((
        poly_deriv(&spline.coeffs_x[segment], lambda, order),
        poly_deriv(&spline.coeffs_y[segment], lambda, order),
    ))
}

fn derivs(spline: &PathSpline, segment: usize, lambda: f64) -> Result<[(f64, f64); 3]> {
    let d1 = eval_path(spline, segment, lambda, 1)?;
    let d2 = if spline.p >= 2 { eval_path(spline, segment, lambda, 2)? } else { (0.0, 0.0) };
    let d3 = if spline.p >= 3 { eval_path(spline, segment, lambda, 3)? } else { (0.0, 0.0) };
    let speed = d1.0.hypot(d1.1);
    if speed <= EPS_SPEED {
        return Err(Error::DegenerateParametrization { segment, lambda, speed });
    }
    Ok([d1, d2, d3])
}

/// Signed curvature, positive when turning counter-clockwise.
pub fn curvature(spline: &PathSpline, segment: usize, lambda: f64) -> Result<f64> {
    let [(x1, y1), (x2, y2), _] = derivs(spline, segment, lambda)?;
    Ok((x1 * y2 - y1 * x2) / (x1 * x1 + y1 * y1).powf(1.5))
}

/// Arc-length derivative of the signed curvature.
pub fn curvature_derivative(spline: &PathSpline, segment: usize, lambda: f64) -> Result<f64> {
    let [(x1, y1), (x2, y2), (x3, y3)] = derivs(spline, segment, lambda)?;
    let v2 = x1 * x1 + y1 * y1;
    let v = v2.sqrt();
    let cross = x1 * y2 - y1 * x2;
    let dk_dlam = (x1 * y3 - y1 * x3) / (v2 * v) - 3.0 * cross * (x1 * x2 + y1 * y2) / (v2 * v2 * v);
    Ok(dk_dlam / v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub s: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub samples: Vec<CurvatureSample>,
    pub total_length: f64,
    pub direction: Direction,
}

impl CurvatureProfile {
    pub fn new(samples: Vec<CurvatureSample>, direction: Direction) -> Result<Self> {
        if samples.is_empty() {
            return invalid("curvature profile needs samples");
        }
        if samples[0].s != 0.0 {
            return invalid("curvature profile must start at s = 0");
        }
        if samples.iter().any(|c| !c.kappa.is_finite() || !c.s.is_finite()) {
            return invalid("non-finite curvature sample");
        }
        if samples.len() > 1 && samples.windows(2).any(|w| w[1].s <= w[0].s) {
            return invalid("arc length must be strictly increasing");
        }
        let total_length = samples[samples.len() - 1].s;
        Ok(Self { samples, total_length, direction })
    }

    /// Straight path of the given length.
    pub fn straight(length: f64, n: usize, direction: Direction) -> Result<Self> {
        let n = n.max(2);
        let samples = (0..n)
            .map(|i| CurvatureSample { s: length * i as f64 / (n - 1) as f64, kappa: 0.0 })
            .collect();
        Self::new(samples, direction)
    }

    /// Linear interpolation in s, clamped to the end values.
    pub fn kappa_at(&self, s: f64) -> f64 {
        let v = &self.samples;
        if s <= v[0].s {
            return v[0].kappa;
        }
        if s >= self.total_length {
            return v[v.len() - 1].kappa;
        }
        let i = v.partition_point(|c| c.s <= s) - 1;
        let (a, b) = (v[i], v[i + 1]);
        a.kappa + (b.kappa - a.kappa) * (s - a.s) / (b.s - a.s)
    }

    pub fn max_abs_kappa(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, c| m.max(c.kappa.abs()))
    }
}

// 5-point Gauss–Legendre on [0, 1]
const GL_NODES: [f64; 5] = [
    0.046_910_077_030_668_0,
    0.230_765_344_947_158_5,
    0.5,
    0.769_234_655_052_841_5,
    0.953_089_922_969_332_0,
];
const GL_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_5,
    0.239_314_335_249_683_2,
    0.284_444_444_444_444_4,
    0.239_314_335_249_683_2,
    0.118_463_442_528_094_5,
];

fn arc_length(spline: &PathSpline, segment: usize, a: f64, b: f64) -> f64 {
    let h = b - a;
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(t, w)| {
            let l = a + h * t;
            let dx = poly_deriv(&spline.coeffs_x[segment], l, 1);
            let dy = poly_deriv(&spline.coeffs_y[segment], l, 1);
            w * dx.hypot(dy)
        })
        .sum::<f64>()
        * h
}

/// Segment index and λ for global parameter `u ∈ [0, m]`.
fn locate(m: usize, u: f64) -> (usize, f64) {
    let seg = (u.floor() as usize).min(m - 1);
    (seg, (u - seg as f64).clamp(0.0, 1.0))
}

/// Samples curvature at `n_samples` points evenly spaced in the global
/// parameter (one unit per segment) with arc length from Gauss–Legendre
/// quadrature between neighbouring samples.
pub fn curvature_profile(spline: &PathSpline, n_samples: usize) -> Result<CurvatureProfile> {
    if n_samples < 2 {
        return invalid("need at least 2 curvature samples");
    }
    let m = spline.m;
    let us: Vec<f64> = (0..n_samples)
        .map(|k| m as f64 * k as f64 / (n_samples - 1) as f64)
        .collect();
    let mut samples = Vec::with_capacity(n_samples);
    let mut s = 0.0;
    for (k, &u) in us.iter().enumerate() {
        if k > 0 {
            let u0 = us[k - 1];
            let mut a = u0;
            while a < u {
                let seg = (a.floor() as usize).min(m - 1);
                let b = u.min(seg as f64 + 1.0);
                s += arc_length(spline, seg, a - seg as f64, b - seg as f64);
                a = b;
            }
        }
        let (seg, lam) = locate(m, u);
        samples.push(CurvatureSample { s, kappa: curvature(spline, seg, lam)? });
    }
    CurvatureProfile::new(samples, Direction::Forward)
}

/// Profile seen when driving the path from its end back to its start.
pub fn reverse_profile(prof: &CurvatureProfile) -> Result<CurvatureProfile> {
    if prof.direction != Direction::Forward {
        return invalid("profile is already backward");
    }
    let total = prof.total_length;
    let samples = prof
        .samples
        .iter()
        .rev()
        .map(|c| CurvatureSample { s: total - c.s, kappa: -c.kappa })
        .collect::<Vec<_>>();
    let mut out = CurvatureProfile::new(samples, Direction::Backward)?;
    out.total_length = total;
    if let Some(last) = out.samples.last_mut() {
        last.s = total;
    }
    Ok(out)
}

impl CurvatureProfile {
    /// Inverse of [`reverse_profile`].
    pub fn reversed_to_forward(&self) -> Result<CurvatureProfile> {
        if self.direction != Direction::Backward {
            return invalid("profile is already forward");
        }
        let total = self.total_length;
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|c| CurvatureSample { s: total - c.s, kappa: -c.kappa })
            .collect();
        CurvatureProfile::new(samples, Direction::Forward)
    }
}
