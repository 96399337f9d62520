use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pid::{PidGains, DEFAULT_TAU_D};
use super::region::{region_violations, violation, DRegion};
use crate::error::{invalid, Error, Result};
use crate::poly;
use crate::tf::RationalTF;

/// Relative slack each region bound must hold with for a cell to count as
/// admissible. Absorbs root-finding error near the boundary.
pub const MAP_MARGIN: f64 = 1e-8;

/// Closed-loop characteristic polynomial of the ideal PID `kp + ki/s + kd s`
/// around `N/D` under unity negative feedback. With `ki = 0` the controller
/// pole at the origin cancels and the PD polynomial is returned.
pub fn closed_loop_polynomial(plant: &RationalTF, gains: &PidGains) -> Vec<f64> {
    let (n, d) = (plant.num(), plant.den());
    if gains.ki == 0.0 {
        poly::add(d, &poly::mul(n, &[gains.kd, gains.kp]))
    } else {
        poly::add(&poly::mul(d, &[1.0, 0.0]), &poly::mul(n, &[gains.kd, gains.kp, gains.ki]))
    }
}

pub fn closed_loop_poles(plant: &RationalTF, gains: &PidGains) -> Vec<Complex64> {
    poly::roots(&closed_loop_polynomial(plant, gains))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainGrid {
    pub kp: (f64, f64),
    pub kd: (f64, f64),
    pub resolution: usize,
}

impl GainGrid {
    pub fn kp_values(&self) -> Vec<f64> {
        linspace(self.kp, self.resolution)
    }

    pub fn kd_values(&self) -> Vec<f64> {
        linspace(self.kd, self.resolution)
    }

    fn cell_size(&self) -> (f64, f64) {
        let r = (self.resolution - 1) as f64;
        ((self.kp.1 - self.kp.0) / r, (self.kd.1 - self.kd.0) / r)
    }
}

fn linspace((a, b): (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Point on the complex-root boundary: gains placing a root at `−σ + jω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrbPoint {
    pub omega: f64,
    pub kp: f64,
    pub kd: f64,
}

/// Real-root boundary `c_kp·kp + c_kd·kd = rhs`: gains with a root at `−σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrbLine {
    pub c_kp: f64,
    pub c_kd: f64,
    pub rhs: f64,
}

impl RrbLine {
    /// Signed distance of `(kp, kd)` from the line.
    pub fn distance(&self, kp: f64, kd: f64) -> f64 {
        (self.c_kp * kp + self.c_kd * kd - self.rhs) / self.c_kp.hypot(self.c_kd)
    }
}

/// Admissibility of a (kp, kd) grid at fixed `ki`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibleMap {
    pub grid: GainGrid,
    pub ki: f64,
    pub region: DRegion,
    /// Region violation flags per cell, `kp` index major; zero means
    /// admissible. Cells ruled out by the decay screen alone carry both decay bits.
    pub flags: Vec<u8>,
    /// Midpoints between admissible cells and inadmissible 4-neighbours.
    pub boundary: Vec<(f64, f64)>,
    /// Complex-root boundary of the decay bound, traced over ω.
    pub crb: Vec<CrbPoint>,
}

impl AdmissibleMap {
    pub fn n(&self) -> usize {
        self.grid.resolution
    }

    pub fn is_admissible(&self, i: usize, j: usize) -> bool {
        self.flags[i * self.n() + j] == 0
    }

    pub fn admissible_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f == 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.admissible_count() == 0
    }

    pub fn gains_at(&self, i: usize, j: usize) -> PidGains {
        let (dp, dd) = self.grid.cell_size();
        PidGains::new(self.grid.kp.0 + dp * i as f64, self.ki, self.grid.kd.0 + dd * j as f64)
    }

    fn neighbours(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize, i32, i32)> + '_ {
        let n = self.n() as i64;
        [(-1i32, 0i32), (1, 0), (0, -1), (0, 1)]
            .into_iter()
            .filter_map(move |(di, dj)| {
                let (a, b) = (i as i64 + di as i64, j as i64 + dj as i64);
                (a >= 0 && a < n && b >= 0 && b < n).then(|| (a as usize, b as usize, di, dj))
            })
    }

    /// Admissible cells with at least one inadmissible 4-neighbour.
    pub fn boundary_cells(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.is_admissible(i, j) && self.neighbours(i, j).any(|(a, b, _, _)| !self.is_admissible(a, b)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Boundary cells whose outside neighbour fails only through a complex
    /// pair crossing the decay bound.
    pub fn crb_cells(&self) -> Vec<(usize, usize)> {
        self.boundary_cells()
            .into_iter()
            .filter(|&(i, j)| {
                self.neighbours(i, j)
                    .any(|(a, b, _, _)| self.flags[a * self.n() + b] == violation::DECAY_COMPLEX)
            })
            .collect()
    }
}

/// Evaluates D-stability of the closed loop over the gain grid and traces the
/// decay-bound complex-root boundary.
pub fn admissible_gain_map(plant: &RationalTF, region: &DRegion, ki: f64, grid: &GainGrid) -> Result<AdmissibleMap> {
    region.validate()?;
    if grid.resolution < 16 {
        return invalid("grid resolution must be at least 16 per axis");
    }
    if !(grid.kp.1 > grid.kp.0 && grid.kd.1 > grid.kd.0) {
        return invalid("gain ranges must be increasing");
    }
    let kps = grid.kp_values();
    let kds = grid.kd_values();
    let n = grid.resolution;
    // Cheap screen: a cell whose polynomial shifted right by a hair less than
    // σ is not Hurwitz has a root beyond the decay bound, so roots are only
    // computed where the screen passes and next to such cells.
    let loose = region.sigma_min - 1e-6 * region.sigma_min.max(1.0);
    let mut screened = vec![false; n * n];
    for (i, &kp) in kps.iter().enumerate() {
        for (j, &kd) in kds.iter().enumerate() {
            let p = closed_loop_polynomial(plant, &PidGains::new(kp, ki, kd));
            screened[i * n + j] = poly::is_hurwitz(&poly::taylor_shift(&p, -loose));
        }
    }
    let near = |i: usize, j: usize| {
        let lo = |v: usize| v.saturating_sub(1);
        (lo(i)..=(i + 1).min(n - 1)).any(|a| (lo(j)..=(j + 1).min(n - 1)).any(|b| screened[a * n + b]))
    };
    let mut flags = vec![violation::DECAY_REAL | violation::DECAY_COMPLEX; n * n];
    for (i, &kp) in kps.iter().enumerate() {
        for (j, &kd) in kds.iter().enumerate() {
            if near(i, j) {
                let poles = closed_loop_poles(plant, &PidGains::new(kp, ki, kd));
                flags[i * n + j] = region_violations(&poles, region, MAP_MARGIN);
            }
        }
    }
    let mut map = AdmissibleMap {
        grid: *grid,
        ki,
        region: *region,
        flags,
        boundary: Vec::new(),
        crb: Vec::new(),
    };
    let mut boundary = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !map.is_admissible(i, j) {
                continue;
            }
            for (a, b, _, _) in map.neighbours(i, j) {
                if !map.is_admissible(a, b) {
                    boundary.push(((kps[i] + kps[a]) / 2.0, (kds[j] + kds[b]) / 2.0));
                }
            }
        }
    }
    boundary.sort_by(|x, y| x.partial_cmp(y).unwrap());
    boundary.dedup();
    map.boundary = boundary;
    let omegas = log_space(1e-4 * region.sigma_min.max(1e-3), region.omega_max, 400);
    map.crb = crb_trace(plant, ki, region.sigma_min, &omegas);
    Ok(map)
}

fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Writes the closed-loop polynomial as `kd·a(s)·s + kp·a(s) = r(s)`.
fn split_polynomial(plant: &RationalTF, ki: f64, s: Complex64) -> (Complex64, Complex64) {
    let nv = poly::eval_complex(plant.num(), s);
    let dv = poly::eval_complex(plant.den(), s);
    if ki == 0.0 {
        (nv, -dv)
    } else {
        (nv * s, -(s * dv + nv * ki))
    }
}

/// Solves the real and imaginary parts of the characteristic equation at
/// `s = −σ + jω` for `(kp, kd)` at each ω. Frequencies where the two
/// equations are dependent are skipped.
pub fn crb_trace(plant: &RationalTF, ki: f64, sigma: f64, omegas: &[f64]) -> Vec<CrbPoint> {
    omegas
        .iter()
        .filter_map(|&w| {
            let s = Complex64::new(-sigma, w);
            let (a, r) = split_polynomial(plant, ki, s);
            let c_kd = a * s;
            let det = c_kd.re * a.im - a.re * c_kd.im;
            let scale = c_kd.norm() * a.norm();
            if !(det.abs() > 1e-12 * scale) {
                return None;
            }
            let kd = (r.re * a.im - a.re * r.im) / det;
            let kp = (c_kd.re * r.im - r.re * c_kd.im) / det;
            (kp.is_finite() && kd.is_finite()).then_some(CrbPoint { omega: w, kp, kd })
        })
        .collect()
}

/// Gains putting a real closed-loop root exactly at `−σ`.
pub fn rrb_line(plant: &RationalTF, ki: f64, sigma: f64) -> RrbLine {
    let s = Complex64::new(-sigma, 0.0);
    let (a, r) = split_polynomial(plant, ki, s);
    RrbLine { c_kp: a.re, c_kd: (a * s).re, rhs: r.re }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Smallest ‖(kp, kd)‖ on the admissible boundary, preferring the decay
    /// bound's complex-root edge, then one cell inward.
    #[default]
    MinNormOnBoundary,
}

pub fn select_gains(map: &AdmissibleMap, rule: SelectionRule) -> Result<PidGains> {
    select_gains_with_tau(map, rule, DEFAULT_TAU_D)
}

pub fn select_gains_with_tau(map: &AdmissibleMap, rule: SelectionRule, tau_d: f64) -> Result<PidGains> {
    let SelectionRule::MinNormOnBoundary = rule;
    if map.is_empty() {
        return Err(Error::NoAdmissibleGains { speed: None });
    }
    let mut candidates = map.crb_cells();
    if candidates.is_empty() {
        candidates = map.boundary_cells();
    }
    if candidates.is_empty() {
        let n = map.n();
        candidates = (0..n * n).map(|k| (k / n, k % n)).filter(|&(i, j)| map.is_admissible(i, j)).collect();
    }
    let norm = |&(i, j): &(usize, usize)| {
        let g = map.gains_at(i, j);
        g.kp.hypot(g.kd)
    };
    let best = candidates
        .iter()
        .copied()
        .min_by(|a, b| norm(a).partial_cmp(&norm(b)).unwrap().then(a.cmp(b)))
        .expect("non-empty candidates");

    // step one cell away from the inadmissible side when that stays admissible
    let (mut di, mut dj) = (0i32, 0i32);
    for (a, b, oi, oj) in map.neighbours(best.0, best.1) {
        if !map.is_admissible(a, b) {
            di -= oi;
            dj -= oj;
        }
    }
    let step = |v: usize, d: i32| -> Option<usize> {
        let t = v as i64 + d.signum() as i64;
        (t >= 0 && (t as usize) < map.n()).then_some(t as usize)
    };
    let inward = match (step(best.0, di), step(best.1, dj)) {
        (Some(i), Some(j)) if map.is_admissible(i, j) => (i, j),
        _ => best,
    };
    let mut g = map.gains_at(inward.0, inward.1);
    g.tau_d = tau_d;
    Ok(g)
}
