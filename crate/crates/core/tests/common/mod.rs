#![allow(dead_code)]

use std::sync::OnceLock;

use maneuver_core::control::{
    build_schedule_with_maps, AdmissibleMap, DesignSettings, DobSettings, GainSchedule, PidGains, NOMINAL_SCALE,
};
use maneuver_core::path::{
    build_constraint_matrix, curvature, curvature_derivative, CourseGeometry, CurvatureProfile, PathSpline, WaypointSet,
};
use maneuver_core::pipeline::{initial_pose, plan_course, speed_profiles, FitSettings, Plan};
use maneuver_core::sim::{ControllerKind, Scenario};
use maneuver_core::speed::{SpeedLimits, SpeedProfile};
use maneuver_core::vehicle::{assemble_model, VehicleParams};
use maneuver_core::Direction;
use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use num_complex::Complex64;
use rand::Rng;

/// Default course planned once per test binary.
pub fn default_plan() -> &'static Plan {
    static PLAN: OnceLock<Plan> = OnceLock::new();
    PLAN.get_or_init(|| plan_course(&CourseGeometry::default(), &FitSettings::default()).unwrap())
}

pub fn default_speeds() -> &'static (SpeedProfile, SpeedProfile) {
    static SP: OnceLock<(SpeedProfile, SpeedProfile)> = OnceLock::new();
    SP.get_or_init(|| speed_profiles(default_plan(), &SpeedLimits::default()).unwrap())
}

/// Penalised least squares `min ‖ΦΘ − X‖² + w‖ΓΘ‖²` solved by column-pivoted
/// Householder QR on the stacked system, heavy rows first and columns
/// equilibrated. Returns (Θx, Θy) stacked per segment.
pub fn penalty_fit(wps: &WaypointSet, lambdas: &[f64], p: usize, q: usize, w: f64) -> (Vec<f64>, Vec<f64>) {
    let segs = wps.segments();
    let m = segs.len();
    let n = wps.len();
    let cols = (p + 1) * m;
    let gamma = build_constraint_matrix(m, p, q);
    let nc = gamma.nrows();
    let mut phi = DMatrix::zeros(n, cols);
    for (i, r) in segs.iter().enumerate() {
        for row in r.clone() {
            for k in 0..=p {
                phi[(row, i * (p + 1) + k)] = lambdas[row].powi(k as i32);
            }
        }
    }
    let scale: Vec<f64> = (0..cols).map(|c| 1.0 / phi.column(c).norm()).collect();
    let sw = w.sqrt();
    let mut a = DMatrix::zeros(nc + n, cols);
    for c in 0..cols {
        for r in 0..nc {
            a[(r, c)] = sw * gamma[(r, c)] * scale[c];
        }
        for r in 0..n {
            a[(nc + r, c)] = phi[(r, c)] * scale[c];
        }
    }
    let qr = a.col_piv_qr();
    let solve = |col: usize| -> Vec<f64> {
        let mut b = DVector::zeros(nc + n);
        for i in 0..n {
            b[nc + i] = wps.points[i][col];
        }
        let qtb = qr.q().transpose() * b;
        let r = qr.r();
        let mut z = r.solve_upper_triangular(&qtb.rows(0, cols).into_owned()).unwrap();
        qr.p().inv_permute_rows(&mut z);
        z.iter().zip(&scale).map(|(v, s)| v * s).collect()
    };
    (solve(0), solve(1))
}

/// `m` segments of `per` noisy points along a wandering curve.
pub fn random_segmented<R: Rng>(rng: &mut R, m: usize, per: usize) -> WaypointSet {
    let n = m * per;
    let mut pts = Vec::with_capacity(n);
    let (mut x, mut y, mut h) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        h += rng.gen_range(-0.15..0.15);
        let step = rng.gen_range(0.05..0.3);
        x += step * h.cos();
        y += step * h.sin();
        pts.push([x + rng.gen_range(-0.01..0.01), y + rng.gen_range(-0.01..0.01)]);
    }
    let boundaries = (1..m).map(|i| i * per).collect();
    WaypointSet::new(pts).unwrap().with_boundaries(boundaries).unwrap()
}

/// Stacked coefficient vector of a fitted spline, matching the oracle layout.
pub fn stacked(coeffs: &[Vec<f64>]) -> Vec<f64> {
    coeffs.iter().flatten().copied().collect()
}

/// Weierstrass (Durand–Kerner) iteration on a descending-coefficient polynomial.
pub fn durand_kerner(p: &[f64]) -> Vec<Complex64> {
    let lead = p[0];
    let c: Vec<f64> = p.iter().map(|v| v / lead).collect();
    let n = c.len() - 1;
    let radius = 1.0 + c[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let eval = |s: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * s + v);
    for _ in 0..5000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Greedy nearest matching of two root sets; returns the worst relative gap.
pub fn root_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for r in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, s)| (j, (r - s).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d / r.norm().max(1.0));
    }
    worst
}

/// Default forward and backward schedules with their admissible slices.
pub fn default_schedules() -> &'static [(GainSchedule, Vec<AdmissibleMap>); 2] {
    static S: OnceLock<[(GainSchedule, Vec<AdmissibleMap>); 2]> = OnceLock::new();
    S.get_or_init(|| {
        [Direction::Forward, Direction::Backward].map(|dir| {
            build_schedule_with_maps(
                &VehicleParams::default(),
                dir,
                SpeedLimits::default().preview_gain,
                &DobSettings::default(),
                &DesignSettings::default(),
            )
            .unwrap()
        })
    })
}

/// `s·D + N·(kd s² + kp s + ki)` built directly, descending powers.
pub fn pid_loop_polynomial(num: &[f64], den: &[f64], kp: f64, ki: f64, kd: f64) -> Vec<f64> {
    let conv = |a: &[f64], b: &[f64]| {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let sd = conv(den, &[1.0, 0.0]);
    let nc = conv(num, &[kd, kp, ki]);
    let n = sd.len().max(nc.len());
    let pad = |p: &[f64]| {
        let mut v = vec![0.0; n - p.len()];
        v.extend_from_slice(p);
        v
    };
    let (a, b) = (pad(&sd), pad(&nc));
    let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let lead = sum.iter().position(|c| *c != 0.0).unwrap_or(0);
    sum[lead..].to_vec()
}

/// Full-course scenario with the default configuration.
pub fn default_scenario(dir: Direction, kind: ControllerKind) -> Scenario {
    let plan = default_plan();
    let (fw, bw) = default_speeds();
    let (speed, sched) = match dir {
        Direction::Forward => (fw.clone(), &default_schedules()[0].0),
        Direction::Backward => (bw.clone(), &default_schedules()[1].0),
    };
    Scenario::new(
        VehicleParams::default(),
        plan.curvature(dir).clone(),
        speed,
        kind,
        Some(sched.clone()),
        DobSettings::default(),
        initial_pose(&CourseGeometry::default(), dir),
        SpeedLimits::default().preview_gain,
    )
}

/// Lateral, longitudinal, preview and range limits on an emitted profile.
pub fn check_limits(p: &SpeedProfile, curv: &CurvatureProfile, lim: &SpeedLimits) {
    for x in &p.samples {
        let k = curv.kappa_at(x.s).abs();
        assert!(x.v * x.v * k <= lim.a_lat_max + 1e-9, "lateral at s={}", x.s);
        assert!((x.ls - lim.preview_gain * x.v).abs() < 1e-12);
        assert!(x.v <= lim.v_max + 1e-12 && x.v >= 0.0);
    }
    for w in p.samples.windows(2) {
        let ds = w[1].s - w[0].s;
        let vm = 0.5 * (w[0].v + w[1].v);
        let acc = vm * (w[1].v - w[0].v) / ds;
        assert!(acc.abs() <= lim.a_long_max + 1e-6, "longitudinal {acc} at s={}", w[0].s);
    }
}

/// Largest jumps of κ and dκ/ds across interior joints.
pub fn joint_jumps(s: &PathSpline) -> (f64, f64) {
    let mut jk = 0.0f64;
    let mut jdk = 0.0f64;
    for seg in 0..s.m - 1 {
        let k0 = curvature(s, seg, 1.0).unwrap();
        let k1 = curvature(s, seg + 1, 0.0).unwrap();
        let d0 = curvature_derivative(s, seg, 1.0).unwrap();
        let d1 = curvature_derivative(s, seg + 1, 0.0).unwrap();
        jk = jk.max((k1 - k0).abs());
        jdk = jdk.max((d1 - d0).abs());
    }
    (jk, jdk)
}

/// Closed loop of the nominal plant with the ideal PID in state-space form.
/// `CB = 0`, so the output derivative is `CA x` and needs no differentiator.
pub fn closed_loop_eigenvalues(v: f64, dir: Direction, g: &PidGains) -> Vec<Complex64> {
    let p = assemble_model(&VehicleParams::default(), v, 0.5 * v, dir).unwrap();
    let b = p.b_steer * NOMINAL_SCALE;
    let c = p.output();
    let ca = c * p.a;
    let k = c * g.kp + ca * g.kd;
    let mut m = SMatrix::<f64, 5, 5>::zeros();
    m.fixed_view_mut::<4, 4>(0, 0).copy_from(&(p.a - b * k));
    m.fixed_view_mut::<4, 1>(0, 4).copy_from(&(-b * g.ki));
    m.fixed_view_mut::<1, 4>(4, 0).copy_from(&c);
    let eig: SVector<Complex64, 5> = m.complex_eigenvalues();
    let mut out: Vec<Complex64> = eig.iter().copied().collect();
    if g.ki == 0.0 {
        // the integrator state decouples at the origin
        let k = out.iter().enumerate().min_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
        out.remove(k);
    }
    out
}
