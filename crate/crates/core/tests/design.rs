mod common;

use common::{closed_loop_eigenvalues, default_schedules, durand_kerner, pid_loop_polynomial, root_gap};
use maneuver_core::control::*;
use maneuver_core::error::Error;
use maneuver_core::poly;
use maneuver_core::tf::RationalTF;
use maneuver_core::vehicle::{assemble_model, VehicleParams};
use maneuver_core::Direction;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn double_integrator() -> RationalTF {
    RationalTF::new(&[1.0], &[1.0, 0.0, 0.0]).unwrap()
}

#[test]
fn pd_on_double_integrator_admits_the_positive_quadrant() {
    let region = DRegion { sigma_min: 0.0, zeta_min: 0.0, omega_max: f64::INFINITY };
    let grid = GainGrid { kp: (-1.0, 1.0), kd: (-1.0, 1.0), resolution: 20 };
    let map = admissible_gain_map(&double_integrator(), &region, 0.0, &grid).unwrap();
    for i in 0..20 {
        for j in 0..20 {
            let g = map.gains_at(i, j);
            // Routh on s² + kd s + kp
            let routh = g.kp > 0.0 && g.kd > 0.0;
            assert_eq!(map.is_admissible(i, j), routh, "kp={} kd={}", g.kp, g.kd);
        }
    }
}

#[test]
fn min_norm_selection_sits_next_to_the_exhaustive_minimum() {
    let region = DRegion { sigma_min: 0.5, zeta_min: 0.5, omega_max: 100.0 };
    let grid = GainGrid { kp: (0.0, 5.0), kd: (0.0, 5.0), resolution: 51 };
    let map = admissible_gain_map(&double_integrator(), &region, 0.0, &grid).unwrap();
    let mut best = f64::INFINITY;
    for i in 0..51 {
        for j in 0..51 {
            if map.is_admissible(i, j) {
                let g = map.gains_at(i, j);
                best = best.min(g.kp.hypot(g.kd));
            }
        }
    }
    let g = select_gains(&map, SelectionRule::MinNormOnBoundary).unwrap();
    let cell = 0.1;
    assert!(g.kp > 0.0 && g.kd > 0.0);
    assert!(g.kp.hypot(g.kd) - best <= 2.0 * cell * 2f64.sqrt(), "{g:?} vs {best}");
    assert!(d_stable(&closed_loop_poles(&double_integrator(), &g), &region));
}

#[test]
fn single_admissible_cell_is_selected() {
    let region = DRegion { sigma_min: 0.5, zeta_min: 0.5, omega_max: 100.0 };
    let grid = GainGrid { kp: (0.0, 5.0), kd: (0.0, 5.0), resolution: 16 };
    let mut flags = vec![violation::DECAY_REAL; 256];
    flags[5 * 16 + 7] = 0;
    let map = AdmissibleMap { grid, ki: 0.0, region, flags, boundary: vec![], crb: vec![] };
    let g = select_gains(&map, SelectionRule::MinNormOnBoundary).unwrap();
    let want = map.gains_at(5, 7);
    assert_eq!((g.kp, g.kd), (want.kp, want.kd));
}

#[test]
fn empty_map_reports_no_admissible_gains() {
    let region = DRegion { sigma_min: 0.5, zeta_min: 0.5, omega_max: 100.0 };
    let grid = GainGrid { kp: (-5.0, -1.0), kd: (-5.0, -1.0), resolution: 16 };
    let map = admissible_gain_map(&double_integrator(), &region, 0.0, &grid).unwrap();
    assert!(map.is_empty());
    assert_eq!(
        select_gains(&map, SelectionRule::MinNormOnBoundary),
        Err(Error::NoAdmissibleGains { speed: None })
    );
}

#[test]
fn crb_meets_rrb_as_frequency_vanishes() {
    let plant = make_nominal(
        &maneuver_core::vehicle::steering_to_error_tf(
            &assemble_model(&VehicleParams::default(), 0.55, 0.275, Direction::Forward).unwrap(),
        )
        .unwrap(),
    );
    for &ki in &[0.0, 0.01, 0.1] {
        for &sigma in &[0.1, 0.2173] {
            let line = rrb_line(&plant, ki, sigma);
            let pts = crb_trace(&plant, ki, sigma, &[1e-3, 1e-4, 1e-5]);
            assert_eq!(pts.len(), 3);
            let d: Vec<f64> = pts.iter().map(|p| line.distance(p.kp, p.kd).abs()).collect();
            let scale = pts[2].kp.hypot(pts[2].kd).max(1.0);
            assert!(d[2] < 1e-6 * scale, "ki={ki} σ={sigma}: {d:?}");
            assert!(d[1] < d[0] || d[0] < 1e-9 * scale);
        }
    }
}

/// Distance from a point to a polyline in cell units.
fn polyline_distance(p: (f64, f64), line: &[(f64, f64)]) -> f64 {
    line.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
            (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Checks that every admissible cell on the complex-root decay edge lies
/// within 1.5 cells of the traced CRB, and that the trace never runs through
/// the admissible interior. Returns the number of edge cells.
fn crb_agreement(map: &AdmissibleMap) -> usize {
    let n = map.n();
    let r = (n - 1) as f64;
    let cell = ((map.grid.kp.1 - map.grid.kp.0) / r, (map.grid.kd.1 - map.grid.kd.0) / r);
    let line: Vec<(f64, f64)> = map
        .crb
        .iter()
        .map(|p| ((p.kp - map.grid.kp.0) / cell.0, (p.kd - map.grid.kd.0) / cell.1))
        .collect();
    let cells = map.crb_cells();
    for &(i, j) in &cells {
        let d = polyline_distance((i as f64, j as f64), &line);
        assert!(d <= 1.5, "cell ({i},{j}) is {d} cells from the CRB");
    }
    for &(x, y) in &line {
        let (i, j) = (x.round(), y.round());
        if i < 1.0 || j < 1.0 || i > r - 1.0 || j > r - 1.0 {
            continue;
        }
        let (i, j) = (i as usize, j as usize);
        if map.is_admissible(i, j) {
            let mixed = (i - 1..=i + 1).any(|a| (j - 1..=j + 1).any(|b| !map.is_admissible(a, b)));
            assert!(mixed, "CRB crosses the admissible interior at ({i},{j})");
        }
    }
    cells.len()
}

#[test]
fn grid_and_crb_trace_agree_within_one_cell() {
    let region = DRegion { sigma_min: 0.5, zeta_min: 0.5, omega_max: 100.0 };
    let grid = GainGrid { kp: (0.0, 2.0), kd: (0.0, 2.0), resolution: 81 };
    let map = admissible_gain_map(&double_integrator(), &region, 0.0, &grid).unwrap();
    assert!(crb_agreement(&map) > 0);

    // a looser cone than the schedule default so the decay edge bounds the slice
    let policy = RegionPolicy { zeta_min: 0.5, ..Default::default() };
    for dir in [Direction::Forward, Direction::Backward] {
        for &v in &[0.1, 0.55, 1.0] {
            let plant = design_plant(&VehicleParams::default(), v, 0.5, dir, &DobSettings::default()).unwrap();
            let grid = GainGrid { kp: (0.0, 5.0), kd: (0.0, 5.0), resolution: 81 };
            let map = admissible_gain_map(&plant, &policy.at_speed(v), 0.0, &grid).unwrap();
            assert!(crb_agreement(&map) > 0, "V={v} {dir:?}");
        }
    }
}

#[test]
fn admissible_cells_pass_an_independent_tighter_recheck() {
    for (schedule, maps) in default_schedules() {
        for (entry, map) in schedule.entries.iter().zip(maps) {
            let plant = design_plant(
                &VehicleParams::default(),
                entry.v,
                0.5,
                entry.direction,
                &DobSettings::default(),
            )
            .unwrap();
            let n = map.n();
            let mut checked = 0;
            for i in 0..n {
                for j in 0..n {
                    if !map.is_admissible(i, j) {
                        continue;
                    }
                    let g = map.gains_at(i, j);
                    let p = pid_loop_polynomial(plant.num(), plant.den(), g.kp, g.ki, g.kd);
                    let roots = durand_kerner(&p);
                    assert_eq!(region_violations(&roots, &map.region, MAP_MARGIN / 10.0), 0);
                    checked += 1;
                }
            }
            assert!(checked > 0);
        }
    }
}

#[test]
fn scheduled_gains_place_state_space_poles_in_the_region() {
    for (schedule, _) in default_schedules() {
        for e in &schedule.entries {
            let eig = closed_loop_eigenvalues(e.v, e.direction, &e.gains);
            assert!(d_stable(&eig, &e.region), "V={} {:?}: {eig:?}", e.v, e.direction);
            let plant = design_plant(&VehicleParams::default(), e.v, 0.5, e.direction, &DobSettings::default()).unwrap();
            let poles = closed_loop_poles(&plant, &e.gains);
            assert!(root_gap(&poles, &eig) < 1e-6);
        }
    }
}

#[test]
fn coarse_schedule_entries_are_d_stable_and_interpolate() {
    let design = DesignSettings { speeds: vec![0.1, 0.55, 1.0], ..Default::default() };
    let sched = build_schedule(&VehicleParams::default(), Direction::Forward, 0.5, &DobSettings::default(), &design)
        .unwrap();
    assert_eq!(sched.entries.len(), 3);
    for e in &sched.entries {
        let plant = design_plant(&VehicleParams::default(), e.v, 0.5, e.direction, &DobSettings::default()).unwrap();
        assert!(d_stable(&closed_loop_poles(&plant, &e.gains), &e.region));
    }
    let (a, b) = (sched.entries[0].gains, sched.entries[1].gains);
    let m = sched.gains_at(0.3);
    for (x, lo, hi) in [(m.kp, a.kp, b.kp), (m.ki, a.ki, b.ki), (m.kd, a.kd, b.kd)] {
        assert!(x >= lo.min(hi) && x <= lo.max(hi));
    }
    assert_eq!(sched.gains_at(0.05), a);
    assert_eq!(sched.gains_at(2.0), sched.entries[2].gains);
}

#[test]
fn symmetric_vehicle_schedules_match_across_directions() {
    let d = VehicleParams::default();
    let sym = VehicleParams { cr: d.cf, lr: d.lf, ..d };
    let design = DesignSettings { speeds: vec![0.1, 0.55, 1.0], ..Default::default() };
    let dob = DobSettings::default();
    let fw = build_schedule(&sym, Direction::Forward, 0.5, &dob, &design).unwrap();
    let bw = build_schedule(&sym, Direction::Backward, 0.5, &dob, &design).unwrap();
    for (a, b) in fw.entries.iter().zip(&bw.entries) {
        assert_eq!(a.gains, b.gains);
    }
}

#[test]
fn unreachable_region_names_the_speed() {
    let design = DesignSettings {
        speeds: vec![0.1, 1.0],
        region: RegionPolicy { decay: DecayBound::Absolute(2000.0), zeta_min: 0.85, omega_max: 1e4 },
        ki_ladder: vec![0.0],
        span_growth: vec![1.0],
        resolution: 16,
        ..Default::default()
    };
    let err = build_schedule(&VehicleParams::default(), Direction::Forward, 0.5, &DobSettings::default(), &design);
    assert_eq!(err, Err(Error::NoAdmissibleGains { speed: Some(0.1) }));
}

#[test]
fn filtered_pid_converges_linearly_to_ideal() {
    let g = |tau_d| PidGains { kp: 1.3, ki: 0.4, kd: 2.0, tau_d };
    let s = Complex64::new(0.0, 1.0);
    let err = |t: f64| (g(t).eval_filtered(s) - g(t).eval_ideal(s)).norm();
    let taus = [1e-2, 1e-3, 1e-4, 1e-5];
    for w in taus.windows(2) {
        let ratio = err(w[0]) / err(w[1]);
        assert!((ratio - 10.0).abs() < 0.11, "ratio {ratio}");
    }
    // slope kd·|s|²
    assert!((err(1e-6) / 1e-6 - 2.0).abs() < 1e-5);
}

#[test]
fn companion_roots_agree_with_weierstrass_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let deg = rng.gen_range(2..8);
        let mut p: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-3.0..3.0)).collect();
        p[0] = rng.gen_range(0.5..2.0);
        let a = poly::roots(&p);
        let b = durand_kerner(&p);
        assert!(root_gap(&a, &b) < 1e-8, "{p:?}");
    }
}

#[test]
fn routh_agrees_with_root_real_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let deg = rng.gen_range(1..7);
        let p: Vec<f64> = (0..=deg).map(|k| if k == 0 { 1.0 } else { rng.gen_range(-1.0..4.0) }).collect();
        let roots = durand_kerner(&p);
        let max_re = roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
        if max_re.abs() > 1e-6 {
            assert_eq!(poly::is_hurwitz(&p), max_re < 0.0, "{p:?}");
        }
    }
}
