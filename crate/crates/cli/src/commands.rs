use std::path::{Path, PathBuf};

use maneuver_core::control::{build_schedule_with_maps, GainSchedule};
use maneuver_core::path::CurvatureProfile;
use maneuver_core::pipeline::{initial_pose, plan_course, speed_profiles, Plan};
use maneuver_core::sim::{compute_metrics, simulate, ControllerKind, Metrics, Report, ReportRow, Scenario, Trajectory};
use maneuver_core::speed::SpeedProfile;
use maneuver_core::{Direction, Error as CoreError};
use serde::{Deserialize, Serialize};

use crate::artifacts::{self as art, Outputs};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Fitted path plus both speed profiles.
pub struct Planned {
    pub plan: Plan,
    pub forward_speed: SpeedProfile,
    pub backward_speed: SpeedProfile,
}

impl Planned {
    pub fn speed(&self, dir: Direction) -> &SpeedProfile {
        match dir {
            Direction::Forward => &self.forward_speed,
            Direction::Backward => &self.backward_speed,
        }
    }
}

pub fn plan_stage(cfg: &RunConfig) -> CliResult<(Planned, Outputs)> {
    let plan = plan_course(&cfg.course, &cfg.fit)?;
    let (forward_speed, backward_speed) = speed_profiles(&plan, &cfg.limits)?;
    let mut out = Outputs::default();
    out.add(art::waypoints_file(), art::waypoints_csv(&plan.waypoints)?);
    out.add(art::spline_file(), art::spline_csv(&plan.spline)?);
    out.add(art::fit_report_file(), art::json_bytes(&plan.report)?);
    for dir in [Direction::Forward, Direction::Backward] {
        out.add(art::curvature_file(dir), art::curvature_csv(plan.curvature(dir))?);
    }
    out.add(art::speed_file(Direction::Forward), art::speed_csv(&forward_speed)?);
    out.add(art::speed_file(Direction::Backward), art::speed_csv(&backward_speed)?);
    Ok((Planned { plan, forward_speed, backward_speed }, out))
}

pub fn design_stage(cfg: &RunConfig, dirs: &[Direction]) -> CliResult<(Vec<(Direction, GainSchedule)>, Outputs)> {
    let mut out = Outputs::default();
    let mut schedules = Vec::with_capacity(dirs.len());
    for &dir in dirs {
        let (schedule, maps) =
            build_schedule_with_maps(&cfg.vehicle, dir, cfg.limits.preview_gain, &cfg.dob, &cfg.design)?;
        out.add(art::schedule_file(dir), art::schedule_json(&schedule)?);
        for (entry, map) in schedule.entries.iter().zip(&maps) {
            out.add(art::admissible_file(dir, entry.v), art::admissible_csv(map)?);
        }
        schedules.push((dir, schedule));
    }
    out.add(art::dob_file(), art::json_bytes(&cfg.dob)?);
    Ok((schedules, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub controller: ControllerKind,
    pub step: usize,
}

/// Metrics file body for one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsDoc {
    pub direction: Direction,
    pub controllers: Vec<ReportRow>,
    pub pid_dob_dominates: Option<bool>,
    #[serde(default)]
    pub failures: Vec<Failure>,
}

impl MetricsDoc {
    pub fn to_markdown(&self) -> String {
        let mut out = if self.controllers.is_empty() {
            format!("### {} motion\n\nNo controller completed.\n", self.direction)
        } else {
            Report {
                direction: self.direction,
                rows: self.controllers.clone(),
                pid_dob_dominates: self.pid_dob_dominates,
            }
            .to_markdown()
        };
        for f in &self.failures {
            out.push_str(&format!("\n{} diverged at step {}.\n", f.controller, f.step));
        }
        out
    }

    pub fn metrics(&self, kind: ControllerKind) -> Option<Metrics> {
        self.controllers.iter().find(|r| r.controller == kind).map(|r| r.metrics)
    }
}

struct Inputs {
    curvature: CurvatureProfile,
    speed: SpeedProfile,
    schedule: Option<GainSchedule>,
}

fn load_inputs(cfg: &RunConfig, out_dir: &Path, dir: Direction, needs_schedule: bool) -> CliResult<Inputs> {
    let need = |name: String| -> CliResult<PathBuf> {
        let p = out_dir.join(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(CliError::Artifact { path: p, msg: "missing upstream artifact (run plan/design first)".into() })
        }
    };
    let curv_path = need(art::curvature_file(dir))?;
    let speed_path = need(art::speed_file(dir))?;
    let sched_path = if needs_schedule { Some(need(art::schedule_file(dir))?) } else { None };
    Ok(Inputs {
        curvature: art::read_curvature(&curv_path, dir)?,
        speed: art::read_speed(&speed_path, dir, cfg.limits.v_min)?,
        schedule: sched_path.map(|p| art::read_schedule(&p, dir)).transpose()?,
    })
}

pub struct SimulationRun {
    pub docs: Vec<MetricsDoc>,
    pub trajectories: Vec<Trajectory>,
}

/// Runs every selected controller in every selected direction. Upstream
/// artifacts are rebuilt when `cfg.regenerate` is set and read from
/// `out_dir` otherwise; nothing is written here.
pub fn simulate_stage(cfg: &RunConfig, dirs: &[Direction], out_dir: &Path) -> CliResult<(SimulationRun, Outputs)> {
    let needs_schedule = cfg.controllers.iter().any(|c| c.uses_pid());
    let mut out = Outputs::default();
    let mut inputs = Vec::with_capacity(dirs.len());
    if cfg.regenerate {
        let (planned, plan_out) = plan_stage(cfg)?;
        merge_outputs(&mut out, plan_out);
        let schedules = if needs_schedule {
            let (s, design_out) = design_stage(cfg, dirs)?;
            merge_outputs(&mut out, design_out);
            s
        } else {
            Vec::new()
        };
        for &dir in dirs {
            inputs.push((
                dir,
                Inputs {
                    curvature: planned.plan.curvature(dir).clone(),
                    speed: planned.speed(dir).clone(),
                    schedule: schedules.iter().find(|(d, _)| *d == dir).map(|(_, s)| s.clone()),
                },
            ));
        }
    } else {
        for &dir in dirs {
            inputs.push((dir, load_inputs(cfg, out_dir, dir, needs_schedule)?));
        }
    }

    let mut docs = Vec::new();
    let mut trajectories = Vec::new();
    for (dir, inp) in inputs {
        let scenarios: Vec<Scenario> = cfg
            .controllers
            .iter()
            .map(|&kind| {
                let mut sc = Scenario::new(
                    cfg.vehicle,
                    inp.curvature.clone(),
                    inp.speed.clone(),
                    kind,
                    inp.schedule.clone(),
                    cfg.dob,
                    initial_pose(&cfg.course, dir),
                    cfg.limits.preview_gain,
                );
                sc.noise = cfg.noise;
                sc
            })
            .collect();
        let results: Vec<maneuver_core::Result<Trajectory>> = std::thread::scope(|scope| {
            let handles: Vec<_> = scenarios.iter().map(|sc| scope.spawn(move || simulate(sc))).collect();
            handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
        });
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (sc, res) in scenarios.iter().zip(results) {
            match res {
                Ok(traj) => {
                    rows.push((sc.controller, compute_metrics(&traj)?));
                    out.add(art::trajectory_file(dir, sc.controller.name()), art::trajectory_csv(&traj)?);
                    out.add(art::pose_file(dir, sc.controller.name()), art::pose_csv(&traj)?);
                    trajectories.push(traj);
                }
                Err(CoreError::Divergence { step }) => failures.push(Failure { controller: sc.controller, step }),
                Err(e) => return Err(e.into()),
            }
        }
        let doc = if rows.is_empty() {
            MetricsDoc { direction: dir, controllers: Vec::new(), pid_dob_dominates: None, failures }
        } else {
            let report = Report::from_metrics(dir, &rows)?;
            MetricsDoc { direction: dir, controllers: report.rows, pid_dob_dominates: report.pid_dob_dominates, failures }
        };
        out.add(art::metrics_file(dir), art::json_bytes(&doc)?);
        out.add(art::comparison_file(dir), doc.to_markdown().into_bytes());
        docs.push(doc);
    }
    Ok((SimulationRun { docs, trajectories }, out))
}

fn merge_outputs(into: &mut Outputs, from: Outputs) {
    for (name, bytes) in from.into_files() {
        into.add(name, bytes);
    }
}

/// Combined comparison table from the metrics files in `out_dir`.
pub fn report_stage(dirs: &[Direction], out_dir: &Path) -> CliResult<(String, Outputs)> {
    let mut text = String::from("# Path-tracking comparison\n");
    for &dir in dirs {
        let path = out_dir.join(art::metrics_file(dir));
        if !path.is_file() {
            return Err(CliError::Artifact { path, msg: "missing metrics (run simulate first)".into() });
        }
        let doc: MetricsDoc = art::read_json(&path)?;
        if doc.direction != dir {
            return Err(CliError::Artifact { path, msg: format!("holds {} metrics", doc.direction) });
        }
        text.push('\n');
        text.push_str(&doc.to_markdown());
    }
    let mut out = Outputs::default();
    out.add(art::report_file(), text.clone().into_bytes());
    Ok((text, out))
}

/// First divergence across the run, for the exit status.
pub fn divergence(run: &SimulationRun) -> Option<CliError> {
    run.docs.iter().find_map(|d| {
        d.failures.first().map(|f| CliError::Divergence {
            controller: f.controller.to_string(),
            direction: d.direction.to_string(),
            step: f.step,
        })
    })
}
