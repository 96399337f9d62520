use serde::{Deserialize, Serialize};

use super::engine::Trajectory;
use super::scenario::{ControllerKind, Scenario};
use super::simulate;
use crate::error::{invalid, Result};
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub max_abs_ey: f64,
    pub rms_ey: f64,
    pub max_abs_delta: f64,
    pub max_abs_delta_rate: f64,
}

/// Max and RMS over every sample; steering rate by backward difference of δ.
pub fn compute_metrics(traj: &Trajectory) -> Result<Metrics> {
    let s = &traj.samples;
    if s.is_empty() {
        return invalid("empty trajectory");
    }
    let max_abs_ey = s.iter().fold(0.0f64, |m, p| m.max(p.ey.abs()));
    let rms_ey = (s.iter().map(|p| p.ey * p.ey).sum::<f64>() / s.len() as f64).sqrt();
    let max_abs_delta = s.iter().fold(0.0f64, |m, p| m.max(p.delta.abs()));
    let max_abs_delta_rate = s
        .windows(2)
        .fold(0.0f64, |m, w| m.max(((w[1].delta - w[0].delta) / traj.dt).abs()));
    Ok(Metrics {
        max_abs_ey,
        rms_ey: rms_ey.min(max_abs_ey),
        max_abs_delta,
        max_abs_delta_rate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub controller: ControllerKind,
    pub metrics: Metrics,
    /// max |e_y| relative to the best row.
    pub ratio_to_best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub direction: Direction,
    pub rows: Vec<ReportRow>,
    /// Whether PID_DOB beats every other controller on max and RMS e_y;
    /// `None` when there is nothing to compare against.
    pub pid_dob_dominates: Option<bool>,
}

impl Report {
    pub fn from_metrics(direction: Direction, results: &[(ControllerKind, Metrics)]) -> Result<Self> {
        if results.is_empty() {
            return invalid("nothing to report");
        }
        let best = results.iter().fold(f64::INFINITY, |m, r| m.min(r.1.max_abs_ey));
        let rows = results
            .iter()
            .map(|&(controller, metrics)| ReportRow {
                controller,
                metrics,
                ratio_to_best: if best > 0.0 { metrics.max_abs_ey / best } else { 1.0 },
            })
            .collect::<Vec<_>>();
        let combined = rows.iter().find(|r| r.controller == ControllerKind::PidDob);
        let others: Vec<_> = rows.iter().filter(|r| r.controller != ControllerKind::PidDob).collect();
        let pid_dob_dominates = match combined {
            Some(c) if !others.is_empty() => Some(others.iter().all(|o| {
                c.metrics.max_abs_ey < o.metrics.max_abs_ey && c.metrics.rms_ey < o.metrics.rms_ey
            })),
            _ => None,
        };
        Ok(Self { direction, rows, pid_dob_dominates })
    }

    pub fn metrics(&self, kind: ControllerKind) -> Option<Metrics> {
        self.rows.iter().find(|r| r.controller == kind).map(|r| r.metrics)
    }

    /// Side-by-side table, one column per controller.
    pub fn to_markdown(&self) -> String {
        let mut out = format!("### {} motion\n\n| Metric |", capitalize(self.direction.as_str()));
        for r in &self.rows {
            out.push_str(&format!(" {} |", r.controller));
        }
        out.push_str("\n|---|");
        for _ in &self.rows {
            out.push_str("---|");
        }
        out.push('\n');
        let lines: [(&str, fn(&Metrics) -> f64); 4] = [
            ("Max absolute path-tracking error (m)", |m| m.max_abs_ey),
            ("RMS path-tracking error (m)", |m| m.rms_ey),
            ("Max absolute steering angle (rad)", |m| m.max_abs_delta),
            ("Max absolute steering rate (rad/s)", |m| m.max_abs_delta_rate),
        ];
        for (label, f) in lines {
            out.push_str(&format!("| {label} |"));
            for r in &self.rows {
                out.push_str(&format!(" {:.4e} |", f(&r.metrics)));
            }
            out.push('\n');
        }
        out.push_str("| Max error relative to best |");
        for r in &self.rows {
            out.push_str(&format!(" {:.2} |", r.ratio_to_best));
        }
        out.push('\n');
        if let Some(d) = self.pid_dob_dominates {
            out.push_str(&format!("\nPID_DOB dominates: {}\n", if d { "yes" } else { "no" }));
        }
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Runs scenarios that differ only in the controller and tabulates them.
pub fn compare(scenarios: &[Scenario]) -> Result<Report> {
    let Some(first) = scenarios.first() else {
        return invalid("no scenarios to compare");
    };
    for sc in &scenarios[1..] {
        if sc.curvature != first.curvature || sc.speed != first.speed || sc.direction != first.direction {
            return invalid("scenarios must share geometry, speed profile and direction");
        }
    }
    let mut results = Vec::with_capacity(scenarios.len());
    for sc in scenarios {
        results.push((sc.controller, compute_metrics(&simulate(sc)?)?));
    }
    Report::from_metrics(first.direction, &results)
}
