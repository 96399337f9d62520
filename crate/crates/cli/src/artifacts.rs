//! On-disk formats: CSV series, JSON documents and Markdown tables.

use std::fs;
use std::path::{Path, PathBuf};

use maneuver_core::control::{AdmissibleMap, DRegion, GainSchedule, Interpolation, PidGains, ScheduleEntry};
use maneuver_core::path::{CurvatureProfile, CurvatureSample, PathSpline, WaypointSet};
use maneuver_core::sim::{Trajectory, TrajectorySample};
use maneuver_core::speed::{SpeedProfile, SpeedSample};
use maneuver_core::Direction;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn waypoints_file() -> &'static str {
    "waypoints.csv"
}
pub fn spline_file() -> &'static str {
    "spline.csv"
}
pub fn fit_report_file() -> &'static str {
    "fit_report.json"
}
pub fn dob_file() -> &'static str {
    "dob_settings.json"
}
pub fn curvature_file(dir: Direction) -> String {
    format!("curvature_{dir}.csv")
}
pub fn speed_file(dir: Direction) -> String {
    format!("speed_{dir}.csv")
}
pub fn schedule_file(dir: Direction) -> String {
    format!("gain_schedule_{dir}.json")
}
pub fn admissible_file(dir: Direction, v: f64) -> String {
    format!("admissible_{dir}_v{v:.2}.csv")
}
pub fn trajectory_file(dir: Direction, controller: &str) -> String {
    format!("trajectory_{dir}_{controller}.csv")
}
pub fn pose_file(dir: Direction, controller: &str) -> String {
    format!("pose_{dir}_{controller}.csv")
}
pub fn metrics_file(dir: Direction) -> String {
    format!("metrics_{dir}.json")
}
pub fn comparison_file(dir: Direction) -> String {
    format!("comparison_{dir}.md")
}
pub fn report_file() -> &'static str {
    "comparison.md"
}

/// Files produced by one command, written only once everything succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn into_files(self) -> Vec<(String, Vec<u8>)> {
        self.files
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write_all(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Config(e.to_string()))
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn read_csv<R: DeserializeOwned>(path: &Path) -> CliResult<Vec<R>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| artifact_error(path, e))?;
    r.deserialize().collect::<Result<Vec<R>, _>>().map_err(|e| artifact_error(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| artifact_error(path, e))
}

fn artifact_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Artifact { path: path.to_path_buf(), msg: e.to_string() }
}

#[derive(Serialize)]
struct WaypointRow {
    index: usize,
    segment: usize,
    x: f64,
    y: f64,
}

pub fn waypoints_csv(w: &WaypointSet) -> CliResult<Vec<u8>> {
    let rows = w.segments().into_iter().enumerate().flat_map(|(seg, range)| {
        range.map(move |i| (seg, i))
    });
    csv_bytes(rows.map(|(segment, index)| WaypointRow {
        index,
        segment,
        x: w.points[index][0],
        y: w.points[index][1],
    }))
}

#[derive(Serialize)]
struct SplineRow {
    segment: usize,
    k: usize,
    a_k: f64,
    b_k: f64,
}

pub fn spline_csv(s: &PathSpline) -> CliResult<Vec<u8>> {
    let rows = (0..s.m).flat_map(|seg| {
        (0..=s.p).map(move |k| SplineRow { segment: seg, k, a_k: s.coeffs_x[seg][k], b_k: s.coeffs_y[seg][k] })
    });
    csv_bytes(rows)
}

#[derive(Serialize, Deserialize)]
struct CurvatureRow {
    s_m: f64,
    kappa_per_m: f64,
}

pub fn curvature_csv(c: &CurvatureProfile) -> CliResult<Vec<u8>> {
    csv_bytes(c.samples.iter().map(|p| CurvatureRow { s_m: p.s, kappa_per_m: p.kappa }))
}

pub fn read_curvature(path: &Path, dir: Direction) -> CliResult<CurvatureProfile> {
    let rows: Vec<CurvatureRow> = read_csv(path)?;
    let samples = rows.into_iter().map(|r| CurvatureSample { s: r.s_m, kappa: r.kappa_per_m }).collect();
    CurvatureProfile::new(samples, dir).map_err(|e| artifact_error(path, e))
}

#[derive(Serialize, Deserialize)]
struct SpeedRow {
    s_m: f64,
    v_mps: f64,
    ls_m: f64,
}

pub fn speed_csv(p: &SpeedProfile) -> CliResult<Vec<u8>> {
    csv_bytes(p.samples.iter().map(|x| SpeedRow { s_m: x.s, v_mps: x.v, ls_m: x.ls }))
}

pub fn read_speed(path: &Path, dir: Direction, v_min: f64) -> CliResult<SpeedProfile> {
    let rows: Vec<SpeedRow> = read_csv(path)?;
    let samples = rows.into_iter().map(|r| SpeedSample { s: r.s_m, v: r.v_mps, ls: r.ls_m }).collect();
    SpeedProfile::from_samples(samples, dir, v_min).map_err(|e| artifact_error(path, e))
}

/// Schedule file body. The direction lives in the file name, so the
/// forward and backward files of a symmetric vehicle are identical.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    interpolation: Interpolation,
    entries: Vec<ScheduleRow>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRow {
    v: f64,
    gains: PidGains,
    region: DRegion,
}

pub fn schedule_json(s: &GainSchedule) -> CliResult<Vec<u8>> {
    json_bytes(&ScheduleDoc {
        interpolation: s.interpolation,
        entries: s.entries.iter().map(|e| ScheduleRow { v: e.v, gains: e.gains, region: e.region }).collect(),
    })
}

pub fn read_schedule(path: &Path, dir: Direction) -> CliResult<GainSchedule> {
    let doc: ScheduleDoc = read_json(path)?;
    let entries = doc
        .entries
        .into_iter()
        .map(|r| ScheduleEntry { v: r.v, direction: dir, gains: r.gains, region: r.region })
        .collect();
    let mut s = GainSchedule::new(entries).map_err(|e| artifact_error(path, e))?;
    s.interpolation = doc.interpolation;
    Ok(s)
}

#[derive(Serialize)]
struct AdmissibleRow {
    k_p: f64,
    k_d: f64,
    admissible: u8,
}

/// One row per grid cell of the selected integral-gain slice.
pub fn admissible_csv(map: &AdmissibleMap) -> CliResult<Vec<u8>> {
    let n = map.n();
    let rows = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    csv_bytes(rows.map(|(i, j)| {
        let g = map.gains_at(i, j);
        AdmissibleRow { k_p: g.kp, k_d: g.kd, admissible: map.is_admissible(i, j) as u8 }
    }))
}

pub fn trajectory_csv(t: &Trajectory) -> CliResult<Vec<u8>> {
    csv_bytes(t.samples.iter().map(|s: &TrajectorySample| *s))
}

pub fn pose_csv(t: &Trajectory) -> CliResult<Vec<u8>> {
    csv_bytes(t.pose.iter().copied())
}
