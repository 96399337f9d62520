use std::path::{Path, PathBuf};

use maneuver_core::control::{DesignSettings, DobSettings};
use maneuver_core::path::CourseGeometry;
use maneuver_core::pipeline::FitSettings;
use maneuver_core::sim::{ControllerKind, NoiseSpec};
use maneuver_core::speed::SpeedLimits;
use maneuver_core::vehicle::VehicleParams;
use maneuver_core::Direction;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DirectionOption {
    Forward,
    Backward,
    #[default]
    Both,
}

impl DirectionOption {
    pub fn directions(self) -> Vec<Direction> {
        match self {
            DirectionOption::Forward => vec![Direction::Forward],
            DirectionOption::Backward => vec![Direction::Backward],
            DirectionOption::Both => vec![Direction::Forward, Direction::Backward],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub course: CourseGeometry,
    pub fit: FitSettings,
    pub limits: SpeedLimits,
    pub vehicle: VehicleParams,
    pub dob: DobSettings,
    pub design: DesignSettings,
    pub controllers: Vec<ControllerKind>,
    pub directions: DirectionOption,
    pub noise: NoiseSpec,
    pub output_dir: PathBuf,
    /// Rebuild missing upstream artifacts instead of failing.
    pub regenerate: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            course: CourseGeometry::default(),
            fit: FitSettings::default(),
            limits: SpeedLimits::default(),
            vehicle: VehicleParams::default(),
            dob: DobSettings::default(),
            design: DesignSettings::default(),
            controllers: ControllerKind::ALL.to_vec(),
            directions: DirectionOption::Both,
            noise: NoiseSpec::default(),
            output_dir: PathBuf::from("out"),
            regenerate: true,
        }
    }
}

pub const PRESETS: [&str; 2] = ["default", "straight"];

/// Named starting points. `straight` replaces the course with a straight
/// line fitted by a single segment.
pub fn preset(name: &str) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    match name {
        "default" => {}
        "straight" => {
            let end = cfg.course.end_pose.x;
            cfg.course.anchors = Some((0..5).map(|i| (end * i as f64 / 4.0, 0.0)).collect());
            cfg.fit.m = 1;
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}' (available: {})",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(cfg)
}

impl RunConfig {
    /// Preset overlaid with the keys present in `overrides`.
    pub fn from_value(preset_name: &str, overrides: Option<Value>) -> CliResult<Self> {
        let base = preset(preset_name)?;
        let Some(over) = overrides else {
            return Ok(base);
        };
        let mut merged = serde_json::to_value(&base).map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut merged, over);
        serde_json::from_value(merged).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>, preset_name: &str) -> CliResult<Self> {
        let overrides = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Some(serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?)
            }
            None => None,
        };
        Self::from_value(preset_name, overrides)
    }

    /// Checks every nested section before any stage runs.
    pub fn validate(&self) -> CliResult<()> {
        self.course.validate()?;
        self.fit.validate()?;
        self.limits.validate()?;
        self.vehicle.validate()?;
        self.dob.validate()?;
        self.design.validate(self.limits.v_max)?;
        if self.controllers.is_empty() {
            return Err(CliError::Config("no controllers selected".into()));
        }
        let mut seen = self.controllers.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.controllers.len() {
            return Err(CliError::Config("controller listed twice".into()));
        }
        if !(self.noise.std_dev >= 0.0) {
            return Err(CliError::Config("noise standard deviation must be non-negative".into()));
        }
        Ok(())
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
