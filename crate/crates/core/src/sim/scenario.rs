use serde::{Deserialize, Serialize};

use crate::control::{DobSettings, GainSchedule};
use crate::error::{invalid, Result};
use crate::path::{CurvatureProfile, Pose};
use crate::speed::SpeedProfile;
use crate::vehicle::{VehicleParams, V_FLOOR};
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "DOB")]
    Dob,
    #[serde(rename = "PID")]
    Pid,
    #[serde(rename = "PID_DOB")]
    PidDob,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [ControllerKind::Dob, ControllerKind::Pid, ControllerKind::PidDob];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Dob => "DOB",
            ControllerKind::Pid => "PID",
            ControllerKind::PidDob => "PID_DOB",
        }
    }

    pub fn uses_pid(self) -> bool {
        matches!(self, ControllerKind::Pid | ControllerKind::PidDob)
    }

    pub fn uses_dob(self) -> bool {
        matches!(self, ControllerKind::Dob | ControllerKind::PidDob)
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('+', "_").as_str() {
            "DOB" => Ok(ControllerKind::Dob),
            "PID" => Ok(ControllerKind::Pid),
            "PID_DOB" | "PIDDOB" => Ok(ControllerKind::PidDob),
            other => invalid(format!("unknown controller '{other}'")),
        }
    }
}

/// White Gaussian noise added to the measured e_y.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation, m. Zero disables the noise.
    pub std_dev: f64,
    pub seed: u64,
}

/// Steering command limit, rad.
pub const STEER_LIMIT: f64 = 0.6;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: VehicleParams,
    pub curvature: CurvatureProfile,
    pub speed: SpeedProfile,
    pub controller: ControllerKind,
    pub schedule: Option<GainSchedule>,
    pub dob: DobSettings,
    pub initial_pose: Pose,
    pub direction: Direction,
    /// Integration and controller sample time, s. Must equal `dob.dt`.
    pub dt: f64,
    pub noise: NoiseSpec,
    pub preview_gain: f64,
    pub steer_limit: f64,
    /// Model-scheduling speed floor, m/s.
    pub v_floor: f64,
    /// Initial (β, r, Δψ, e_y).
    pub initial_state: [f64; 4],
}

impl Scenario {
    /// Scenario with the default limits, starting on the path at rest.
    pub fn new(
        params: VehicleParams,
        curvature: CurvatureProfile,
        speed: SpeedProfile,
        controller: ControllerKind,
        schedule: Option<GainSchedule>,
        dob: DobSettings,
        initial_pose: Pose,
        preview_gain: f64,
    ) -> Self {
        let direction = curvature.direction;
        Self {
            params,
            curvature,
            speed,
            controller,
            schedule,
            dob,
            initial_pose,
            direction,
            dt: dob.dt,
            noise: NoiseSpec::default(),
            preview_gain,
            steer_limit: STEER_LIMIT,
            v_floor: V_FLOOR,
            initial_state: [0.0; 4],
        }
    }

    /// Same scenario with a different sample time for both plant and filters.
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self.dob.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.dob.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid("time step must be positive");
        }
        if self.dob.dt != self.dt {
            return invalid("DOB sample time must equal the simulation step");
        }
        if !(self.steer_limit > 0.0) {
            return invalid("steering limit must be positive");
        }
        if !(self.v_floor >= V_FLOOR) {
            return invalid(format!("scheduling floor must be at least {V_FLOOR}"));
        }
        if !(self.noise.std_dev >= 0.0) {
            return invalid("noise standard deviation must be non-negative");
        }
        if self.curvature.direction != self.direction || self.speed.direction != self.direction {
            return invalid("curvature and speed profiles must match the scenario direction");
        }
        let len = self.speed.length();
        if (len - self.curvature.total_length).abs() > 1e-9 * len.max(1.0) {
            return invalid("speed and curvature profiles describe different paths");
        }
        if self.controller.uses_pid() {
            let Some(s) = &self.schedule else {
                return invalid("PID control needs a gain schedule");
            };
            if s.direction() != self.direction {
                return invalid("gain schedule was designed for the other direction");
            }
            let vmax = self.speed.samples.iter().fold(self.v_floor, |m, p| m.max(p.v));
            let (lo, hi) = s.speed_range();
            if lo > self.v_floor + 1e-9 || hi < vmax - 1e-9 {
                return invalid(format!(
                    "gain schedule covers [{lo}, {hi}] m/s but the run needs [{}, {vmax}]",
                    self.v_floor
                ));
            }
        }
        Ok(())
    }
}
