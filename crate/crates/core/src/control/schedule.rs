use serde::{Deserialize, Serialize};

use super::dob::DobSettings;
use super::param_space::{admissible_gain_map, closed_loop_poles, select_gains_with_tau, AdmissibleMap, GainGrid, SelectionRule};
use super::pid::{PidGains, DEFAULT_TAU_D};
use super::region::{d_stable, DRegion, RegionPolicy};
use crate::error::{invalid, Error, Result};
use crate::tf::RationalTF;
use crate::vehicle::{assemble_model, steering_to_error_tf, VehicleParams, V_FLOOR};
use crate::Direction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSettings {
    /// Scheduling speeds, m/s, strictly increasing.
    pub speeds: Vec<f64>,
    pub region: RegionPolicy,
    /// Integral gains tried in order; the first with a non-empty admissible
    /// (kp, kd) slice is used.
    pub ki_ladder: Vec<f64>,
    /// Initial upper end of both the kp and kd grid axes.
    pub gain_span: f64,
    /// Factors applied to `gain_span` in turn while the slice is empty.
    pub span_growth: Vec<f64>,
    pub resolution: usize,
    pub tau_d: f64,
    pub rule: SelectionRule,
}

impl Default for DesignSettings {
    fn default() -> Self {
        Self {
            speeds: vec![0.1, 0.2, 0.35, 0.55, 0.75, 1.0],
            region: RegionPolicy::default(),
            ki_ladder: (-12..=12).map(|k| 10f64.powf(k as f64 / 4.0)).collect(),
            gain_span: 5.0,
            span_growth: vec![1.0, 4.0, 16.0, 64.0],
            resolution: 161,
            tau_d: DEFAULT_TAU_D,
            rule: SelectionRule::MinNormOnBoundary,
        }
    }
}

impl DesignSettings {
    pub fn validate(&self, v_max: f64) -> Result<()> {
        if self.speeds.is_empty() {
            return invalid("at least one scheduling speed is required");
        }
        if self.speeds.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("scheduling speeds must be strictly increasing");
        }
        if self.speeds[0] < V_FLOOR || self.speeds[self.speeds.len() - 1] > v_max {
            return invalid(format!("scheduling speeds must lie in [{V_FLOOR}, {v_max}]"));
        }
        if self.ki_ladder.is_empty() || self.ki_ladder.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return invalid("integral gain ladder must hold finite non-negative values");
        }
        if !(self.gain_span > 0.0) || self.span_growth.is_empty() || self.span_growth.iter().any(|g| !(*g > 0.0)) {
            return invalid("gain grid span and growth factors must be positive");
        }
        if self.resolution < 16 {
            return invalid("grid resolution must be at least 16 per axis");
        }
        if !(self.tau_d > 0.0) {
            return invalid("derivative filter time constant must be positive");
        }
        self.region.validate(v_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub v: f64,
    pub direction: Direction,
    pub gains: PidGains,
    /// Region the gains were designed for at this speed.
    pub region: DRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub entries: Vec<ScheduleEntry>,
    pub interpolation: Interpolation,
}

impl GainSchedule {
    pub fn new(entries: Vec<ScheduleEntry>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("empty gain schedule");
        }
        let dir = entries[0].direction;
        if entries.iter().any(|e| e.direction != dir) {
            return invalid("schedule mixes directions");
        }
        if entries.windows(2).any(|w| w[1].v <= w[0].v) {
            return invalid("schedule speeds must be strictly increasing");
        }
        for e in &entries {
            e.gains.validate()?;
        }
        Ok(Self { entries, interpolation: Interpolation::Linear })
    }

    pub fn direction(&self) -> Direction {
        self.entries[0].direction
    }

    pub fn speed_range(&self) -> (f64, f64) {
        (self.entries[0].v, self.entries[self.entries.len() - 1].v)
    }

    /// Linear interpolation in V, held constant beyond the end speeds.
    pub fn gains_at(&self, v: f64) -> PidGains {
        let e = &self.entries;
        if v <= e[0].v {
            return e[0].gains;
        }
        if v >= e[e.len() - 1].v {
            return e[e.len() - 1].gains;
        }
        let i = e.partition_point(|x| x.v <= v) - 1;
        let w = (v - e[i].v) / (e[i + 1].v - e[i].v);
        PidGains::lerp(&e[i].gains, &e[i + 1].gains, w)
    }
}

/// Nominal design plant at speed `v`: the steering-to-error model scaled
/// by the DOB nominal gain.
pub fn design_plant(params: &VehicleParams, v: f64, preview_gain: f64, direction: Direction, dob: &DobSettings) -> Result<RationalTF> {
    let plant = assemble_model(params, v, preview_gain * v, direction)?;
    Ok(dob.nominal(&steering_to_error_tf(&plant)?))
}

/// Designs one speed: walks the integral-gain ladder, growing the (kp, kd)
/// window until the slice is non-empty, then applies the selection rule.
pub fn design_at_speed(
    plant: &RationalTF,
    region: &DRegion,
    design: &DesignSettings,
) -> Result<Option<(PidGains, AdmissibleMap)>> {
    for &ki in &design.ki_ladder {
        for &growth in &design.span_growth {
            let span = design.gain_span * growth;
            let grid = GainGrid { kp: (0.0, span), kd: (0.0, span), resolution: design.resolution };
            let map = admissible_gain_map(plant, region, ki, &grid)?;
            if !map.is_empty() {
                let gains = select_gains_with_tau(&map, design.rule, design.tau_d)?;
                return Ok(Some((gains, map)));
            }
        }
    }
    Ok(None)
}

/// Gain schedule plus the admissible slice each entry came from.
pub fn build_schedule_with_maps(
    params: &VehicleParams,
    direction: Direction,
    preview_gain: f64,
    dob: &DobSettings,
    design: &DesignSettings,
) -> Result<(GainSchedule, Vec<AdmissibleMap>)> {
    params.validate()?;
    dob.validate()?;
    design.validate(design.speeds.iter().copied().fold(V_FLOOR, f64::max))?;
    let mut entries = Vec::new();
    let mut maps = Vec::new();
    for &v in &design.speeds {
        let plant = design_plant(params, v, preview_gain, direction, dob)?;
        let region = design.region.at_speed(v);
        let Some((gains, map)) = design_at_speed(&plant, &region, design)? else {
            return Err(Error::NoAdmissibleGains { speed: Some(v) });
        };
        if !d_stable(&closed_loop_poles(&plant, &gains), &region) {
            return Err(Error::Numerical(format!("selected gains at V = {v} failed the D-stability recheck")));
        }
        entries.push(ScheduleEntry { v, direction, gains, region });
        maps.push(map);
    }
    Ok((GainSchedule::new(entries)?, maps))
}

pub fn build_schedule(
    params: &VehicleParams,
    direction: Direction,
    preview_gain: f64,
    dob: &DobSettings,
    design: &DesignSettings,
) -> Result<GainSchedule> {
    build_schedule_with_maps(params, direction, preview_gain, dob, design).map(|(s, _)| s)
}
