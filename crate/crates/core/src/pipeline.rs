//! Course-to-profile planning with the default settings, shared by the CLI
//! and the tests.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::path::{
    curvature_profile, densify_waypoints, fit_path_with_lambdas, reverse_profile, segment_waypoints,
    CourseGeometry, CurvatureProfile, FitReport, PathSpline, Pose, WaypointSet,
};
use crate::speed::{build_profile, SpeedLimits, SpeedProfile};
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSettings {
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub densify_count: usize,
    pub curvature_samples: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { m: 4, p: 6, q: 3, densify_count: 200, curvature_samples: 4000 }
    }
}

impl FitSettings {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return invalid("segment count must be at least 1");
        }
        if self.p == 0 {
            return invalid("polynomial order must be at least 1");
        }
        if self.q > self.p {
            return invalid(format!("continuity order q={} exceeds polynomial order p={}", self.q, self.p));
        }
        if self.curvature_samples < 2 {
            return invalid("need at least 2 curvature samples");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub waypoints: WaypointSet,
    pub spline: PathSpline,
    pub report: FitReport,
    pub forward: CurvatureProfile,
    pub backward: CurvatureProfile,
}

impl Plan {
    pub fn curvature(&self, dir: Direction) -> &CurvatureProfile {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        }
    }
}

/// Anchors, densification, segmentation, fit and both curvature profiles.
pub fn plan_course(course: &CourseGeometry, fit: &FitSettings) -> Result<Plan> {
    course.validate()?;
    fit.validate()?;
    let dense = densify_waypoints(&course.anchors(), fit.densify_count)?;
    let waypoints = segment_waypoints(&dense, fit.m, fit.p)?;
    let (spline, report) = fit_path_with_lambdas(&waypoints, &waypoints.chord_lambdas(), fit.p, fit.q)?;
    let forward = curvature_profile(&spline, fit.curvature_samples)?;
    let backward = reverse_profile(&forward)?;
    Ok(Plan { waypoints, spline, report, forward, backward })
}

pub fn speed_profiles(plan: &Plan, limits: &SpeedLimits) -> Result<(SpeedProfile, SpeedProfile)> {
    Ok((build_profile(&plan.forward, limits)?, build_profile(&plan.backward, limits)?))
}

/// Where a run in `dir` starts.
pub fn initial_pose(course: &CourseGeometry, dir: Direction) -> Pose {
    match dir {
        Direction::Forward => course.start_pose,
        Direction::Backward => course.end_pose,
    }
}
