//! Waypoints, segmentation, constrained polynomial fitting and path geometry.

mod course;
mod fit;
mod geometry;
mod waypoints;

pub use course::{CourseGeometry, LaneSide, Pose};
pub use fit::{
    build_constraint_matrix, fit_path, fit_path_with_lambdas, FitReport, JointMismatch, PathSpline, SolveMethod,
};
pub use geometry::{
    curvature, curvature_derivative, curvature_profile, eval_path, reverse_profile, CurvatureProfile,
    CurvatureSample, EPS_SPEED,
};
pub use waypoints::{densify_waypoints, discrete_curvature, segment_waypoints, WaypointSet};
