//! Closed-loop simulation and tracking metrics.

mod engine;
mod metrics;
mod scenario;

pub use engine::{simulate, PoseSample, Trajectory, TrajectorySample};
pub use metrics::{compare, compute_metrics, Metrics, Report, ReportRow};
pub use scenario::{ControllerKind, NoiseSpec, Scenario, STEER_LIMIT};
