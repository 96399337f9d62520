//! Path planning and steering control for a low-speed forward/reverse
//! lane-change maneuver.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`path`]: densify course anchors, segment them, and fit a piecewise
//!    polynomial with derivative continuity at the joints.
//! 2. [`speed`]: a curvature- and acceleration-limited speed schedule.
//! 3. [`vehicle`]: the speed-dependent linear path-tracking model and its
//!    steering-to-error transfer function.
//! 4. [`control`]: disturbance observer synthesis and a speed-scheduled PID
//!    gain schedule chosen from a pole-region admissible set.
//! 5. [`sim`]: closed-loop simulation and tracking metrics.

use serde::{Deserialize, Serialize};

pub mod control;
pub mod error;
pub mod makima;
pub mod path;
pub mod pipeline;
pub mod poly;
pub mod sim;
pub mod speed;
pub mod vehicle;
pub mod tf;

pub use error::{Error, Result};
pub use tf::RationalTF;

/// Travel direction along the planned path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
