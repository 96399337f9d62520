use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// Which way the lane change goes. `Right` mirrors every y coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaneSide {
    #[default]
    Left,
    Right,
}

/// Pylon course for the forward/reverse S maneuver.
///
/// The vehicle starts at `start_pose`, changes lane over `lane_change_length`
/// metres centred on the course, and stops at `end_pose`; the reverse run
/// starts from `end_pose` with the opposite heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseGeometry {
    pub start_pose: Pose,
    pub end_pose: Pose,
    pub pylons: Vec<(f64, f64)>,
    pub side: LaneSide,
    pub lane_change_length: f64,
    /// Explicit interpolation anchors replacing the generated lane change.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors: Option<Vec<(f64, f64)>>,
}

const HALF_WIDTH: f64 = 1.3716;
const EXTENT: f64 = 15.2386;

impl Default for CourseGeometry {
    fn default() -> Self {
        Self::standard(LaneSide::Left)
    }
}

impl CourseGeometry {
    /// The standard course: 15.2386 m long with a 1.3716 m lateral offset.
    pub fn standard(side: LaneSide) -> Self {
        let course = Self {
            start_pose: Pose { x: 0.0, y: 0.0, heading: 0.0 },
            end_pose: Pose {
                x: EXTENT,
                y: HALF_WIDTH,
                heading: std::f64::consts::PI,
            },
            pylons: vec![
                (0.0, -HALF_WIDTH),
                (0.0, HALF_WIDTH),
                (6.096, -HALF_WIDTH),
                (6.096, HALF_WIDTH),
                (12.192, 0.0),
            ],
            side: LaneSide::Left,
            lane_change_length: 6.4,
            anchors: None,
        };
        match side {
            LaneSide::Left => course,
            LaneSide::Right => course.mirrored(),
        }
    }

    /// Swaps the lane-change side by negating every y coordinate and heading.
    pub fn mirrored(&self) -> Self {
        let flip = |p: Pose| Pose {
            x: p.x,
            y: -p.y,
            heading: if p.heading == 0.0 { 0.0 } else { -p.heading },
        };
        Self {
            start_pose: flip(self.start_pose),
            end_pose: flip(self.end_pose),
            pylons: self.pylons.iter().map(|&(x, y)| (x, -y)).collect(),
            side: match self.side {
                LaneSide::Left => LaneSide::Right,
                LaneSide::Right => LaneSide::Left,
            },
            lane_change_length: self.lane_change_length,
            anchors: self.anchors.as_ref().map(|a| a.iter().map(|&(x, y)| (x, -y)).collect()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = &self.anchors {
            if a.len() < 3 {
                return invalid("need at least 3 anchors");
            }
            if a.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                return invalid("anchors must be finite");
            }
            if a.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return invalid("anchor x coordinates must be strictly increasing");
            }
            return Ok(());
        }
        if self.pylons.is_empty() {
            return invalid("course needs at least one pylon");
        }
        let dx = self.end_pose.x - self.start_pose.x;
        if !(dx > 0.0) {
            return invalid("course end must lie ahead of the start");
        }
        if !(self.lane_change_length > 0.0 && self.lane_change_length < dx) {
            return invalid("lane change length must be positive and shorter than the course");
        }
        let turn = (self.end_pose.heading - self.start_pose.heading).abs();
        if (turn - std::f64::consts::PI).abs() > 1e-9 {
            return invalid("end heading must be opposite to the start heading");
        }
        Ok(())
    }

    /// Interpolation anchors: the explicit list if given, otherwise three on each straight and a septic smoothstep
    /// lane change sampled at fourteen equal intervals.
    pub fn anchors(&self) -> Vec<(f64, f64)> {
        if let Some(a) = &self.anchors {
            return a.clone();
        }
        let (x0, y0) = (self.start_pose.x, self.start_pose.y);
        let (xe, ye) = (self.end_pose.x, self.end_pose.y);
        let len = self.lane_change_length;
        let xa = x0 + (xe - x0 - len) / 2.0;
        let xb = xa + len;
        let h = ye - y0;
        let mut pts = vec![(x0, y0), ((x0 + xa) / 2.0, y0), (xa, y0)];
        const STEPS: usize = 14;
        for i in 1..STEPS {
            let u = i as f64 / STEPS as f64;
            pts.push((xa + len * u, y0 + h * smoothstep7(u)));
        }
        pts.extend([(xb, ye), ((xb + xe) / 2.0, ye), (xe, ye)]);
        pts
    }
}

fn smoothstep7(u: f64) -> f64 {
    let u4 = u.powi(4);
    u4 * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u * u * u)
}
