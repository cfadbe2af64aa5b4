//! Differential-drive pose integration.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Yaw rates below this are integrated as straight lines.
pub const STRAIGHT_LINE_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians, counterclockwise from +x, kept in (-pi, pi].
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChassisParams {
    pub wheel_radius: f64,
    /// Lateral distance between the left and right wheel pairs.
    pub track_width: f64,
}

impl Default for ChassisParams {
    fn default() -> Self {
        Self {
            wheel_radius: 0.0335,
            track_width: 0.15,
        }
    }
}

impl ChassisParams {
    /// Body forward speed and yaw rate for the given wheel-side angular velocities.
    pub fn body_twist(&self, omega_left: f64, omega_right: f64) -> (f64, f64) {
        let v = self.wheel_radius * (omega_left + omega_right) / 2.0;
        let w = self.wheel_radius * (omega_right - omega_left) / self.track_width;
        (v, w)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let wrapped = (a + PI).rem_euclid(TAU) - PI;
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

/// Advances `pose` by `dt` seconds of constant wheel speeds. The update is
/// the exact unicycle solution, so constant inputs compose across substeps.
pub fn step_pose(
    pose: Pose,
    omega_left: f64,
    omega_right: f64,
    chassis: &ChassisParams,
    dt: f64,
) -> Pose {
    let (v, w) = chassis.body_twist(omega_left, omega_right);
    let h = pose.heading;
    if w.abs() < STRAIGHT_LINE_CUTOFF {
        return Pose {
            x: pose.x + v * h.cos() * dt,
            y: pose.y + v * h.sin() * dt,
            heading: pose.heading,
        };
    }
    // (v/w)(sin(h+w dt) - sin h) rewritten as a chord along the mid-heading;
    // identical in exact arithmetic, but free of the v/w blow-up near w = 0.
    let half = 0.5 * w * dt;
    let chord = v * dt * (half.sin() / half);
    let mid = h + half;
    Pose {
        x: pose.x + chord * mid.cos(),
        y: pose.y + chord * mid.sin(),
        heading: normalize_angle(h + w * dt),
    }
}
