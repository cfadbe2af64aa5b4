//! Three-element reflectance bar (ITR20001 module) mounted ahead of the axle.

use serde::{Deserialize, Serialize};

use crate::kinematics::Pose;
use crate::track::{Point2, Track};

/// How the physical left/right elements reach the firmware's `L_S`/`R_S`
/// inputs.
///
/// The original pin table defines `L_S` on A2 with the comment "Right
/// Sensor" and `R_S` on A0 with "Left Sensor". With that wiring the
/// firmware's `turnRight()` (right wheels forward, left wheels reversed)
/// rotates the chassis toward a line seen by the physical right element,
/// which is what keeps the robot on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideWiring {
    /// `L_S` reads the physical right element, `R_S` the physical left one.
    #[default]
    Crossed,
    /// `L_S` reads the physical left element.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorGeometry {
    /// Distance of the bar ahead of the axle midpoint (m).
    pub forward_offset: f64,
    /// Offset of the outer elements from the middle one (m).
    pub lateral_spacing: f64,
    /// Reflectance below which an element reports dark.
    pub threshold: f64,
    pub wiring: SideWiring,
}

impl Default for SensorGeometry {
    fn default() -> Self {
        Self {
            forward_offset: 0.06,
            lateral_spacing: 0.013,
            threshold: 0.5,
            wiring: SideWiring::Crossed,
        }
    }
}

/// Digital levels as the firmware sees them on `L_S`, `M_S`, `R_S`:
/// `true` = dark tape, `false` = light floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SensorReading {
    pub left: bool,
    pub middle: bool,
    pub right: bool,
}

impl SensorReading {
    pub const fn new(left: bool, middle: bool, right: bool) -> Self {
        Self {
            left,
            middle,
            right,
        }
    }

    /// From 0/1 bits in (L, M, R) order.
    pub const fn from_bits(l: u8, m: u8, r: u8) -> Self {
        Self::new(l != 0, m != 0, r != 0)
    }

    pub const fn bits(&self) -> [u8; 3] {
        [self.left as u8, self.middle as u8, self.right as u8]
    }

    /// All eight patterns in binary order (L is the high bit).
    pub fn all() -> impl Iterator<Item = SensorReading> {
        (0u8..8).map(|i| Self::from_bits(i >> 2 & 1, i >> 1 & 1, i & 1))
    }
}

/// World positions of the (physical left, middle, physical right) elements.
/// Left is +90 degrees counterclockwise from the heading.
pub fn sensor_positions(pose: &Pose, geom: &SensorGeometry) -> (Point2, Point2, Point2) {
    let (s, c) = pose.heading.sin_cos();
    let mid = Point2::new(pose.x + geom.forward_offset * c, pose.y + geom.forward_offset * s);
    let (lx, ly) = (-s * geom.lateral_spacing, c * geom.lateral_spacing);
    (
        Point2::new(mid.x + lx, mid.y + ly),
        mid,
        Point2::new(mid.x - lx, mid.y - ly),
    )
}

pub fn read_sensors(track: &Track, pose: &Pose, geom: &SensorGeometry) -> SensorReading {
    let (phys_left, mid, phys_right) = sensor_positions(pose, geom);
    let dark = |p: Point2| track.sample_reflectance(p) < geom.threshold;
    let (l, m, r) = (dark(phys_left), dark(mid), dark(phys_right));
    match geom.wiring {
        SideWiring::Direct => SensorReading::new(l, m, r),
        SideWiring::Crossed => SensorReading::new(r, m, l),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::TrackCanvas;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Point2, x: f64, y: f64) -> bool {
        (a.x - x).abs() < 1e-12 && (a.y - y).abs() < 1e-12
    }

    #[test]
    fn positions_axis_aligned() {
        let g = SensorGeometry::default();
        let (l, m, r) = sensor_positions(&Pose::new(0.0, 0.0, 0.0), &g);
        assert!(close(l, 0.06, 0.013));
        assert!(close(m, 0.06, 0.0));
        assert!(close(r, 0.06, -0.013));
    }

    #[test]
    fn positions_rotated() {
        let g = SensorGeometry::default();
        let (l, m, r) = sensor_positions(&Pose::new(0.0, 0.0, FRAC_PI_2), &g);
        assert!(close(l, -0.013, 0.06));
        assert!(close(m, 0.0, 0.06));
        assert!(close(r, 0.013, 0.06));
        let (_, m, _) = sensor_positions(&Pose::new(1.0, 2.0, PI), &g);
        assert!(close(m, 0.94, 2.0));
    }

    fn straight_tape() -> Track {
        // 18 mm tape centered on y = 0.05 at 1 mm cells
        let mut c = TrackCanvas::new(0.3, 0.1, 1000.0);
        c.stroke_segment(Point2::new(0.0, 0.05), Point2::new(0.3, 0.05), 0.018);
        c.finish()
    }

    #[test]
    fn centered_on_tape_reads_middle_only() {
        let t = straight_tape();
        let pose = Pose::new(0.1, 0.05, 0.0);
        // outer elements sit 13 mm off-center, beyond the 9 mm half-width
        let (l, m, r) = sensor_positions(&pose, &SensorGeometry::default());
        assert!((l.y - 0.05).abs() > 0.009 && (r.y - 0.05).abs() > 0.009);
        assert!((m.y - 0.05).abs() < 0.009);
        assert_eq!(
            read_sensors(&t, &pose, &SensorGeometry::default()),
            SensorReading::from_bits(0, 1, 0)
        );
    }

    #[test]
    fn all_white_and_all_black() {
        let white = TrackCanvas::new(0.2, 0.2, 1000.0).finish();
        let g = SensorGeometry::default();
        assert_eq!(read_sensors(&white, &Pose::new(0.1, 0.1, 0.3), &g), SensorReading::default());

        let mut c = TrackCanvas::new(0.3, 0.2, 1000.0);
        c.fill_rect(0.15, 0.0, 0.18, 0.2); // 30 mm crossbar
        let bar = c.finish();
        let (l, m, r) = sensor_positions(&Pose::new(0.105, 0.1, 0.0), &g);
        for p in [l, m, r] {
            assert_eq!(bar.sample_reflectance(p), bar.dark_value());
        }
        assert_eq!(
            read_sensors(&bar, &Pose::new(0.105, 0.1, 0.0), &g),
            SensorReading::from_bits(1, 1, 1)
        );
    }

    #[test]
    fn wiring_swaps_outer_bits() {
        // tape only under the physical right element
        let mut c = TrackCanvas::new(0.2, 0.2, 1000.0);
        c.fill_rect(0.0, 0.08, 0.2, 0.09);
        let t = c.finish();
        let pose = Pose::new(0.04, 0.0985, 0.0); // right element at y = 0.0855
        let crossed = read_sensors(&t, &pose, &SensorGeometry::default());
        assert_eq!(crossed, SensorReading::from_bits(1, 0, 0));
        let direct = SensorGeometry {
            wiring: SideWiring::Direct,
            ..Default::default()
        };
        assert_eq!(read_sensors(&t, &pose, &direct), SensorReading::from_bits(0, 0, 1));
    }

    fn random_track(bits: &[bool], n: usize) -> Track {
        Track::from_fn(n, n, 100.0, |c, r| bits[r * n + c]).unwrap()
    }

    /// Rotates the grid by 90 degrees counterclockwise about the origin,
    /// shifted back into the first quadrant.
    fn rotate_track(t: &Track) -> Track {
        let n = t.width_cells();
        Track::from_fn(n, n, t.cells_per_meter(), |c, r| {
            // new (c, r) came from old (r, n-1-c)
            t.cell(r, n - 1 - c).unwrap() < 0.5
        })
        .unwrap()
    }

    proptest! {
        #[test]
        fn rigid_rotation_invariance(
            bits in proptest::collection::vec(any::<bool>(), 20 * 20),
            ix in 2usize..18, iy in 2usize..18,
            quarter in 0i32..4,
        ) {
            let n = 20;
            let t = random_track(&bits, n);
            let side = n as f64 / t.cells_per_meter();
            // cell-centered pose and short geometry keep sample points off cell boundaries
            let geom = SensorGeometry { forward_offset: 0.03, lateral_spacing: 0.02, ..Default::default() };
            let pose = Pose::new((ix as f64 + 0.5) / 100.0, (iy as f64 + 0.5) / 100.0, quarter as f64 * FRAC_PI_2);
            let rot_t = rotate_track(&t);
            // (x, y) -> (side - y, x)
            let rot_pose = Pose::new(side - pose.y, pose.x, pose.heading + FRAC_PI_2);
            prop_assert_eq!(read_sensors(&t, &pose, &geom), read_sensors(&rot_t, &rot_pose, &geom));
        }

        #[test]
        fn darkening_is_monotone(
            bits in proptest::collection::vec(any::<bool>(), 16 * 16),
            flip in 0usize..256,
            x in 0.0f64..0.16, y in 0.0f64..0.16, h in -3.2f64..3.2,
        ) {
            let t = random_track(&bits, 16);
            let mut darker = bits.clone();
            darker[flip] = true;
            let t2 = random_track(&darker, 16);
            let geom = SensorGeometry::default();
            let pose = Pose::new(x, y, h);
            let a = read_sensors(&t, &pose, &geom);
            let b = read_sensors(&t2, &pose, &geom);
            prop_assert!(!a.left || b.left);
            prop_assert!(!a.middle || b.middle);
            prop_assert!(!a.right || b.right);
        }
    }
}
