//! Ready-made desk courses at 1 mm resolution.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::kinematics::Pose;
use crate::track::{Point2, Track, TrackCanvas};

pub const TAPE_WIDTH: f64 = 0.018;
pub const CELLS_PER_METER: f64 = 1000.0;

/// Margin of bare floor around each course.
const MARGIN: f64 = 0.1;

/// A course together with a start pose on it.
#[derive(Debug, Clone)]
pub struct Course {
    pub track: Track,
    pub start: Pose,
}

/// Straight tape of `length` along +x. The robot starts with its axle at
/// the tape's first end, centered and aligned.
pub fn straight(length: f64) -> Course {
    let y = MARGIN;
    let mut c = TrackCanvas::new(length + MARGIN, 2.0 * MARGIN, CELLS_PER_METER);
    c.stroke_segment(Point2::new(0.0, y), Point2::new(length, y), TAPE_WIDTH);
    Course {
        track: c.finish(),
        start: Pose::new(0.0, y, 0.0),
    }
}

/// Closed rounded rectangle driven counterclockwise: straights of
/// `straight_x` and `straight_y` joined by four 90 degree arcs of `radius`.
/// The start pose sits mid-way along the bottom straight.
pub fn rounded_loop(straight_x: f64, straight_y: f64, radius: f64) -> Course {
    let (w, h) = (straight_x + 2.0 * radius, straight_y + 2.0 * radius);
    let (x0, y0) = (MARGIN, MARGIN);
    let mut c = TrackCanvas::new(w + 2.0 * MARGIN, h + 2.0 * MARGIN, CELLS_PER_METER);
    let (xl, xr) = (x0 + radius, x0 + radius + straight_x);
    let (yb, yt) = (y0 + radius, y0 + radius + straight_y);
    c.stroke_segment(Point2::new(xl, y0), Point2::new(xr, y0), TAPE_WIDTH)
        .stroke_segment(Point2::new(x0 + w, yb), Point2::new(x0 + w, yt), TAPE_WIDTH)
        .stroke_segment(Point2::new(xr, y0 + h), Point2::new(xl, y0 + h), TAPE_WIDTH)
        .stroke_segment(Point2::new(x0, yt), Point2::new(x0, yb), TAPE_WIDTH)
        .stroke_arc(Point2::new(xr, yb), radius, -FRAC_PI_2, FRAC_PI_2, TAPE_WIDTH)
        .stroke_arc(Point2::new(xr, yt), radius, 0.0, FRAC_PI_2, TAPE_WIDTH)
        .stroke_arc(Point2::new(xl, yt), radius, FRAC_PI_2, FRAC_PI_2, TAPE_WIDTH)
        .stroke_arc(Point2::new(xl, yb), radius, PI, FRAC_PI_2, TAPE_WIDTH);
    Course {
        track: c.finish(),
        start: Pose::new(0.5 * (xl + xr), y0, 0.0),
    }
}

/// Straight tape with an all-black crossbar of `bar_depth` (along travel)
/// starting `bar_at` from the tape start. The tape continues for `run_out`
/// past the bar.
pub fn delivery_line(bar_at: f64, bar_depth: f64, run_out: f64) -> Course {
    let y = MARGIN;
    let length = bar_at + bar_depth + run_out;
    let mut c = TrackCanvas::new(length + MARGIN, 2.0 * MARGIN, CELLS_PER_METER);
    c.stroke_segment(Point2::new(0.0, y), Point2::new(length, y), TAPE_WIDTH)
        .fill_rect(bar_at, y - 0.06, bar_at + bar_depth, y + 0.06);
    Course {
        track: c.finish(),
        start: Pose::new(0.0, y, 0.0),
    }
}

/// Bare floor only.
pub fn blank(width: f64, height: f64) -> Course {
    Course {
        track: TrackCanvas::new(width, height, CELLS_PER_METER).finish(),
        start: Pose::new(width / 2.0, height / 2.0, 0.0),
    }
}
