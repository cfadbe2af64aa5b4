//! Writes the course tracks and scenario files under `scenarios/`.
//!
//! Usage: `cargo run -p tapebot-core --example make_fixtures [-- <dir>]`

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};
use tapebot::courses::{self, Course};
use tapebot::Track;

/// Fixture tracks are stored at 2 mm per cell.
const STRIDE: usize = 2;

fn coarsen(t: &Track) -> Track {
    let (w, h) = (t.width_cells() / STRIDE, t.height_cells() / STRIDE);
    let dark = t.dark_value();
    Track::from_fn(w, h, t.cells_per_meter() / STRIDE as f64, |c, r| {
        t.cell(c * STRIDE, r * STRIDE) == Some(dark)
    })
    .expect("coarsened grid is valid")
}

fn pose(c: &Course) -> Value {
    json!({ "x": c.start.x, "y": c.start.y, "heading_deg": c.start.heading.to_degrees() })
}

fn main() -> std::io::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios"));
    fs::create_dir_all(&dir)?;

    let straight = courses::straight(2.0);
    let long = courses::straight(4.0);
    let looped = courses::rounded_loop(0.6, 0.4, 0.3);
    let delivery = courses::delivery_line(1.0, 0.15, 0.5);
    let white = courses::blank(1.0, 1.0);
    for (name, c) in [
        ("straight", &straight),
        ("long_straight", &long),
        ("loop", &looped),
        ("delivery", &delivery),
        ("blank", &white),
    ] {
        fs::write(dir.join(format!("{name}.track")), coarsen(&c.track).to_text())?;
    }

    let scenarios = [
        (
            "straight",
            json!({
                "track": "straight.track",
                "initial_pose": pose(&straight),
                "max_time": 7.5,
                "assertions": [
                    { "kind": "on_line_fraction", "min_fraction": 0.95, "start_t": 0.0, "end_t": 7.5 },
                    { "kind": "pose_in_region", "t": 7.5, "x_min": 1.8, "x_max": 2.1, "y_min": 0.08, "y_max": 0.12 }
                ]
            }),
        ),
        (
            "loop",
            json!({
                "track": "loop.track",
                "initial_pose": pose(&looped),
                "max_time": 30.0,
                "assertions": [
                    { "kind": "on_line_fraction", "min_fraction": 0.85, "start_t": 0.0, "end_t": 30.0 },
                    { "kind": "delivered_count", "n": 0 }
                ]
            }),
        ),
        (
            "delivery",
            json!({
                "track": "delivery.track",
                "initial_pose": pose(&delivery),
                "max_time": 10.0,
                "control": { "one_shot_delivery": true },
                "assertions": [
                    { "kind": "delivered_count", "n": 1 },
                    { "kind": "led_blink_count", "n": 5 },
                    { "kind": "pose_in_region", "t": 10.0, "x_min": 1.4, "x_max": 1.8, "y_min": 0.05, "y_max": 0.15 }
                ]
            }),
        ),
        (
            "delivery_repeat",
            json!({
                "track": "delivery.track",
                "initial_pose": pose(&delivery),
                "max_time": 10.0,
                "control": { "one_shot_delivery": false },
                "assertions": [
                    { "kind": "delivered_count", "n": 2, "at_least": true },
                    { "kind": "led_blink_count", "n": 5 }
                ]
            }),
        ),
        (
            "remote",
            json!({
                "track": "long_straight.track",
                "initial_pose": pose(&long),
                "max_time": 8.0,
                "ir_events": [
                    { "time": 1.0, "button": "Button2" },
                    { "time": 4.0, "button": "Button1" }
                ],
                "assertions": [
                    { "kind": "pose_in_region", "t": 3.9, "x_min": 0.2, "x_max": 0.4, "y_min": 0.05, "y_max": 0.15 },
                    { "kind": "on_line_fraction", "min_fraction": 0.9, "start_t": 4.0, "end_t": 8.0 }
                ]
            }),
        ),
        (
            "all_white",
            json!({
                "track": "blank.track",
                "initial_pose": pose(&white),
                "max_time": 2.0,
                "assertions": [
                    { "kind": "stopped_by", "t": 0.0 },
                    { "kind": "pose_in_region", "t": 2.0, "x_min": 0.4999, "x_max": 0.5001, "y_min": 0.4999, "y_max": 0.5001 }
                ]
            }),
        ),
    ];
    for (name, doc) in scenarios {
        let mut text = serde_json::to_string_pretty(&doc).expect("json");
        text.push('\n');
        fs::write(dir.join(format!("{name}.json")), text)?;
    }
    println!("wrote fixtures to {}", dir.display());
    Ok(())
}
