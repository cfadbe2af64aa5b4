//! JSON scenario files.
//!
//! ```json
//! {
//!   "track": "straight.track",
//!   "initial_pose": { "x": 0.1, "y": 0.05, "heading_deg": 0 },
//!   "max_time": 5.0,
//!   "control": { "speed": 100, "one_shot_delivery": true },
//!   "ir_events": [ { "time": 1.0, "button": "Button2" } ],
//!   "assertions": [ { "kind": "delivered_count", "n": 1 } ]
//! }
//! ```
//!
//! The track path is resolved relative to the scenario file. Times are in
//! seconds. Dotted-key overrides (`control.speed=120`) are applied to the
//! parsed document before it is interpreted, so an override behaves exactly
//! like the equivalent edit to the file.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::actuators::{MotorParams, ServoState};
use crate::controller::{duration_secs, ControlConfig};
use crate::ir_codec::{Button, NecTiming, PulseTrain, PulseTrainError};
use crate::kinematics::{ChassisParams, Pose};
use crate::sensors::SensorGeometry;
use crate::sim_engine::{Assertion, IrEvent, IrSignal, Scenario, ScenarioError};
use crate::track::{load_track, TrackError};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Track { path: PathBuf, source: TrackError },
    #[error("bad override `{0}`: expected dotted.key=value")]
    BadOverride(String),
    #[error("ir event {index}: {source}")]
    Pulses {
        index: usize,
        source: PulseTrainError,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseSpec {
    x: f64,
    y: f64,
    heading_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SignalSpec {
    Button { button: Button },
    Pulses { pulses: Vec<i64> },
    Repeat { repeat: bool },
}

#[derive(Debug, Deserialize)]
struct IrEventSpec {
    time: f64,
    #[serde(flatten)]
    signal: SignalSpec,
}

fn default_physics_dt() -> f64 {
    0.001
}

fn default_control_period() -> f64 {
    0.010
}

fn default_slew() -> f64 {
    ServoState::DEFAULT_SLEW_RATE
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    track: PathBuf,
    initial_pose: PoseSpec,
    max_time: f64,
    assertions: Vec<Assertion>,
    #[serde(default)]
    chassis: ChassisParams,
    #[serde(default)]
    sensor_geometry: SensorGeometry,
    #[serde(default)]
    motor_params: MotorParams,
    #[serde(default)]
    control: ControlConfig,
    #[serde(default)]
    nec_timing: NecTiming,
    #[serde(default = "default_slew")]
    servo_slew_rate: f64,
    #[serde(default)]
    ir_events: Vec<IrEventSpec>,
    #[serde(default = "default_physics_dt")]
    physics_dt: f64,
    #[serde(default = "default_control_period")]
    control_period: f64,
}

/// Splits `key=value`; the value is read as JSON when it parses, else as a string.
pub fn parse_override(raw: &str) -> Result<(String, Value), LoadError> {
    let (key, value) = raw
        .split_once('=')
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| LoadError::BadOverride(raw.to_string()))?;
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.to_string(), value))
}

/// Sets `doc[a][b][c] = value` for key `a.b.c`, creating objects as needed.
/// Numeric segments index into arrays.
pub fn apply_override(doc: &mut Value, key: &str, value: Value) -> Result<(), LoadError> {
    let bad = || LoadError::BadOverride(key.to_string());
    let mut node = doc;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(bad());
        }
        let last = parts.peek().is_none();
        node = match node {
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| bad())?;
                items.get_mut(idx).ok_or_else(bad)?
            }
            Value::Object(map) => map.entry(part).or_insert_with(|| {
                if last {
                    Value::Null
                } else {
                    Value::Object(Default::default())
                }
            }),
            _ => return Err(bad()),
        };
    }
    *node = value;
    Ok(())
}

fn secs(name: &str, v: f64) -> Result<std::time::Duration, ScenarioError> {
    duration_secs::to_duration(v)
        .ok_or_else(|| ScenarioError::Invalid(format!("{name} must be a non-negative time, got {v}")))
}

/// Interprets a scenario document; `base_dir` anchors a relative track path.
pub fn scenario_from_value(doc: Value, base_dir: &Path, origin: &Path) -> Result<Scenario, LoadError> {
    let file: ScenarioFile = serde_json::from_value(doc).map_err(|source| LoadError::Json {
        path: origin.to_path_buf(),
        source,
    })?;

    let track_path = base_dir.join(&file.track);
    let text = fs::read_to_string(&track_path).map_err(|source| LoadError::Io {
        path: track_path.clone(),
        source,
    })?;
    let track = load_track(&text).map_err(|source| LoadError::Track {
        path: track_path,
        source,
    })?;

    let mut ir_events = Vec::with_capacity(file.ir_events.len());
    for (index, e) in file.ir_events.into_iter().enumerate() {
        let signal = match e.signal {
            SignalSpec::Button { button } => IrSignal::Button(button),
            SignalSpec::Repeat { repeat: true } => IrSignal::Repeat,
            SignalSpec::Repeat { repeat: false } => {
                return Err(ScenarioError::Invalid(format!("ir event {index}: `repeat` must be true")).into())
            }
            SignalSpec::Pulses { pulses } => IrSignal::Pulses(
                PulseTrain::from_signed(&pulses).map_err(|source| LoadError::Pulses { index, source })?,
            ),
        };
        ir_events.push(IrEvent {
            time: secs("ir_events.time", e.time)?,
            signal,
        });
    }

    let p = &file.initial_pose;
    let scenario = Scenario {
        track: Arc::new(track),
        initial_pose: Pose::new(p.x, p.y, p.heading_deg.to_radians()),
        chassis: file.chassis,
        sensor_geometry: file.sensor_geometry,
        motor_params: file.motor_params,
        control: file.control,
        nec_timing: file.nec_timing,
        servo_slew_rate: file.servo_slew_rate,
        ir_events,
        physics_dt: secs("physics_dt", file.physics_dt)?,
        control_period: secs("control_period", file.control_period)?,
        max_time: secs("max_time", file.max_time)?,
        assertions: file.assertions,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Reads a scenario file, applies `key=value` overrides, and loads its track.
pub fn load_scenario(path: &Path, overrides: &[String]) -> Result<Scenario, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|source| LoadError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    for raw in overrides {
        let (key, value) = parse_override(raw)?;
        apply_override(&mut doc, &key, value)?;
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    scenario_from_value(doc, base, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_edit_nested_keys() {
        let mut doc = json!({ "control": { "speed": 100 }, "assertions": [ { "n": 1 } ] });
        let (k, v) = parse_override("control.speed=120").unwrap();
        apply_override(&mut doc, &k, v).unwrap();
        let (k, v) = parse_override("control.one_shot_delivery=true").unwrap();
        apply_override(&mut doc, &k, v).unwrap();
        let (k, v) = parse_override("assertions.0.n=3").unwrap();
        apply_override(&mut doc, &k, v).unwrap();
        let (k, v) = parse_override("track=other.track").unwrap();
        apply_override(&mut doc, &k, v).unwrap();
        assert_eq!(
            doc,
            json!({
                "control": { "speed": 120, "one_shot_delivery": true },
                "assertions": [ { "n": 3 } ],
                "track": "other.track"
            })
        );
        assert!(parse_override("nokey").is_err());
        assert!(parse_override("=3").is_err());
        assert!(apply_override(&mut doc, "control.speed.x", json!(1)).is_err());
        assert!(apply_override(&mut doc, "assertions.7.n", json!(1)).is_err());
    }

    #[test]
    fn parses_full_document() {
        let dir = std::env::temp_dir().join(format!("tapebot-scn-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("t.track"), "TRACK v1\ncells_per_meter 100\nsize 3 1\n.#.\n").unwrap();
        let doc = json!({
            "track": "t.track",
            "initial_pose": { "x": 0.0, "y": 0.0, "heading_deg": 90 },
            "max_time": 1.0,
            "control": { "turn_nudge": 0.02 },
            "ir_events": [
                { "time": 0.1, "button": "Button2" },
                { "time": 0.2, "pulses": [9000, -2250, 560] },
                { "time": 0.3, "repeat": true }
            ],
            "assertions": [ { "kind": "stopped_by", "t": 0.5 } ]
        });
        let s = scenario_from_value(doc, &dir, Path::new("inline")).unwrap();
        assert_eq!(s.ir_events.len(), 3);
        assert_eq!(s.ir_events[0].signal, IrSignal::Button(Button::Button2));
        assert!(matches!(s.ir_events[1].signal, IrSignal::Pulses(_)));
        assert_eq!(s.ir_events[2].signal, IrSignal::Repeat);
        assert_eq!(s.control.turn_nudge, std::time::Duration::from_millis(20));
        assert!((s.initial_pose.heading - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(s.assertions, vec![Assertion::StoppedBy { t: 0.5 }]);

        let missing_key = json!({ "track": "t.track", "max_time": 1.0, "assertions": [] });
        assert!(matches!(
            scenario_from_value(missing_key, &dir, Path::new("inline")),
            Err(LoadError::Json { .. })
        ));
        let unknown = json!({
            "track": "t.track",
            "initial_pose": { "x": 0.0, "y": 0.0, "heading_deg": 0 },
            "max_time": 1.0, "assertions": [], "colour": "red"
        });
        assert!(scenario_from_value(unknown, &dir, Path::new("inline")).is_err());
        let _ = fs::remove_dir_all(&dir);
    }
}
