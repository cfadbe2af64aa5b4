//! Python bindings for the tapebot simulator.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use tapebot::actuators::{channel_mode as bridge_mode, HBridgeInputs, Level};
use tapebot::controller::classify as classify_reading;
use tapebot::electrical::{self, DEFAULT_KIT};
use tapebot::ir_codec::{self, Button, IrCode, NecFrame, NecTiming, PulseTrain};
use tapebot::kinematics::{self, ChassisParams};
use tapebot::scenario::{load_scenario, LoadError};
use tapebot::sensors::{read_sensors, SensorGeometry};
use tapebot::sim_engine::{self, write_csv, write_jsonl, SimResult};
use tapebot::track::{load_track, Point2};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Occupancy grid of floor reflectance.
#[pyclass(frozen)]
struct Track {
    inner: Arc<tapebot::Track>,
}

#[pymethods]
impl Track {
    /// Parses a TRACK v1 document.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = load_track(text).map_err(value_err)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    fn sample(&self, x: f64, y: f64) -> f64 {
        self.inner.sample_reflectance(Point2::new(x, y))
    }

    /// (width, height) in meters.
    fn extent(&self) -> (f64, f64) {
        self.inner.extent()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Sensor bits (L, M, R) for a robot at the given pose.
    fn read_sensors(&self, pose: &Pose) -> (u8, u8, u8) {
        let [l, m, r] = read_sensors(&self.inner, &pose.inner, &SensorGeometry::default()).bits();
        (l, m, r)
    }
}

#[pyclass(frozen)]
struct Pose {
    inner: kinematics::Pose,
}

#[pymethods]
impl Pose {
    #[new]
    #[pyo3(signature = (x, y, heading=0.0))]
    fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            inner: kinematics::Pose::new(x, y, heading),
        }
    }

    #[getter]
    fn x(&self) -> f64 {
        self.inner.x
    }

    #[getter]
    fn y(&self) -> f64 {
        self.inner.y
    }

    #[getter]
    fn heading(&self) -> f64 {
        self.inner.heading
    }

    fn __repr__(&self) -> String {
        format!("Pose(x={}, y={}, heading={})", self.inner.x, self.inner.y, self.inner.heading)
    }
}

/// Advances a pose by one step of constant wheel speeds (rad/s).
#[pyfunction]
#[pyo3(signature = (pose, omega_left, omega_right, dt, wheel_radius=0.0335, track_width=0.15))]
fn step_pose(pose: &Pose, omega_left: f64, omega_right: f64, dt: f64, wheel_radius: f64, track_width: f64) -> Pose {
    let chassis = ChassisParams {
        wheel_radius,
        track_width,
    };
    Pose {
        inner: kinematics::step_pose(pose.inner, omega_left, omega_right, &chassis, dt),
    }
}

/// H-bridge channel mode for logic levels given as booleans (True = high).
#[pyfunction]
fn channel_mode(in1: bool, in2: bool, pwm_duty: u8, stby: bool) -> &'static str {
    bridge_mode(HBridgeInputs {
        in1: Level::from(in1),
        in2: Level::from(in2),
        pwm_duty,
        stby: Level::from(stby),
    })
    .as_str()
}

#[pyfunction]
fn classify(left: bool, middle: bool, right: bool) -> String {
    format!("{:?}", classify_reading(tapebot::SensorReading::new(left, middle, right)))
}

/// Signed pulse train (+mark / -space, microseconds) for a 32-bit code.
#[pyfunction]
fn encode_nec(code: u32) -> Vec<i64> {
    ir_codec::encode_nec(IrCode(code), &NecTiming::default()).to_signed()
}

#[pyfunction]
fn encode_nec_repeat() -> Vec<i64> {
    ir_codec::encode_nec_repeat(&NecTiming::default()).to_signed()
}

/// Decoded code, or None for a repeat frame. Raises ValueError otherwise.
#[pyfunction]
fn decode_nec(pulses: Vec<i64>) -> PyResult<Option<u32>> {
    let train = PulseTrain::from_signed(&pulses).map_err(value_err)?;
    match ir_codec::decode_nec(&train, &NecTiming::default()).map_err(value_err)? {
        NecFrame::Code(c) => Ok(Some(c.0)),
        NecFrame::Repeat => Ok(None),
    }
}

#[pyfunction]
fn button_code(name: &str) -> PyResult<u32> {
    let button = match name {
        "Button1" => Button::Button1,
        "Button2" => Button::Button2,
        other => return Err(value_err(format!("unknown button {other:?}"))),
    };
    Ok(ir_codec::button_code(button).0)
}

#[pyfunction]
fn series_resistor(supply: f64, forward: f64, current: f64) -> PyResult<f64> {
    electrical::series_resistor(supply, forward, current).map_err(value_err)
}

#[pyfunction]
fn led_current(supply: f64, forward: f64, resistor: f64) -> PyResult<f64> {
    electrical::led_current(supply, forward, resistor).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (computed, kit=None))]
fn pick_kit_resistor(computed: f64, kit: Option<Vec<f64>>) -> PyResult<f64> {
    electrical::pick_kit_resistor(computed, kit.as_deref().unwrap_or(DEFAULT_KIT)).map_err(value_err)
}

/// Outcome of a scenario run.
#[pyclass(frozen)]
struct SimSummary {
    result: SimResult,
}

#[pymethods]
impl SimSummary {
    /// True when every assertion passed.
    #[getter]
    fn passed(&self) -> bool {
        self.result.all_passed()
    }

    /// Completion time of each delivery (s).
    #[getter]
    fn deliveries(&self) -> Vec<f64> {
        self.result.deliveries.clone()
    }

    #[getter]
    fn final_pose(&self) -> Pose {
        Pose {
            inner: self.result.final_pose,
        }
    }

    /// (assertion as JSON, passed, detail) per assertion.
    #[getter]
    fn assertions(&self) -> PyResult<Vec<(String, bool, String)>> {
        self.result
            .assertion_outcomes
            .iter()
            .map(|o| Ok((serde_json::to_string(&o.assertion).map_err(value_err)?, o.passed, o.detail.clone())))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.result.trace.len()
    }

    fn trace_jsonl(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_jsonl(&self.result.trace, &mut buf).map_err(value_err)?;
        String::from_utf8(buf).map_err(value_err)
    }

    fn trace_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_csv(&self.result.trace, &mut buf).map_err(value_err)?;
        String::from_utf8(buf).map_err(value_err)
    }
}

/// Loads a scenario JSON file, applies `key=value` overrides and runs it.
#[pyfunction]
#[pyo3(signature = (path, overrides=None))]
fn run_scenario_file(py: Python<'_>, path: PathBuf, overrides: Option<Vec<String>>) -> PyResult<SimSummary> {
    let overrides = overrides.unwrap_or_default();
    let scenario = load_scenario(&path, &overrides).map_err(|e| match e {
        LoadError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => value_err(other),
    })?;
    let result = py
        .detach(|| sim_engine::run_scenario(&scenario))
        .map_err(value_err)?;
    Ok(SimSummary { result })
}

#[pymodule]
fn tapebot_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Track>()?;
    m.add_class::<Pose>()?;
    m.add_class::<SimSummary>()?;
    m.add_function(wrap_pyfunction!(step_pose, m)?)?;
    m.add_function(wrap_pyfunction!(channel_mode, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(encode_nec, m)?)?;
    m.add_function(wrap_pyfunction!(encode_nec_repeat, m)?)?;
    m.add_function(wrap_pyfunction!(decode_nec, m)?)?;
    m.add_function(wrap_pyfunction!(button_code, m)?)?;
    m.add_function(wrap_pyfunction!(series_resistor, m)?)?;
    m.add_function(wrap_pyfunction!(led_current, m)?)?;
    m.add_function(wrap_pyfunction!(pick_kit_resistor, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario_file, m)?)?;
    Ok(())
}
