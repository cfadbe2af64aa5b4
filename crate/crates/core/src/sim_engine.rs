//! Fixed-timestep world: physics at `physics_dt`, the controller at every
//! `control_period` boundary, with the last command latched in between.

use std::collections::VecDeque;
use std::io::{self, Write};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuators::{
    channel_mode, mean_omega_over_step, motor_target, step_motor, step_servo, ChannelMode,
    MotorParams, ServoState,
};
use crate::controller::{
    command_to_bridge_inputs, controller_init, controller_step, BusyPhase, ControlConfig,
};
use crate::ir_codec::{
    button_code, decode_nec, encode_nec, encode_nec_repeat, Button, DecodeError, IrCode,
    NecFrame, NecTiming, PulseTrain,
};
use crate::kinematics::{step_pose, ChassisParams, Pose};
use crate::sensors::{read_sensors, SensorGeometry};
use crate::track::Track;

/// Wheel speed below which a wheel counts as stopped (rad/s).
pub const STOPPED_OMEGA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum AssertionError {
    #[error("malformed window: start {start} s is not before end {end} s")]
    MalformedWindow { start: f64, end: f64 },
    #[error("trace is empty")]
    EmptyTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IrSignal {
    Button(Button),
    /// Held-button repeat frame.
    Repeat,
    Pulses(PulseTrain),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrEvent {
    pub time: Duration,
    pub signal: IrSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Assertion {
    /// Completed delivery sequences; exactly `n`, or at least `n`.
    DeliveredCount {
        n: usize,
        #[serde(default)]
        at_least: bool,
    },
    /// Share of control boundaries in the window with the middle sensor dark.
    OnLineFraction {
        min_fraction: f64,
        start_t: f64,
        end_t: f64,
    },
    /// Both wheels below [`STOPPED_OMEGA`] from `t` onward.
    StoppedBy { t: f64 },
    PoseInRegion {
        t: f64,
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    /// Off-to-on LED transitions in every completed delivery.
    LedBlinkCount { n: usize },
}

impl Assertion {
    fn times(&self) -> Vec<f64> {
        match *self {
            Assertion::OnLineFraction { start_t, end_t, .. } => vec![start_t, end_t],
            Assertion::StoppedBy { t } | Assertion::PoseInRegion { t, .. } => vec![t],
            Assertion::DeliveredCount { .. } | Assertion::LedBlinkCount { .. } => vec![],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub track: Arc<Track>,
    pub initial_pose: Pose,
    pub chassis: ChassisParams,
    pub sensor_geometry: SensorGeometry,
    pub motor_params: MotorParams,
    pub control: ControlConfig,
    pub nec_timing: NecTiming,
    pub servo_slew_rate: f64,
    pub ir_events: Vec<IrEvent>,
    pub physics_dt: Duration,
    pub control_period: Duration,
    pub max_time: Duration,
    pub assertions: Vec<Assertion>,
}

impl Scenario {
    /// Scenario with default parameters and no events or assertions.
    pub fn new(track: impl Into<Arc<Track>>, initial_pose: Pose, max_time: Duration) -> Self {
        Self {
            track: track.into(),
            initial_pose,
            chassis: ChassisParams::default(),
            sensor_geometry: SensorGeometry::default(),
            motor_params: MotorParams::default(),
            control: ControlConfig::default(),
            nec_timing: NecTiming::default(),
            servo_slew_rate: ServoState::DEFAULT_SLEW_RATE,
            ir_events: Vec::new(),
            physics_dt: Duration::from_millis(1),
            control_period: Duration::from_millis(10),
            max_time,
            assertions: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.physics_dt.is_zero() {
            return bad("physics_dt must be positive".into());
        }
        if self.control_period < self.physics_dt
            || !self.control_period.as_nanos().is_multiple_of(self.physics_dt.as_nanos())
        {
            return bad("control_period must be a whole multiple of physics_dt".into());
        }
        let positive = [
            ("chassis.wheel_radius", self.chassis.wheel_radius),
            ("chassis.track_width", self.chassis.track_width),
            ("sensor_geometry.lateral_spacing", self.sensor_geometry.lateral_spacing),
            ("motor_params.omega_max", self.motor_params.omega_max),
            ("motor_params.tau_drive", self.motor_params.tau_drive),
            ("motor_params.tau_coast", self.motor_params.tau_coast),
            ("motor_params.tau_brake", self.motor_params.tau_brake),
            ("servo_slew_rate", self.servo_slew_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let th = self.sensor_geometry.threshold;
        if !(th > 0.0 && th < 1.0) {
            return bad(format!("sensor_geometry.threshold must lie in (0, 1), got {th}"));
        }
        if !self.sensor_geometry.forward_offset.is_finite() {
            return bad("sensor_geometry.forward_offset must be finite".into());
        }
        let p = self.initial_pose;
        if !(p.x.is_finite() && p.y.is_finite() && p.heading.is_finite()) {
            return bad("initial_pose must be finite".into());
        }
        let tol = self.nec_timing.tolerance_fraction;
        if !(tol > 0.0 && tol < 0.5) {
            return bad(format!("nec_timing.tolerance_fraction must lie in (0, 0.5), got {tol}"));
        }
        self.control.validate().map_err(ScenarioError::Invalid)?;
        if self.ir_events.windows(2).any(|w| w[0].time > w[1].time) {
            return bad("ir_events must be sorted by time".into());
        }
        let max_t = self.max_time.as_secs_f64();
        for a in &self.assertions {
            if let Assertion::OnLineFraction { start_t, end_t, .. } = *a {
                if start_t >= end_t {
                    return bad(AssertionError::MalformedWindow { start: start_t, end: end_t }.to_string());
                }
            }
            if let Some(t) = a.times().into_iter().find(|t| !(0.0..=max_t).contains(t)) {
                return bad(format!("assertion time {t} s outside [0, {max_t}]"));
            }
        }
        Ok(())
    }
}

/// One sample per control boundary; field order is the trace file layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    /// (L, M, R) bits as seen by the controller.
    pub sensors: [u8; 3],
    pub duty_left: u8,
    pub duty_right: u8,
    pub mode_left: ChannelMode,
    pub mode_right: ChannelMode,
    pub omega_left: f64,
    pub omega_right: f64,
    pub master_enable: u8,
    pub led: u8,
    pub servo_angle: f64,
    /// Code decoded at this boundary, `0x`-prefixed uppercase hex.
    pub ir_decoded: Option<String>,
}

pub const CSV_HEADER: [&str; 15] = [
    "t",
    "x",
    "y",
    "heading",
    "sensors",
    "duty_left",
    "duty_right",
    "mode_left",
    "mode_right",
    "omega_left",
    "omega_right",
    "master_enable",
    "led",
    "servo_angle",
    "ir_decoded",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryWindow {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IrOutcome {
    Decoded(IrCode),
    Repeat,
    Failed(DecodeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrLogEntry {
    pub t: f64,
    pub outcome: IrOutcome,
    /// Address/command complement bytes did not check out.
    pub checksum_warning: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionOutcome {
    pub assertion: Assertion,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trace: Vec<TraceRecord>,
    pub assertion_outcomes: Vec<AssertionOutcome>,
    /// Completion time of each delivery sequence.
    pub deliveries: Vec<f64>,
    pub delivery_windows: Vec<DeliveryWindow>,
    pub ir_log: Vec<IrLogEntry>,
    pub final_pose: Pose,
}

impl SimResult {
    pub fn all_passed(&self) -> bool {
        self.assertion_outcomes.iter().all(|o| o.passed)
    }
}

fn decode_event(signal: &IrSignal, timing: &NecTiming) -> Result<NecFrame, DecodeError> {
    match signal {
        IrSignal::Button(b) => decode_nec(&encode_nec(button_code(*b), timing), timing),
        IrSignal::Repeat => decode_nec(&encode_nec_repeat(timing), timing),
        IrSignal::Pulses(train) => decode_nec(train, timing),
    }
}

pub fn run_scenario(s: &Scenario) -> Result<SimResult, ScenarioError> {
    s.validate()?;
    let dt = s.physics_dt.as_secs_f64();
    let steps_per_control = (s.control_period.as_nanos() / s.physics_dt.as_nanos()) as u64;
    let total_steps = (s.max_time.as_nanos() / s.physics_dt.as_nanos()) as u64;

    let (mut state, mut cmd) = controller_init(&s.control);
    let mut pose = s.initial_pose;
    let (mut omega_left, mut omega_right) = (0.0f64, 0.0f64);
    let mut servo = ServoState {
        slew_rate: s.servo_slew_rate,
        ..ServoState::at(s.control.servo_home_angle)
    };
    let mut pending: VecDeque<&IrEvent> = s.ir_events.iter().collect();

    let mut trace = Vec::with_capacity((total_steps / steps_per_control + 1) as usize);
    let mut windows = Vec::new();
    let mut open_window: Option<f64> = None;
    let mut ir_log = Vec::new();

    for step in 0..=total_steps {
        let now = Duration::from_nanos(s.physics_dt.as_nanos() as u64 * step);
        let t = now.as_secs_f64();

        if step % steps_per_control == 0 {
            let reading = read_sensors(&s.track, &pose, &s.sensor_geometry);

            let mut ir_code = None;
            let mut ir_decoded = None;
            if let Some(event) = pending.pop_front_if(|e| e.time <= now) {
                let (outcome, checksum_warning) = match decode_event(&event.signal, &s.nec_timing) {
                    Ok(NecFrame::Code(code)) => {
                        ir_code = Some(code);
                        ir_decoded = Some(code.to_string());
                        (IrOutcome::Decoded(code), !code.nec_checksum_ok())
                    }
                    Ok(NecFrame::Repeat) => (IrOutcome::Repeat, false),
                    Err(e) => (IrOutcome::Failed(e), false),
                };
                ir_log.push(IrLogEntry {
                    t,
                    outcome,
                    checksum_warning,
                });
            }

            let prev_phase = state.busy_phase();
            let (next, next_cmd) = controller_step(&state, reading, ir_code, now, &s.control);
            match (prev_phase, next.busy_phase()) {
                (None, Some(BusyPhase::DeliverBlink)) => open_window = Some(t),
                (Some(BusyPhase::DeliverHold), None) => {
                    if let Some(start) = open_window.take() {
                        windows.push(DeliveryWindow { start, end: t });
                    }
                }
                _ => {}
            }
            state = next;
            cmd = next_cmd;
            servo.command(cmd.servo_command);

            let (right_in, left_in) = command_to_bridge_inputs(&cmd);
            trace.push(TraceRecord {
                t,
                x: pose.x,
                y: pose.y,
                heading: pose.heading,
                sensors: reading.bits(),
                duty_left: cmd.duty_left,
                duty_right: cmd.duty_right,
                mode_left: channel_mode(left_in),
                mode_right: channel_mode(right_in),
                omega_left,
                omega_right,
                master_enable: u8::from(cmd.master_enable),
                led: u8::from(cmd.delivery_led),
                servo_angle: servo.angle,
                ir_decoded,
            });
        }

        if step == total_steps {
            break;
        }

        let (right_in, left_in) = command_to_bridge_inputs(&cmd);
        let (target_r, tau_r) = motor_target(channel_mode(right_in), cmd.duty_right, &s.motor_params);
        let (target_l, tau_l) = motor_target(channel_mode(left_in), cmd.duty_left, &s.motor_params);
        let mean_r = mean_omega_over_step(omega_right, target_r, tau_r, dt);
        let mean_l = mean_omega_over_step(omega_left, target_l, tau_l, dt);
        omega_right = step_motor(omega_right, target_r, tau_r, dt);
        omega_left = step_motor(omega_left, target_l, tau_l, dt);
        pose = step_pose(pose, mean_l, mean_r, &s.chassis, dt);
        servo = step_servo(servo, dt);
    }

    let assertion_outcomes = s
        .assertions
        .iter()
        .map(|a| {
            let (passed, detail) = match evaluate_assertion(a, &trace, &windows) {
                Ok(v) => v,
                Err(e) => (false, e.to_string()),
            };
            AssertionOutcome {
                assertion: *a,
                passed,
                detail,
            }
        })
        .collect();

    Ok(SimResult {
        trace,
        assertion_outcomes,
        deliveries: windows.iter().map(|w| w.end).collect(),
        delivery_windows: windows,
        ir_log,
        final_pose: pose,
    })
}

pub fn evaluate_assertion(
    a: &Assertion,
    trace: &[TraceRecord],
    deliveries: &[DeliveryWindow],
) -> Result<(bool, String), AssertionError> {
    if trace.is_empty() {
        return Err(AssertionError::EmptyTrace);
    }
    Ok(match *a {
        Assertion::DeliveredCount { n, at_least } => {
            let got = deliveries.len();
            let ok = if at_least { got >= n } else { got == n };
            let rel = if at_least { ">=" } else { "==" };
            (ok, format!("{got} deliveries completed (want {rel} {n})"))
        }
        Assertion::OnLineFraction {
            min_fraction,
            start_t,
            end_t,
        } => {
            if start_t >= end_t {
                return Err(AssertionError::MalformedWindow {
                    start: start_t,
                    end: end_t,
                });
            }
            let (total, on) = trace
                .iter()
                .filter(|r| r.t >= start_t && r.t <= end_t)
                .fold((0usize, 0usize), |(n, on), r| (n + 1, on + usize::from(r.sensors[1] == 1)));
            if total == 0 {
                return Ok((false, format!("no samples in [{start_t}, {end_t}]")));
            }
            let frac = on as f64 / total as f64;
            (
                frac >= min_fraction,
                format!("on-line fraction {frac:.4} over {total} samples (min {min_fraction})"),
            )
        }
        Assertion::StoppedBy { t } => {
            let after: Vec<_> = trace.iter().filter(|r| r.t >= t).collect();
            match after
                .iter()
                .find(|r| r.omega_left.abs() >= STOPPED_OMEGA || r.omega_right.abs() >= STOPPED_OMEGA)
            {
                _ if after.is_empty() => (false, format!("no samples at or after {t} s")),
                Some(r) => (
                    false,
                    format!(
                        "moving at {:.3} s (omega_left {:.4}, omega_right {:.4})",
                        r.t, r.omega_left, r.omega_right
                    ),
                ),
                None => (true, format!("both wheels below {STOPPED_OMEGA} rad/s from {t} s")),
            }
        }
        Assertion::PoseInRegion {
            t,
            x_min,
            x_max,
            y_min,
            y_max,
        } => match trace.iter().find(|r| r.t >= t) {
            None => (false, format!("no sample at or after {t} s")),
            Some(r) => (
                r.x >= x_min && r.x <= x_max && r.y >= y_min && r.y <= y_max,
                format!("pose ({:.4}, {:.4}) at {:.3} s", r.x, r.y, r.t),
            ),
        },
        Assertion::LedBlinkCount { n } => {
            if deliveries.is_empty() {
                return Ok((false, "no completed delivery".into()));
            }
            let counts: Vec<usize> = deliveries
                .iter()
                .map(|w| {
                    trace
                        .windows(2)
                        .filter(|p| p[1].t >= w.start && p[1].t <= w.end && p[0].led == 0 && p[1].led == 1)
                        .count()
                })
                .collect();
            (counts.iter().all(|&c| c == n), format!("blinks per delivery {counts:?} (want {n})"))
        }
    })
}

pub fn write_jsonl<W: Write>(trace: &[TraceRecord], mut out: W) -> io::Result<()> {
    for r in trace {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_csv<W: Write>(trace: &[TraceRecord], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in trace {
        let sensors: String = r.sensors.iter().map(|b| char::from(b'0' + b)).collect();
        w.write_record([
            r.t.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.heading.to_string(),
            sensors,
            r.duty_left.to_string(),
            r.duty_right.to_string(),
            r.mode_left.to_string(),
            r.mode_right.to_string(),
            r.omega_left.to_string(),
            r.omega_right.to_string(),
            r.master_enable.to_string(),
            r.led.to_string(),
            r.servo_angle.to_string(),
            r.ir_decoded.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}
