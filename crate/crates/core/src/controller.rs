//! The delivery robot's firmware loop as a non-blocking state machine.
//!
//! Every blocking `delay()` of the original program becomes a busy phase
//! with a deadline. While a phase is pending the controller re-emits its
//! held command and ignores sensors and remote input, just as the
//! microcontroller does while it sleeps.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::actuators::{HBridgeInputs, Level};
use crate::ir_codec::{button_code, Button, IrCode};
use crate::sensors::SensorReading;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    /// Straight-line duty.
    pub speed: u8,
    /// Turning duty.
    pub tspeed: u8,
    #[serde(with = "duration_secs")]
    pub turn_nudge: Duration,
    pub blink_count: u32,
    #[serde(with = "duration_secs")]
    pub blink_on: Duration,
    #[serde(with = "duration_secs")]
    pub blink_off: Duration,
    pub servo_deploy_angle: f64,
    pub servo_home_angle: f64,
    #[serde(with = "duration_secs")]
    pub deploy_hold: Duration,
    /// Latch after the first delivery so a crossbar is then driven over.
    pub one_shot_delivery: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            speed: 100,
            tspeed: 120,
            turn_nudge: Duration::from_millis(10),
            blink_count: 5,
            blink_on: Duration::from_millis(200),
            blink_off: Duration::from_millis(200),
            servo_deploy_angle: 160.0,
            servo_home_angle: 0.0,
            deploy_hold: Duration::from_millis(1000),
            one_shot_delivery: false,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<(), String> {
        let durations = [
            ("turn_nudge", self.turn_nudge),
            ("blink_on", self.blink_on),
            ("blink_off", self.blink_off),
            ("deploy_hold", self.deploy_hold),
        ];
        if let Some((name, _)) = durations.iter().find(|(_, d)| d.is_zero()) {
            return Err(format!("control.{name} must be positive"));
        }
        if self.blink_count == 0 {
            return Err("control.blink_count must be at least 1".into());
        }
        for (name, angle) in [
            ("servo_deploy_angle", self.servo_deploy_angle),
            ("servo_home_angle", self.servo_home_angle),
        ] {
            if !(0.0..=180.0).contains(&angle) {
                return Err(format!("control.{name} must lie in [0, 180], got {angle}"));
            }
        }
        Ok(())
    }

    /// Length of the LED blink phase of a delivery.
    pub fn blink_phase(&self) -> Duration {
        (self.blink_on + self.blink_off) * self.blink_count
    }
}

/// Outcome of the line-tracking decision table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DriveAction {
    Forward,
    TurnRight,
    TurnLeft,
    Deliver,
    StopAllWhite,
    /// No branch fires; the previous actuation persists.
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LastDrive {
    Forward,
    TurnRight,
    TurnLeft,
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BusyPhase {
    TurnNudge,
    DeliverBlink,
    DeliverHold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Busy {
    pub phase: BusyPhase,
    pub deadline: Duration,
    /// Completed LED half-periods in the blink phase.
    pub blink_index: u32,
}

/// Output bundle latched onto the pins each control tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub duty_right: u8,
    pub duty_left: u8,
    /// High = forward.
    pub dir_right: Level,
    pub dir_left: Level,
    /// Bridge STBY line.
    pub master_enable: bool,
    pub delivery_led: bool,
    pub servo_command: f64,
}

/// Pin-level memory of the firmware plus the pending busy phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub master_enable: bool,
    pub delivery_led: bool,
    pub servo_command: f64,
    pub duty_right: u8,
    pub duty_left: u8,
    pub dir_right: Level,
    pub dir_left: Level,
    pub last_drive: LastDrive,
    pub busy: Option<Busy>,
    pub delivered_latch: bool,
}

impl ControllerState {
    pub fn command(&self) -> ActuatorCommand {
        ActuatorCommand {
            duty_right: self.duty_right,
            duty_left: self.duty_left,
            dir_right: self.dir_right,
            dir_left: self.dir_left,
            master_enable: self.master_enable,
            delivery_led: self.delivery_led,
            servo_command: self.servo_command,
        }
    }

    pub fn busy_phase(&self) -> Option<BusyPhase> {
        self.busy.map(|b| b.phase)
    }

    fn drive(&mut self, duty: u8, right: Level, left: Level) {
        self.duty_right = duty;
        self.duty_left = duty;
        self.dir_right = right;
        self.dir_left = left;
    }

    fn forward(&mut self, cfg: &ControlConfig) {
        self.drive(cfg.speed, Level::High, Level::High);
        self.last_drive = LastDrive::Forward;
    }
}

pub fn classify(reading: SensorReading) -> DriveAction {
    match reading.bits() {
        [0, 1, 0] => DriveAction::Forward,
        [0, 0, 1] | [0, 1, 1] => DriveAction::TurnRight,
        [1, 0, 0] | [1, 1, 0] => DriveAction::TurnLeft,
        [1, 1, 1] => DriveAction::Deliver,
        [0, 0, 0] => DriveAction::StopAllWhite,
        _ => DriveAction::Hold,
    }
}

/// Power-on presets: bridge enabled, both phases forward, duties zero,
/// servo at home.
pub fn controller_init(config: &ControlConfig) -> (ControllerState, ActuatorCommand) {
    let state = ControllerState {
        master_enable: true,
        delivery_led: false,
        servo_command: config.servo_home_angle,
        duty_right: 0,
        duty_left: 0,
        dir_right: Level::High,
        dir_left: Level::High,
        last_drive: LastDrive::Stopped,
        busy: None,
        delivered_latch: false,
    };
    let cmd = state.command();
    (state, cmd)
}

/// One pass of the control loop at simulation time `now`.
pub fn controller_step(
    state: &ControllerState,
    reading: SensorReading,
    ir_code: Option<IrCode>,
    now: Duration,
    config: &ControlConfig,
) -> (ControllerState, ActuatorCommand) {
    let mut s = state.clone();

    if let Some(busy) = s.busy {
        if now >= busy.deadline {
            advance_busy(&mut s, busy, config);
        }
        let cmd = s.command();
        return (s, cmd);
    }

    // the loop body re-homes the servo on every pass
    s.servo_command = config.servo_home_angle;

    if let Some(code) = ir_code {
        if code == button_code(Button::Button1) {
            s.delivery_led = false;
            s.master_enable = true;
        } else if code == button_code(Button::Button2) {
            s.delivery_led = true;
            s.master_enable = false;
        }
    }

    match classify(reading) {
        DriveAction::Forward => s.forward(config),
        DriveAction::TurnRight => {
            s.drive(config.tspeed, Level::High, Level::Low);
            s.last_drive = LastDrive::TurnRight;
            s.busy = Some(Busy {
                phase: BusyPhase::TurnNudge,
                deadline: now + config.turn_nudge,
                blink_index: 0,
            });
        }
        DriveAction::TurnLeft => {
            s.drive(config.tspeed, Level::Low, Level::High);
            s.last_drive = LastDrive::TurnLeft;
            s.busy = Some(Busy {
                phase: BusyPhase::TurnNudge,
                deadline: now + config.turn_nudge,
                blink_index: 0,
            });
        }
        DriveAction::Deliver if s.delivered_latch => s.forward(config),
        DriveAction::Deliver => {
            s.master_enable = false;
            s.servo_command = config.servo_home_angle;
            s.delivery_led = true;
            s.last_drive = LastDrive::Stopped;
            s.busy = Some(Busy {
                phase: BusyPhase::DeliverBlink,
                deadline: now + config.blink_on,
                blink_index: 0,
            });
        }
        DriveAction::StopAllWhite => {
            s.duty_right = 0;
            s.duty_left = 0;
            s.last_drive = LastDrive::Stopped;
        }
        DriveAction::Hold => {}
    }

    let cmd = s.command();
    (s, cmd)
}

fn advance_busy(s: &mut ControllerState, busy: Busy, config: &ControlConfig) {
    match busy.phase {
        BusyPhase::TurnNudge => {
            s.forward(config);
            s.busy = None;
        }
        BusyPhase::DeliverBlink => {
            let next = busy.blink_index + 1;
            if next < 2 * config.blink_count {
                let led_on = next.is_multiple_of(2);
                s.delivery_led = led_on;
                let half = if led_on { config.blink_on } else { config.blink_off };
                s.busy = Some(Busy {
                    deadline: busy.deadline + half,
                    blink_index: next,
                    ..busy
                });
            } else {
                s.delivery_led = false;
                s.servo_command = config.servo_deploy_angle;
                s.busy = Some(Busy {
                    phase: BusyPhase::DeliverHold,
                    deadline: busy.deadline + config.deploy_hold,
                    blink_index: 0,
                });
            }
        }
        BusyPhase::DeliverHold => {
            s.master_enable = true;
            s.dir_right = Level::High;
            s.dir_left = Level::High;
            s.last_drive = LastDrive::Forward;
            s.busy = None;
            if config.one_shot_delivery {
                s.delivered_latch = true;
            }
        }
    }
}

/// Pin mapping onto the two bridge channels as (right = A, left = B).
/// Only the phase pin is wired, so IN2 is the complement of IN1.
pub fn command_to_bridge_inputs(cmd: &ActuatorCommand) -> (HBridgeInputs, HBridgeInputs) {
    let channel = |dir: Level, duty: u8| HBridgeInputs {
        in1: dir,
        in2: dir.complement(),
        pwm_duty: duty,
        stby: cmd.master_enable.into(),
    };
    (
        channel(cmd.dir_right, cmd.duty_right),
        channel(cmd.dir_left, cmd.duty_left),
    )
}

/// Serde adapter: durations as (fractional) seconds, rounded to whole
/// microseconds.
pub(crate) mod duration_secs {
    use std::time::Duration;

    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn to_duration(secs: f64) -> Option<Duration> {
        (secs.is_finite() && (0.0..1e9).contains(&secs))
            .then(|| Duration::from_micros((secs * 1e6).round() as u64))
    }

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        to_duration(secs).ok_or_else(|| D::Error::custom(format!("invalid duration {secs} s")))
    }
}
