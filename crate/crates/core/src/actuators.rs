//! TB6612 H-bridge, lumped motor pairs, delivery servo and LEDs.
//!
//! Channel A drives the right-hand motor pair and channel B the left-hand
//! pair; each series-wired pair is treated as one first-order motor.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "L")]
    Low,
    #[serde(rename = "H")]
    High,
}

impl Level {
    pub fn is_high(self) -> bool {
        self == Level::High
    }

    pub fn complement(self) -> Self {
        match self {
            Level::Low => Level::High,
            Level::High => Level::Low,
        }
    }
}

impl From<bool> for Level {
    fn from(high: bool) -> Self {
        if high {
            Level::High
        } else {
            Level::Low
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Low => "L",
            Level::High => "H",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HBridgeInputs {
    pub in1: Level,
    pub in2: Level,
    pub pwm_duty: u8,
    pub stby: Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelMode {
    ShortBrake,
    #[serde(rename = "CCW")]
    Ccw,
    #[serde(rename = "CW")]
    Cw,
    Stop,
    Standby,
}

impl ChannelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelMode::ShortBrake => "ShortBrake",
            ChannelMode::Ccw => "CCW",
            ChannelMode::Cw => "CW",
            ChannelMode::Stop => "Stop",
            ChannelMode::Standby => "Standby",
        }
    }
}

impl fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Output mode of one bridge channel. A nonzero duty counts as PWM high.
pub fn channel_mode(inputs: HBridgeInputs) -> ChannelMode {
    use Level::*;
    if inputs.stby == Low {
        return ChannelMode::Standby;
    }
    let pwm_high = inputs.pwm_duty > 0;
    match (inputs.in1, inputs.in2) {
        (High, High) => ChannelMode::ShortBrake,
        (Low, High) if pwm_high => ChannelMode::Ccw,
        (High, Low) if pwm_high => ChannelMode::Cw,
        (Low, High) | (High, Low) => ChannelMode::ShortBrake,
        (Low, Low) => ChannelMode::Stop,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotorParams {
    /// Wheel angular velocity at duty 255 (rad/s).
    pub omega_max: f64,
    pub tau_drive: f64,
    pub tau_coast: f64,
    pub tau_brake: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        Self {
            omega_max: 20.0,
            tau_drive: 0.05,
            tau_coast: 0.4,
            tau_brake: 0.02,
        }
    }
}

/// Steady-state wheel speed the channel drives toward, and the time
/// constant of the approach. CW is forward rotation.
pub fn motor_target(mode: ChannelMode, duty: u8, params: &MotorParams) -> (f64, f64) {
    let scaled = params.omega_max * f64::from(duty) / 255.0;
    match mode {
        ChannelMode::Cw => (scaled, params.tau_drive),
        ChannelMode::Ccw => (-scaled, params.tau_drive),
        ChannelMode::ShortBrake => (0.0, params.tau_brake),
        ChannelMode::Stop | ChannelMode::Standby => (0.0, params.tau_coast),
    }
}

/// Exact first-order response over `dt`.
pub fn step_motor(omega: f64, target: f64, tau: f64, dt: f64) -> f64 {
    target + (omega - target) * (-dt / tau).exp()
}

/// Time average of the first-order response over `[0, dt]`. Feeding this
/// to the pose integrator makes the travelled distance exact for straight
/// motion.
pub fn mean_omega_over_step(omega: f64, target: f64, tau: f64, dt: f64) -> f64 {
    let x = dt / tau;
    // (1 - e^-x) / x, written with exp_m1 to stay accurate for tiny x
    let frac = if x > 0.0 { -(-x).exp_m1() / x } else { 1.0 };
    target + (omega - target) * frac
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoState {
    /// Current shaft angle (deg).
    pub angle: f64,
    pub commanded: f64,
    /// deg/s
    pub slew_rate: f64,
}

impl ServoState {
    pub const DEFAULT_SLEW_RATE: f64 = 400.0;

    pub fn at(angle: f64) -> Self {
        let angle = angle.clamp(0.0, 180.0);
        Self {
            angle,
            commanded: angle,
            slew_rate: Self::DEFAULT_SLEW_RATE,
        }
    }

    pub fn command(&mut self, angle: f64) {
        self.commanded = angle.clamp(0.0, 180.0);
    }
}

/// Slews toward the commanded angle without overshooting it.
pub fn step_servo(s: ServoState, dt: f64) -> ServoState {
    let max_move = s.slew_rate * dt;
    let delta = (s.commanded - s.angle).clamp(-max_move, max_move);
    let angle = if (s.commanded - s.angle).abs() <= max_move {
        s.commanded
    } else {
        s.angle + delta
    };
    ServoState { angle, ..s }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LedState {
    pub on: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Level::{High as H, Low as L};

    fn inputs(in1: Level, in2: Level, pwm_duty: u8, stby: Level) -> HBridgeInputs {
        HBridgeInputs {
            in1,
            in2,
            pwm_duty,
            stby,
        }
    }

    #[test]
    fn documented_rows() {
        assert_eq!(channel_mode(inputs(L, H, 255, H)), ChannelMode::Ccw);
        assert_eq!(channel_mode(inputs(H, L, 0, H)), ChannelMode::ShortBrake);
        assert_eq!(channel_mode(inputs(H, L, 200, L)), ChannelMode::Standby);
        assert_eq!(channel_mode(inputs(H, L, 1, H)), ChannelMode::Cw);
        assert_eq!(channel_mode(inputs(L, L, 0, H)), ChannelMode::Stop);
    }

    #[test]
    fn targets() {
        let p = MotorParams::default();
        assert_eq!(motor_target(ChannelMode::Cw, 255, &p), (20.0, 0.05));
        let (w, tau) = motor_target(ChannelMode::Cw, 100, &p);
        assert!((w - 20.0 * 100.0 / 255.0).abs() < 1e-12);
        assert!((w - 7.843).abs() < 5e-4);
        assert_eq!(tau, 0.05);
        assert_eq!(motor_target(ChannelMode::Ccw, 255, &p), (-20.0, 0.05));
        assert_eq!(motor_target(ChannelMode::Standby, 255, &p), (0.0, 0.4));
        assert_eq!(motor_target(ChannelMode::Stop, 90, &p), (0.0, 0.4));
        assert_eq!(motor_target(ChannelMode::ShortBrake, 90, &p), (0.0, 0.02));
    }

    #[test]
    fn first_order_response() {
        assert_eq!(step_motor(3.5, 3.5, 0.05, 0.01), 3.5);
        let rise = step_motor(0.0, 10.0, 0.05, 0.05);
        assert!((rise - 10.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((rise - 6.3212).abs() < 1e-4);
        let brake = step_motor(10.0, 0.0, 0.02, 0.2);
        assert!((brake - 10.0 * (-10.0f64).exp()).abs() < 1e-15);
        assert!((brake - 4.54e-4).abs() < 1e-6);
    }

    #[test]
    fn mean_speed_matches_quadrature() {
        let (w0, target, tau, dt) = (2.0, 9.0, 0.05, 0.004);
        let n = 100_000;
        let h = dt / n as f64;
        let integral: f64 = (0..n)
            .map(|i| step_motor(w0, target, tau, (i as f64 + 0.5) * h))
            .sum::<f64>()
            * h;
        assert!((mean_omega_over_step(w0, target, tau, dt) - integral / dt).abs() < 1e-9);
    }

    #[test]
    fn servo_slew() {
        let mut s = ServoState::at(0.0);
        s.command(160.0);
        assert_eq!(step_servo(s, 0.1).angle, 40.0);
        assert_eq!(step_servo(s, 1.0).angle, 160.0);
        let held = ServoState::at(160.0);
        assert_eq!(step_servo(held, 5.0).angle, 160.0);
        s.command(400.0);
        assert_eq!(s.commanded, 180.0);
    }

    proptest! {
        #[test]
        fn standby_dominates(in1: bool, in2: bool, duty: u8) {
            prop_assert_eq!(channel_mode(inputs(in1.into(), in2.into(), duty, L)), ChannelMode::Standby);
        }

        #[test]
        fn motor_contracts(w in -30.0f64..30.0, t in -30.0f64..30.0, tau in 1e-3f64..2.0, dt in 1e-6f64..5.0) {
            prop_assert!((step_motor(w, t, tau, dt) - t).abs() <= (w - t).abs());
        }

        #[test]
        fn servo_stays_between(angle in 0.0f64..180.0, cmd in 0.0f64..180.0, dt in 1e-4f64..2.0) {
            let s = ServoState { angle, commanded: cmd, slew_rate: 400.0 };
            let next = step_servo(s, dt).angle;
            prop_assert!(next >= angle.min(cmd) && next <= angle.max(cmd));
        }
    }
}
