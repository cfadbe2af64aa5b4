//! Desk-scale simulator of an Arduino infrared line-tracking delivery robot.
//!
//! The crate models the tape course, the three-element reflectance sensor
//! bar, the TB6612 H-bridge and motor pairs, the delivery servo, the NEC
//! remote link and the firmware's control loop, and composes them into a
//! deterministic fixed-timestep world driven by [`sim_engine::run_scenario`].

pub mod actuators;
pub mod controller;
pub mod courses;
pub mod electrical;
pub mod ir_codec;
pub mod kinematics;
pub mod scenario;
pub mod sensors;
pub mod sim_engine;
pub mod track;

pub use actuators::{ChannelMode, HBridgeInputs, Level, MotorParams, ServoState};
pub use controller::{ActuatorCommand, ControlConfig, ControllerState, DriveAction};
pub use ir_codec::{Button, IrCode, NecFrame, NecTiming, PulseTrain};
pub use kinematics::{ChassisParams, Pose};
pub use sensors::{SensorGeometry, SensorReading, SideWiring};
pub use sim_engine::{Assertion, Scenario, SimResult, TraceRecord};
pub use track::{Point2, Track, TrackCanvas};
