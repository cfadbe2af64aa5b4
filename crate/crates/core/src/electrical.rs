//! LED series-resistor sizing.

use std::cmp::Ordering;

use thiserror::Error;

/// Common starter-kit resistor values (ohms).
pub const DEFAULT_KIT: &[f64] = &[
    10.0, 100.0, 150.0, 220.0, 330.0, 470.0, 1_000.0, 2_000.0, 5_100.0, 10_000.0, 100_000.0,
    1_000_000.0,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("supply {supply} V does not exceed forward voltage {forward} V")]
    NonPositiveDrop { supply: f64, forward: f64 },
    #[error("current must be positive, got {0} A")]
    NonPositiveCurrent(f64),
    #[error("resistance must be positive, got {0} ohm")]
    NonPositiveResistance(f64),
    #[error("no kit value can replace {0} ohm")]
    NoSuitableValue(f64),
    #[error("kit list must be non-empty and strictly ascending")]
    BadKit,
}

/// Strictly greater, false for NaN.
fn gt(a: f64, b: f64) -> bool {
    a.partial_cmp(&b) == Some(Ordering::Greater)
}

fn drop_across(supply: f64, forward: f64) -> Result<f64, CircuitError> {
    if !gt(supply, forward) {
        return Err(CircuitError::NonPositiveDrop { supply, forward });
    }
    Ok(supply - forward)
}

/// Resistance (ohm) that sets `current` (A) through an LED.
pub fn series_resistor(supply: f64, forward: f64, current: f64) -> Result<f64, CircuitError> {
    let drop = drop_across(supply, forward)?;
    if !gt(current, 0.0) {
        return Err(CircuitError::NonPositiveCurrent(current));
    }
    Ok(drop / current)
}

/// LED current (A) through a given series resistor.
pub fn led_current(supply: f64, forward: f64, resistor: f64) -> Result<f64, CircuitError> {
    if !gt(resistor, 0.0) {
        return Err(CircuitError::NonPositiveResistance(resistor));
    }
    Ok(drop_across(supply, forward)? / resistor)
}

/// Rounds a computed resistance up to a stocked value. An exact match is
/// bumped to the next value so the part never runs at the design limit.
pub fn pick_kit_resistor(computed: f64, kit: &[f64]) -> Result<f64, CircuitError> {
    if kit.is_empty() || kit.windows(2).any(|w| !gt(w[1], w[0])) {
        return Err(CircuitError::BadKit);
    }
    let exact = kit.contains(&computed);
    kit.iter()
        .copied()
        .find(|&v| if exact { v > computed } else { v >= computed })
        .ok_or(CircuitError::NoSuitableValue(computed))
}
