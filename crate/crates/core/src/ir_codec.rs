//! NEC pulse-distance coding between mark/space trains and 32-bit codes.
//!
//! Codes are stored as full 32-bit values and transmitted most-significant
//! bit first, so `decode_nec(encode_nec(c)) == c` holds for every value.
//! The firmware's six-digit button constants (`0xFF6897`) are the same
//! values with a zero high byte.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IrCode(pub u32);

impl IrCode {
    /// Address byte and command byte each followed by their complement.
    pub fn nec_checksum_ok(self) -> bool {
        let [a, na, c, nc] = self.0.to_be_bytes();
        a == !na && c == !nc
    }
}

impl fmt::Display for IrCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:08X}", self.0)
    }
}

impl FromStr for IrCode {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let hex = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(s);
        u32::from_str_radix(hex, 16).map(IrCode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Button {
    Button1,
    Button2,
}

pub fn button_code(button: Button) -> IrCode {
    match button {
        Button::Button1 => IrCode(0x00FF_6897),
        Button::Button2 => IrCode(0x00FF_9867),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseLevel {
    Mark,
    Space,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pulse {
    pub level: PulseLevel,
    pub micros: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PulseTrainError {
    #[error("entry {index}: duration must be positive")]
    ZeroDuration { index: usize },
    #[error("entry {index}: expected a {expected}")]
    NotAlternating { index: usize, expected: &'static str },
    #[error("`{0}` is not an integer duration")]
    BadToken(String),
    #[error("entry {index}: duration {value} out of range")]
    OutOfRange { index: usize, value: i64 },
}

/// Alternating mark/space durations in microseconds, starting with a mark.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PulseTrain(Vec<Pulse>);

impl PulseTrain {
    pub fn new(pulses: Vec<Pulse>) -> Result<Self, PulseTrainError> {
        for (index, p) in pulses.iter().enumerate() {
            let expected = if index % 2 == 0 { PulseLevel::Mark } else { PulseLevel::Space };
            if p.level != expected {
                return Err(PulseTrainError::NotAlternating {
                    index,
                    expected: if index % 2 == 0 { "mark" } else { "space" },
                });
            }
            if p.micros == 0 {
                return Err(PulseTrainError::ZeroDuration { index });
            }
        }
        Ok(Self(pulses))
    }

    /// Builds a train from durations, alternating mark/space from a mark.
    pub fn from_durations(durations: &[u32]) -> Result<Self, PulseTrainError> {
        let pulses = durations
            .iter()
            .enumerate()
            .map(|(i, &micros)| Pulse {
                level: if i % 2 == 0 { PulseLevel::Mark } else { PulseLevel::Space },
                micros,
            })
            .collect();
        Self::new(pulses)
    }

    /// Signed form: positive = mark, negative = space.
    pub fn from_signed(values: &[i64]) -> Result<Self, PulseTrainError> {
        let pulses = values
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                let level = if v > 0 { PulseLevel::Mark } else { PulseLevel::Space };
                let micros = u32::try_from(v.unsigned_abs())
                    .map_err(|_| PulseTrainError::OutOfRange { index, value: v })?;
                Ok(Pulse { level, micros })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(pulses)
    }

    pub fn to_signed(&self) -> Vec<i64> {
        self.0
            .iter()
            .map(|p| match p.level {
                PulseLevel::Mark => i64::from(p.micros),
                PulseLevel::Space => -i64::from(p.micros),
            })
            .collect()
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every duration multiplied by `factor`, rounded to whole microseconds.
    pub fn scaled(&self, factor: f64) -> Self {
        Self(
            self.0
                .iter()
                .map(|p| Pulse {
                    micros: ((f64::from(p.micros) * factor).round() as u32).max(1),
                    ..*p
                })
                .collect(),
        )
    }
}

impl fmt::Display for PulseTrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.to_signed().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v:+}")?;
        }
        Ok(())
    }
}

impl FromStr for PulseTrain {
    type Err = PulseTrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = s
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| PulseTrainError::BadToken(t.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_signed(&values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NecTiming {
    pub header_mark: u32,
    pub header_space: u32,
    pub repeat_space: u32,
    pub bit_mark: u32,
    pub zero_space: u32,
    pub one_space: u32,
    pub stop_mark: u32,
    /// Accepted relative deviation from each nominal duration.
    pub tolerance_fraction: f64,
}

impl Default for NecTiming {
    fn default() -> Self {
        Self {
            header_mark: 9000,
            header_space: 4500,
            repeat_space: 2250,
            bit_mark: 560,
            zero_space: 560,
            one_space: 1690,
            stop_mark: 560,
            tolerance_fraction: 0.25,
        }
    }
}

impl NecTiming {
    fn matches(&self, actual: u32, nominal: u32) -> bool {
        let nominal = f64::from(nominal);
        (f64::from(actual) - nominal).abs() <= self.tolerance_fraction * nominal
    }
}

/// Entries in a full data frame: header pair, 32 bit pairs, stop mark.
pub const NEC_FRAME_LEN: usize = 2 + 64 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NecFrame {
    Code(IrCode),
    /// Held-button repeat frame.
    Repeat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("header out of tolerance")]
    BadHeader,
    #[error("bit {index} out of tolerance")]
    BadBit { index: usize },
    #[error("stop mark out of tolerance")]
    BadStop,
    #[error("truncated train: {found} entries, need {needed}")]
    Truncated { found: usize, needed: usize },
}

pub fn encode_nec(code: IrCode, timing: &NecTiming) -> PulseTrain {
    let mut d = Vec::with_capacity(NEC_FRAME_LEN);
    d.push(timing.header_mark);
    d.push(timing.header_space);
    for bit in (0..32).rev() {
        d.push(timing.bit_mark);
        d.push(if code.0 >> bit & 1 == 1 {
            timing.one_space
        } else {
            timing.zero_space
        });
    }
    d.push(timing.stop_mark);
    PulseTrain::from_durations(&d).expect("timing durations are positive")
}

/// Held-button repeat frame: header mark, short space, stop mark.
pub fn encode_nec_repeat(timing: &NecTiming) -> PulseTrain {
    PulseTrain::from_durations(&[timing.header_mark, timing.repeat_space, timing.stop_mark])
        .expect("timing durations are positive")
}

pub fn decode_nec(train: &PulseTrain, timing: &NecTiming) -> Result<NecFrame, DecodeError> {
    let d: Vec<u32> = train.pulses().iter().map(|p| p.micros).collect();
    if d.len() < 2 {
        if d.first().is_some_and(|&m| !timing.matches(m, timing.header_mark)) {
            return Err(DecodeError::BadHeader);
        }
        return Err(DecodeError::Truncated {
            found: d.len(),
            needed: NEC_FRAME_LEN,
        });
    }
    if !timing.matches(d[0], timing.header_mark) {
        return Err(DecodeError::BadHeader);
    }
    if timing.matches(d[1], timing.repeat_space) {
        return match d.get(2) {
            None => Err(DecodeError::Truncated { found: d.len(), needed: 3 }),
            Some(&m) if timing.matches(m, timing.stop_mark) => Ok(NecFrame::Repeat),
            Some(_) => Err(DecodeError::BadStop),
        };
    }
    if !timing.matches(d[1], timing.header_space) {
        return Err(DecodeError::BadHeader);
    }

    let mut value = 0u32;
    for index in 0..32 {
        let (mark, space) = (2 + 2 * index, 3 + 2 * index);
        let (Some(&m), Some(&s)) = (d.get(mark), d.get(space)) else {
            return Err(DecodeError::Truncated {
                found: d.len(),
                needed: NEC_FRAME_LEN,
            });
        };
        if !timing.matches(m, timing.bit_mark) {
            return Err(DecodeError::BadBit { index });
        }
        let bit = if timing.matches(s, timing.zero_space) {
            0
        } else if timing.matches(s, timing.one_space) {
            1
        } else {
            return Err(DecodeError::BadBit { index });
        };
        value = value << 1 | bit;
    }
    match d.get(NEC_FRAME_LEN - 1) {
        None => Err(DecodeError::Truncated {
            found: d.len(),
            needed: NEC_FRAME_LEN,
        }),
        Some(&m) if timing.matches(m, timing.stop_mark) => Ok(NecFrame::Code(IrCode(value))),
        Some(_) => Err(DecodeError::BadStop),
    }
}
