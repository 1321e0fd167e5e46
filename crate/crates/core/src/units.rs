//! Internal unit system and parsing of unit-suffixed quantities.
//!
//! Lengths are micrometres, times femtoseconds, angular frequencies rad/fs
//! and transverse wavevectors rad/µm. Quantities in configuration files are
//! strings such as `"405 nm"`, `"2.5 deg"` or `"100 fs"`.

use std::f64::consts::PI;

use crate::error::{Result, SpdcError};

/// Speed of light in vacuum, µm/fs.
pub const SPEED_OF_LIGHT: f64 = 0.299_792_458;

/// Vacuum wavelength (µm) to angular frequency (rad/fs).
pub fn omega_from_wavelength(lambda_um: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda_um
}

/// Angular frequency (rad/fs) to vacuum wavelength (µm).
pub fn wavelength_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

/// Half-width in angular frequency of a filter of full width `width_um`
/// centred at `center_um`.
pub fn filter_half_width(center_um: f64, width_um: f64) -> f64 {
    let lo = omega_from_wavelength(center_um + 0.5 * width_um);
    let hi = omega_from_wavelength(center_um - 0.5 * width_um);
    0.5 * (hi - lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Angle,
    Time,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Angle => "angle",
            Dimension::Time => "time",
        }
    }

    fn factor(self, unit: &str) -> Option<f64> {
        match self {
            Dimension::Length => match unit {
                "nm" => Some(1e-3),
                "um" | "µm" | "μm" | "micron" => Some(1.0),
                "mm" => Some(1e3),
                "cm" => Some(1e4),
                "m" => Some(1e6),
                _ => None,
            },
            Dimension::Angle => match unit {
                "rad" => Some(1.0),
                "mrad" => Some(1e-3),
                "deg" | "°" => Some(PI / 180.0),
                _ => None,
            },
            Dimension::Time => match unit {
                "fs" => Some(1.0),
                "ps" => Some(1e3),
                "ns" => Some(1e6),
                _ => None,
            },
        }
    }
}

/// Parses `"<number> <unit>"` into internal units for the given dimension.
///
/// The unit is mandatory; a bare number is rejected.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .ok_or_else(|| {
            SpdcError::InvalidParameter(format!("{} quantity '{trimmed}' has no unit", dim.name()))
        })?;
    let (number, unit) = trimmed.split_at(split);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| SpdcError::InvalidParameter(format!("cannot parse number in '{trimmed}'")))?;
    let unit = unit.trim();
    let factor = dim.factor(unit).ok_or_else(|| {
        SpdcError::InvalidParameter(format!(
            "unknown {} unit '{unit}' in '{trimmed}'",
            dim.name()
        ))
    })?;
    if !value.is_finite() {
        return Err(SpdcError::InvalidParameter(format!(
            "non-finite value '{trimmed}'"
        )));
    }
    Ok(value * factor)
}

pub fn parse_length(text: &str) -> Result<f64> {
    parse_quantity(text, Dimension::Length)
}

pub fn parse_angle(text: &str) -> Result<f64> {
    parse_quantity(text, Dimension::Angle)
}

pub fn parse_time(text: &str) -> Result<f64> {
    parse_quantity(text, Dimension::Time)
}
