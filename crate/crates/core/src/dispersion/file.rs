//! TOML crystal definition files.
//!
//! ```toml
//! name = "BBO"
//! length = "100 um"
//! cut_angle = "28.8 deg"
//! transmission = { short = "0.2 um", long = "2.2 um" }
//! poling = { period = "3.4 um", order = 1 }   # optional
//!
//! [ordinary]
//! wavelength_unit = "um"          # or "nm"
//! constant = 2.7359
//! poles = [[0.01878, 0.01822]]    # b / (lambda^2 - c)
//! resonances = []                 # b lambda^2 / (lambda^2 - c)
//! quadratic = -0.01354
//!
//! [extraordinary]
//! ...
//! ```

use serde::Deserialize;

use super::{CrystalModel, Poling, Sellmeier};
use crate::error::{Result, SpdcError};
use crate::units::{omega_from_wavelength, parse_angle, parse_length};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierSpec {
    #[serde(default = "default_unit")]
    pub wavelength_unit: String,
    pub constant: f64,
    #[serde(default)]
    pub poles: Vec<[f64; 2]>,
    #[serde(default)]
    pub resonances: Vec<[f64; 2]>,
    #[serde(default)]
    pub quadratic: f64,
}

fn default_unit() -> String {
    "um".to_string()
}

impl SellmeierSpec {
    /// Converts to the internal micrometre form.
    pub fn to_sellmeier(&self) -> Result<Sellmeier> {
        let s = match self.wavelength_unit.as_str() {
            "um" | "µm" | "micron" => 1.0,
            "nm" => 1e3,
            other => {
                return Err(SpdcError::CrystalFile(format!(
                    "unsupported Sellmeier wavelength unit '{other}'"
                )))
            }
        };
        // λ_file = s·λ_um, so every λ² in the polynomial picks up s².
        let s2 = s * s;
        Ok(Sellmeier {
            constant: self.constant,
            poles: self.poles.iter().map(|[b, c]| [b / s2, c / s2]).collect(),
            resonances: self.resonances.iter().map(|[b, c]| [*b, c / s2]).collect(),
            quadratic: self.quadratic * s2,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionSpec {
    /// Short-wavelength edge, e.g. `"0.2 um"`.
    pub short: String,
    /// Long-wavelength edge.
    pub long: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolingSpec {
    pub period: String,
    #[serde(default = "default_order")]
    pub order: i32,
}

fn default_order() -> i32 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalFile {
    pub name: String,
    pub length: String,
    #[serde(default)]
    pub cut_angle: Option<String>,
    pub transmission: TransmissionSpec,
    #[serde(default)]
    pub poling: Option<PolingSpec>,
    pub ordinary: SellmeierSpec,
    pub extraordinary: SellmeierSpec,
}

impl CrystalFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SpdcError::CrystalFile(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpdcError::CrystalFile(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn into_model(self) -> Result<CrystalModel> {
        let short = parse_length(&self.transmission.short)?;
        let long = parse_length(&self.transmission.long)?;
        if !(short > 0.0 && short < long) {
            return Err(SpdcError::CrystalFile(format!(
                "transmission edges must satisfy 0 < short < long, got {short} um, {long} um"
            )));
        }
        let window = (omega_from_wavelength(long), omega_from_wavelength(short));
        let poling = self
            .poling
            .map(|p| -> Result<Poling> {
                Ok(Poling {
                    period: parse_length(&p.period)?,
                    order: p.order,
                })
            })
            .transpose()?;
        let cut_angle = match self.cut_angle {
            Some(a) => parse_angle(&a)?,
            None => 0.0,
        };
        CrystalModel::new(
            self.name,
            self.ordinary.to_sellmeier()?,
            self.extraordinary.to_sellmeier()?,
            window,
            parse_length(&self.length)?,
            poling,
            cut_angle,
        )
    }
}

impl CrystalModel {
    /// Loads a crystal definition file.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        CrystalFile::load(path)?.into_model()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        CrystalFile::parse(text)?.into_model()
    }
}
