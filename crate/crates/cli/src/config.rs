//! Run configuration: TOML with unit-suffixed quantities.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use spdc_core::brightness::SweepAxis;
use spdc_core::units::{
    filter_half_width, omega_from_wavelength, parse_angle, parse_length, parse_time,
};
use spdc_core::{BrightnessModel, CrystalModel, ModelConfig, PolarizationTriple, SourceSetup};

pub const BUILTIN_CRYSTAL: &str = "bbo";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `"bbo"` for the bundled definition, otherwise a crystal file path
    /// relative to the config file.
    pub crystal: Option<String>,
    #[serde(default)]
    pub setup: SetupSection,
    #[serde(default)]
    pub computation: ComputationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetupSection {
    pub pump_wavelength: String,
    pub pulse_duration: String,
    /// Overrides the crystal file's length.
    pub length: Option<String>,
    /// Solved for phase matching when absent.
    pub cut_angle: Option<String>,
    /// Signal and idler waist.
    pub waist: String,
    /// Pump waist over `waist`; exclusive with `pump_waist`.
    pub ratio: Option<f64>,
    pub pump_waist: Option<String>,
    pub alpha: String,
    pub phi: String,
    pub polarizations: String,
}

impl Default for SetupSection {
    fn default() -> Self {
        Self {
            pump_wavelength: "405 nm".into(),
            pulse_duration: "100 fs".into(),
            length: None,
            cut_angle: None,
            waist: "10 um".into(),
            ratio: None,
            pump_waist: None,
            alpha: "0 deg".into(),
            phi: "0 deg".into(),
            polarizations: "e->oo".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputationSection {
    pub model: String,
    /// Full width of a square filter centred on the degenerate wavelength.
    pub filter: Option<String>,
    pub rel_tol: f64,
    pub workers: Option<usize>,
    pub output: Option<String>,
    pub sweep: Option<SweepSection>,
    pub jsa: Option<JsaSection>,
    pub map: Option<MapSection>,
}

impl Default for ComputationSection {
    fn default() -> Self {
        Self {
            model: BrightnessModel::FullFactorized.tag().into(),
            filter: None,
            rel_tol: 1e-7,
            workers: None,
            output: None,
            sweep: None,
            jsa: None,
            map: None,
        }
    }
}

/// Grid of one swept quantity; `ratio` values are plain numbers, the others
/// carry units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub from: AxisValue,
    pub to: AxisValue,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Number(f64),
    Text(String),
}

/// Wavelength ranges of the JSA grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsaSection {
    pub signal: [String; 2],
    pub idler: [String; 2],
    pub points: usize,
}

/// Transverse-integrand map at one frequency pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSection {
    pub signal_wavelength: Option<String>,
    pub idler_wavelength: Option<String>,
    /// Half-width of the map in units of `1/w̄`.
    pub span: f64,
    pub points: usize,
    pub perfect_pm: bool,
}

impl Default for MapSection {
    fn default() -> Self {
        Self {
            signal_wavelength: None,
            idler_wavelength: None,
            span: 4.0,
            points: 101,
            perfect_pm: true,
        }
    }
}

/// Sweep grid in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Configuration with every quantity parsed and checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub setup: SourceSetup,
    pub model: BrightnessModel,
    /// Filter half-width in rad/fs.
    pub filter: Option<f64>,
    pub sweep: Option<Grid>,
    pub jsa: Option<JsaGrid>,
    pub map: MapSection,
    pub map_pair: (f64, f64),
}

/// JSA grid in angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid {
    pub idler: (f64, f64),
    pub signal: (f64, f64),
    pub points: usize,
}

impl Resolved {
    pub fn ratio(&self) -> f64 {
        self.setup.pump.waist[0] / self.setup.signal.waist[0]
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            crystal: self.setup.crystal.clone(),
            pump_wavelength: spdc_core::units::wavelength_from_omega(self.setup.pump.omega0),
            tau: self.setup.pump.tau,
            polarizations: self.setup.polarizations,
            phi: self.setup.geometry.phi,
            filter: self.filter,
            rel_tol: self.raw.computation.rel_tol,
            ..ModelConfig::bbo()
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
    toml::from_str(&text).map_err(|e| vec![format!("config {}: {e}", path.display())])
}

fn crystal(raw: &RunConfig, base: Option<&Path>) -> Result<CrystalModel, String> {
    match raw.crystal.as_deref() {
        None | Some(BUILTIN_CRYSTAL) => Ok(CrystalModel::bbo()),
        Some(file) => {
            let mut path = PathBuf::from(file);
            if path.is_relative() {
                if let Some(dir) = base {
                    path = dir.join(path);
                }
            }
            if !path.exists() {
                return Err(format!("crystal file not found: {}", path.display()));
            }
            CrystalModel::from_file(&path).map_err(|e| e.to_string())
        }
    }
}

/// Collects a field result, recording the error under `field`.
fn take<T>(
    errors: &mut Vec<String>,
    field: &str,
    r: Result<T, impl std::fmt::Display>,
) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(format!("{field}: {e}"));
            None
        }
    }
}

fn parse_axis_value(axis: SweepAxis, value: &AxisValue) -> Result<f64, String> {
    let text = match value {
        AxisValue::Number(x) if axis == SweepAxis::Ratio => return Ok(*x),
        AxisValue::Number(x) => return Err(format!("{x} needs a unit")),
        AxisValue::Text(t) => t,
    };
    match axis {
        SweepAxis::Ratio => text
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("'{text}': {e}")),
        SweepAxis::Waist => parse_length(text).map_err(|e| e.to_string()),
        SweepAxis::Alpha => parse_angle(text).map_err(|e| e.to_string()),
    }
}

/// Parses and checks every field, reporting all problems at once.
/// `base` is the directory that relative crystal paths resolve against.
pub fn resolve(raw: RunConfig, base: Option<&Path>) -> Result<Resolved, Vec<String>> {
    let mut errors = Vec::new();
    let e = &mut errors;
    let s = &raw.setup;
    let crystal = take(e, "crystal", crystal(&raw, base));
    let lambda_p = take(e, "setup.pump_wavelength", parse_length(&s.pump_wavelength));
    let tau = take(e, "setup.pulse_duration", parse_time(&s.pulse_duration));
    let length = s
        .length
        .as_deref()
        .map(|l| take(e, "setup.length", parse_length(l)));
    let cut = s
        .cut_angle
        .as_deref()
        .map(|a| take(e, "setup.cut_angle", parse_angle(a)));
    let waist = take(e, "setup.waist", parse_length(&s.waist));
    let pump_waist = match (s.ratio, s.pump_waist.as_deref()) {
        (Some(_), Some(_)) => {
            e.push("setup: give either ratio or pump_waist, not both".into());
            None
        }
        (Some(r), None) if r > 0.0 => waist.map(|w| r * w),
        (Some(r), None) => {
            e.push(format!("setup.ratio: must be positive, got {r}"));
            None
        }
        (None, Some(p)) => take(e, "setup.pump_waist", parse_length(p)),
        (None, None) => waist.map(|w| std::f64::consts::FRAC_1_SQRT_2 * w),
    };
    let alpha = take(e, "setup.alpha", parse_angle(&s.alpha));
    let phi = take(e, "setup.phi", parse_angle(&s.phi));
    let pols = take(
        e,
        "setup.polarizations",
        s.polarizations.parse::<PolarizationTriple>(),
    );
    let c = &raw.computation;
    let model = take(e, "computation.model", c.model.parse::<BrightnessModel>());
    let filter_width = c
        .filter
        .as_deref()
        .map(|f| take(e, "computation.filter", parse_length(f)));
    if !(c.rel_tol > 0.0 && c.rel_tol < 1.0) {
        e.push(format!(
            "computation.rel_tol: must lie in (0, 1), got {}",
            c.rel_tol
        ));
    }
    let sweep = c.sweep.as_ref().and_then(|g| {
        let axis = take(
            e,
            "computation.sweep.axis",
            match g.axis.as_str() {
                "ratio" => Ok(SweepAxis::Ratio),
                "waist" => Ok(SweepAxis::Waist),
                "alpha" => Ok(SweepAxis::Alpha),
                other => Err(format!("unknown axis '{other}' (ratio, waist or alpha)")),
            },
        )?;
        let from = take(e, "computation.sweep.from", parse_axis_value(axis, &g.from));
        let to = take(e, "computation.sweep.to", parse_axis_value(axis, &g.to));
        if g.points < 2 {
            e.push("computation.sweep.points: need at least 2".into());
            return None;
        }
        let (from, to) = (from?, to?);
        let step = (to - from) / (g.points - 1) as f64;
        Some(Grid {
            axis,
            values: (0..g.points).map(|j| from + step * j as f64).collect(),
        })
    });
    let range = |e: &mut Vec<String>, field: &str, r: &[String; 2]| -> Option<(f64, f64)> {
        let a = take(e, field, parse_length(&r[0]))?;
        let b = take(e, field, parse_length(&r[1]))?;
        let (x, y) = (omega_from_wavelength(a), omega_from_wavelength(b));
        Some((x.min(y), x.max(y)))
    };
    let jsa = c.jsa.as_ref().and_then(|j| {
        let idler = range(e, "computation.jsa.idler", &j.idler);
        let signal = range(e, "computation.jsa.signal", &j.signal);
        if j.points < 2 {
            e.push("computation.jsa.points: need at least 2".into());
        }
        Some(JsaGrid {
            idler: idler?,
            signal: signal?,
            points: j.points,
        })
    });
    let map = c.map.clone().unwrap_or_default();
    if map.points < 2 || !(map.span > 0.0) {
        e.push("computation.map: need span > 0 and at least 2 points".into());
    }
    let map_i = map
        .idler_wavelength
        .as_deref()
        .map(|l| take(e, "computation.map.idler_wavelength", parse_length(l)));
    let map_s = map
        .signal_wavelength
        .as_deref()
        .map(|l| take(e, "computation.map.signal_wavelength", parse_length(l)));

    let setup = (|| {
        let mut crystal = crystal?;
        if let Some(l) = length {
            crystal = crystal.with_length(l?);
        }
        let omega0 = omega_from_wavelength(lambda_p?);
        let (w, wp) = (waist?, pump_waist?);
        let setup = SourceSetup {
            crystal,
            pump: spdc_core::Pump {
                omega0,
                tau: tau?,
                waist: [wp, wp],
            },
            signal: spdc_core::CollectionMode {
                omega: 0.5 * omega0,
                waist: [w, w],
            },
            idler: spdc_core::CollectionMode {
                omega: 0.5 * omega0,
                waist: [w, w],
            },
            polarizations: pols?,
            geometry: spdc_core::CollectionGeometry::symmetric(alpha?, phi?),
        };
        Some((setup, cut))
    })();
    let setup = setup.and_then(|(setup, cut)| {
        if let Err(err) = setup.validate() {
            e.push(format!("setup: {err}"));
            return None;
        }
        match cut {
            Some(theta) => Some(setup.with_cut_angle(theta?)),
            None => take(e, "setup.cut_angle", setup.phase_matched()),
        }
    });
    let filter = match (filter_width, &setup) {
        (Some(width), Some(setup)) => width.map(|width| {
            let center = spdc_core::units::wavelength_from_omega(0.5 * setup.pump.omega0);
            filter_half_width(center, width)
        }),
        _ => None,
    };
    let map_pair = setup.as_ref().map(|s| {
        let pick = |given: Option<Option<f64>>| {
            given
                .flatten()
                .map(omega_from_wavelength)
                .unwrap_or(0.5 * s.pump.omega0)
        };
        (pick(map_i), pick(map_s))
    });
    match (errors.is_empty(), setup, model, map_pair) {
        (true, Some(setup), Some(model), Some(map_pair)) => Ok(Resolved {
            raw,
            setup,
            model,
            filter,
            sweep,
            jsa,
            map,
            map_pair,
        }),
        _ => Err(errors),
    }
}
