//! Scalar optimization of the pump-to-collection waist ratio and the
//! collection waist, and the figure sweeps built on top of it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::brightness::{total_brightness, AmplitudeForm, FrequencyDomain, SetupAmplitude};
use crate::dispersion::{CrystalModel, Polarization};
use crate::error::{Result, SpdcError};
use crate::geometry::{
    solve_pm_angle, PolarizationTriple, SourceSetup, SymmetricSource, PARAXIAL_FLOOR,
    PARAXIAL_WARNING,
};
use crate::thinlimit::{
    brightness_filtered, brightness_thin, brightness_walkoff_collinear, ThinConfig,
};
use crate::units::{omega_from_wavelength, wavelength_from_omega};

/// Search bracket of the waist ratio.
pub const RATIO_BRACKET: (f64, f64) = (0.2, 2.0);
const SCAN_POINTS: usize = 25;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[a, b]` by golden-section search until the bracket is
/// narrower than `tol`. Returns `(x, f(x), evaluations)`.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut count = 2;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2)?;
        }
        count += 1;
    }
    Ok(if f1 >= f2 {
        (x1, f1, count)
    } else {
        (x2, f2, count)
    })
}

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub x: f64,
    pub value: f64,
    /// Half-width of the final bracket.
    pub uncertainty: f64,
    /// The objective varied by less than 1e-12 relative over the scan.
    pub degenerate: bool,
    /// The maximum sits on the scan edge.
    pub at_edge: bool,
    pub evaluations: usize,
}

/// Coarse scan of `points` values followed by golden-section refinement of
/// the best bracketing triple.
pub fn maximize_scan<F>(mut f: F, lo: f64, hi: f64, points: usize, tol: f64) -> Result<Optimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) || points < 3 {
        return Err(SpdcError::InvalidParameter(format!(
            "bad search bracket [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|j| lo + step * j as f64).collect();
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let (best, &top) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty scan");
    let bottom = ys.iter().copied().fold(f64::INFINITY, f64::min);
    if (top - bottom).abs() <= 1e-12 * top.abs() {
        return Ok(Optimum {
            x: xs[points / 2],
            value: ys[points / 2],
            uncertainty: 0.5 * (hi - lo),
            degenerate: true,
            at_edge: false,
            evaluations: points,
        });
    }
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(points - 1)];
    let (mut x, mut value, count) = golden_section(&mut f, a, b, tol)?;
    if top > value {
        x = xs[best];
        value = top;
    }
    Ok(Optimum {
        x,
        value,
        uncertainty: 0.5 * tol,
        degenerate: false,
        at_edge: best == 0 || best == points - 1,
        evaluations: points + count,
    })
}

/// Brightness model maximized over the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrightnessModel {
    /// Thin crystal, perfect longitudinal phase matching.
    ThinPerfectPm,
    /// Thin crystal with the sinc of the central mismatch.
    ThinSinc,
    /// Factorized paraxial amplitude.
    FullFactorized,
    /// Collinear closed form with first-order pump walk-off.
    WalkoffClosedForm,
}

impl BrightnessModel {
    pub const ALL: [BrightnessModel; 4] = [
        BrightnessModel::ThinPerfectPm,
        BrightnessModel::ThinSinc,
        BrightnessModel::FullFactorized,
        BrightnessModel::WalkoffClosedForm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            BrightnessModel::ThinPerfectPm => "thin-perfect-pm",
            BrightnessModel::ThinSinc => "thin-sinc",
            BrightnessModel::FullFactorized => "full-factorized",
            BrightnessModel::WalkoffClosedForm => "walkoff-closed-form",
        }
    }
}

impl fmt::Display for BrightnessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BrightnessModel {
    type Err = SpdcError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| SpdcError::InvalidParameter(format!("unknown model '{s}'")))
    }
}

/// Settings shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub crystal: CrystalModel,
    /// µm.
    pub pump_wavelength: f64,
    pub tau: f64,
    pub polarizations: PolarizationTriple,
    pub phi: f64,
    /// Filter half-width, rad/fs.
    pub filter: Option<f64>,
    /// Relative tolerance of the frequency integral.
    pub rel_tol: f64,
    /// Initial panel count of the frequency integral.
    pub initial_panels: usize,
    /// Golden-section bracket width on the ratio.
    pub ratio_tol: f64,
}

impl ModelConfig {
    pub fn bbo() -> Self {
        Self {
            crystal: CrystalModel::bbo(),
            pump_wavelength: 0.405,
            tau: 100.0,
            polarizations: PolarizationTriple::TYPE_I,
            phi: 0.0,
            filter: None,
            rel_tol: 1e-8,
            initial_panels: 2,
            ratio_tol: 2e-4,
        }
    }

    pub fn omega0(&self) -> f64 {
        omega_from_wavelength(self.pump_wavelength)
    }

    /// Frequency domain of the configured window, filter and tolerances.
    pub fn domain(&self) -> FrequencyDomain {
        FrequencyDomain::window(self.crystal.window, self.omega0(), self.tau)
            .with_filter(self.filter)
            .with_rel_tol(self.rel_tol)
            .with_initial_panels(self.initial_panels)
    }
}

/// Brightness value with its quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Brightness as a function of the ratio at fixed (α, w, L), with the cut
/// angle solved once for the collection angle.
#[derive(Debug, Clone)]
pub struct Objective {
    pub model: BrightnessModel,
    pub config: ModelConfig,
    pub alpha: f64,
    pub waist: f64,
    pub length: f64,
    crystal: CrystalModel,
}

impl Objective {
    pub fn new(
        model: BrightnessModel,
        config: &ModelConfig,
        alpha: f64,
        waist: f64,
        length: f64,
    ) -> Result<Self> {
        if model == BrightnessModel::WalkoffClosedForm && alpha != 0.0 {
            return Err(SpdcError::InvalidParameter(
                "the walk-off closed form is for collinear emission only".into(),
            ));
        }
        let mut crystal = config.crystal.clone().with_length(length);
        if model != BrightnessModel::ThinPerfectPm {
            let probe =
                SourceSetup::symmetric(crystal.clone(), &Self::source(config, 1.0, waist, alpha))?;
            crystal.cut_angle = solve_pm_angle(&probe)?;
        }
        Ok(Self {
            model,
            config: config.clone(),
            alpha,
            waist,
            length,
            crystal,
        })
    }

    fn source(config: &ModelConfig, ratio: f64, waist: f64, alpha: f64) -> SymmetricSource {
        SymmetricSource {
            pump_wavelength: config.pump_wavelength,
            tau: config.tau,
            ratio,
            waist,
            alpha,
            phi: config.phi,
            polarizations: config.polarizations,
        }
    }

    /// Phase-matching angle in use, rad.
    pub fn cut_angle(&self) -> f64 {
        self.crystal.cut_angle
    }

    /// Ratio bracket clipped so the pump waist stays above the paraxial floor.
    pub fn ratio_bracket(&self) -> (f64, f64) {
        let floor = match self.model {
            BrightnessModel::ThinSinc | BrightnessModel::FullFactorized => {
                PARAXIAL_FLOOR * self.config.pump_wavelength / self.waist
            }
            _ => 0.0,
        };
        (RATIO_BRACKET.0.max(floor * (1.0 + 1e-9)), RATIO_BRACKET.1)
    }

    /// Thin-limit configuration at ratio `r`.
    pub fn thin_config(&self, r: f64) -> Result<ThinConfig> {
        Ok(
            ThinConfig::new(&self.crystal, self.config.pump_wavelength, self.config.tau)?
                .with_ratio(r)
                .with_waist(self.waist)
                .with_alpha(self.alpha)
                .with_filter(self.config.filter),
        )
    }

    /// Source setup at ratio `r`.
    pub fn setup(&self, r: f64) -> Result<SourceSetup> {
        SourceSetup::symmetric(
            self.crystal.clone(),
            &Self::source(&self.config, r, self.waist, self.alpha),
        )
    }

    pub fn evaluate(&self, r: f64) -> Result<Evaluation> {
        let closed = |value: f64| Evaluation {
            value,
            abs_error: 0.0,
            evaluations: 1,
        };
        match self.model {
            BrightnessModel::ThinPerfectPm => {
                let cfg = self.thin_config(r)?;
                let value = match cfg.filter {
                    Some(_) => brightness_filtered(&cfg)?.exact,
                    None => brightness_thin(&cfg)?,
                };
                Ok(closed(value))
            }
            BrightnessModel::WalkoffClosedForm => {
                let omega0 = self.config.omega0();
                let beta = self
                    .crystal
                    .wave_params(omega0, Polarization::Extraordinary)?
                    .beta;
                let cfg = self.thin_config(r)?.with_beta(beta);
                Ok(closed(brightness_walkoff_collinear(&cfg)?))
            }
            BrightnessModel::ThinSinc | BrightnessModel::FullFactorized => {
                let form = if self.model == BrightnessModel::ThinSinc {
                    AmplitudeForm::ThinSinc
                } else {
                    AmplitudeForm::Factorized
                };
                let psi = SetupAmplitude::new(self.setup(r)?, form);
                let b = total_brightness(&psi, &self.config.domain())?;
                Ok(Evaluation {
                    value: b.value,
                    abs_error: b.abs_error,
                    evaluations: b.evaluations,
                })
            }
        }
    }
}

/// Optimal ratio with the brightness at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioOptimum {
    pub r_star: f64,
    pub brightness: f64,
    pub abs_error: f64,
    pub uncertainty: f64,
    pub degenerate: bool,
    pub at_edge: bool,
    pub evaluations: usize,
}

/// Maximizes an arbitrary brightness model over the ratio bracket.
pub fn optimal_ratio_by<F>(f: F, bracket: (f64, f64), tol: f64) -> Result<Optimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    maximize_scan(f, bracket.0, bracket.1, SCAN_POINTS, tol)
}

pub fn optimal_ratio(objective: &Objective) -> Result<RatioOptimum> {
    let mut evaluations = 0;
    let opt = optimal_ratio_by(
        |r| {
            let e = objective.evaluate(r)?;
            evaluations += e.evaluations;
            Ok(e.value)
        },
        objective.ratio_bracket(),
        objective.config.ratio_tol,
    )?;
    let at = objective.evaluate(opt.x)?;
    Ok(RatioOptimum {
        r_star: opt.x,
        brightness: at.value,
        abs_error: at.abs_error,
        uncertainty: opt.uncertainty,
        degenerate: opt.degenerate,
        at_edge: opt.at_edge,
        evaluations: evaluations + at.evaluations,
    })
}

/// Optimum over the waist, with the ratio optimized at every waist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaistOptimum {
    pub w_star: f64,
    pub r_star: f64,
    pub brightness: f64,
    /// The maximum is on the edge of the waist bracket.
    pub at_edge: bool,
    /// The optimum lies where the paraxial approximation is doubtful.
    pub near_paraxial_floor: bool,
    /// (w, r*, R*) of the coarse scan.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Maximizes over `w` in `bracket` by a log-spaced scan of `points` waists
/// and golden-section refinement in `ln w`.
pub fn optimal_waist(
    model: BrightnessModel,
    config: &ModelConfig,
    alpha: f64,
    length: f64,
    bracket: (f64, f64),
    points: usize,
) -> Result<WaistOptimum> {
    let lambda_s = 2.0 * config.pump_wavelength;
    if bracket.0 < PARAXIAL_FLOOR * lambda_s {
        return Err(SpdcError::InvalidParameter(format!(
            "waist bracket starts below the paraxial floor of {PARAXIAL_FLOOR} wavelengths ({:.3} um)",
            PARAXIAL_FLOOR * lambda_s
        )));
    }
    let at_waist = |w: f64| -> Result<RatioOptimum> {
        optimal_ratio(&Objective::new(model, config, alpha, w, length)?)
    };
    let (lo, hi) = (bracket.0.ln(), bracket.1.ln());
    let step = (hi - lo) / (points.max(3) - 1) as f64;
    let logs: Vec<f64> = (0..points.max(3)).map(|j| lo + step * j as f64).collect();
    let mut waists: Vec<f64> = logs.iter().map(|x| x.exp()).collect();
    let last = waists.len() - 1;
    waists[0] = bracket.0;
    waists[last] = bracket.1;
    let scan = waists
        .par_iter()
        .map(|&w| at_waist(w))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<(f64, f64, f64)> = waists
        .iter()
        .zip(&scan)
        .map(|(w, o)| (*w, o.r_star, o.brightness))
        .collect();
    let best = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.brightness.total_cmp(&b.1.brightness))
        .map(|(i, _)| i)
        .expect("non-empty scan");
    let at_edge = best == 0 || best == logs.len() - 1;
    let (w_star, r_star, brightness) = if at_edge {
        samples[best]
    } else {
        let (x, _, _) = golden_section(
            |x| Ok(at_waist(x.exp())?.brightness),
            logs[best - 1],
            logs[best + 1],
            1e-2,
        )?;
        let o = at_waist(x.exp())?;
        (x.exp(), o.r_star, o.brightness)
    };
    Ok(WaistOptimum {
        w_star,
        r_star,
        brightness,
        at_edge,
        near_paraxial_floor: w_star
            < PARAXIAL_WARNING * wavelength_from_omega(0.5 * config.omega0()),
        samples,
    })
}

/// Outcome flag of one sweep row.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    Degenerate,
    EdgeOfBracket,
    Failed(String),
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => f.write_str("ok"),
            RowStatus::Degenerate => f.write_str("degenerate"),
            RowStatus::EdgeOfBracket => f.write_str("edge"),
            RowStatus::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

/// One optimized point of a figure sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub figure: u8,
    pub model: BrightnessModel,
    pub length: f64,
    pub waist: f64,
    pub alpha: f64,
    /// Phase-matching angle used, rad.
    pub theta: f64,
    pub r_star: f64,
    pub r_uncertainty: f64,
    pub brightness: f64,
    /// Brightness over the maximum of its (model, L) group.
    pub normalized: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub status: RowStatus,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        matches!(self.status, RowStatus::Failed(_))
    }
}

/// Optional replacements for a preset's grids and settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOverrides {
    pub models: Option<Vec<BrightnessModel>>,
    pub lengths: Option<Vec<f64>>,
    pub waists: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub config: Option<ModelConfig>,
}

/// Grids and settings of a figure sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub figure: u8,
    pub models: Vec<BrightnessModel>,
    pub lengths: Vec<f64>,
    pub waists: Vec<f64>,
    pub alphas: Vec<f64>,
    pub config: ModelConfig,
}

/// Collection angles `0..=max` in `n` equal steps, rad.
pub fn alpha_grid(max_deg: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| (max_deg * j as f64 / n as f64).to_radians())
        .collect()
}

/// Largest collection angle of the angle sweeps, degrees.
pub const FIGURE_ALPHA_MAX_DEG: f64 = 10.0;

impl SweepPlan {
    pub fn preset(figure: u8) -> Result<Self> {
        use BrightnessModel::*;
        let angles = alpha_grid(FIGURE_ALPHA_MAX_DEG, 20);
        let (models, lengths, waists, alphas) = match figure {
            3 => (
                vec![ThinPerfectPm],
                vec![100.0],
                vec![10.0, 30.0, 50.0],
                angles,
            ),
            5 => (vec![ThinSinc], vec![100.0], vec![10.0, 30.0, 50.0], angles),
            6 => (
                vec![FullFactorized],
                vec![100.0, 500.0],
                vec![10.0, 30.0, 50.0, 70.0],
                angles,
            ),
            7 => (
                vec![FullFactorized, WalkoffClosedForm],
                vec![500.0],
                vec![10.0, 15.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0],
                vec![0.0],
            ),
            8 => (
                vec![FullFactorized],
                vec![500.0],
                vec![
                    4.5, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0, 15.0, 20.0, 30.0, 50.0, 70.0,
                ],
                vec![0.0],
            ),
            9 => (
                vec![FullFactorized],
                vec![100.0],
                vec![10.0, 30.0, 50.0, 70.0],
                alpha_grid(4.0, 16),
            ),
            other => {
                return Err(SpdcError::InvalidParameter(format!(
                    "unknown figure {other}; presets exist for 3, 5, 6, 7, 8, 9"
                )))
            }
        };
        Ok(Self {
            figure,
            models,
            lengths,
            waists,
            alphas,
            config: ModelConfig::bbo(),
        })
    }

    pub fn with_overrides(mut self, o: &SweepOverrides) -> Self {
        if let Some(v) = &o.models {
            self.models = v.clone();
        }
        if let Some(v) = &o.lengths {
            self.lengths = v.clone();
        }
        if let Some(v) = &o.waists {
            self.waists = v.clone();
        }
        if let Some(v) = &o.alphas {
            self.alphas = v.clone();
        }
        if let Some(c) = &o.config {
            self.config = c.clone();
        }
        self
    }

    fn points(&self) -> Vec<(BrightnessModel, f64, f64, f64)> {
        let mut out = Vec::new();
        for &m in &self.models {
            for &l in &self.lengths {
                for &w in &self.waists {
                    for &a in &self.alphas {
                        out.push((m, l, w, a));
                    }
                }
            }
        }
        out
    }

    /// Optimizes every grid point in parallel; rows come back in grid order.
    pub fn run(&self) -> Vec<SweepRow> {
        let mut rows: Vec<SweepRow> = self
            .points()
            .par_iter()
            .map(|&(model, length, waist, alpha)| self.row(model, length, waist, alpha))
            .collect();
        normalize_rows(&mut rows);
        rows
    }

    fn row(&self, model: BrightnessModel, length: f64, waist: f64, alpha: f64) -> SweepRow {
        let mut row = SweepRow {
            figure: self.figure,
            model,
            length,
            waist,
            alpha,
            theta: f64::NAN,
            r_star: f64::NAN,
            r_uncertainty: f64::NAN,
            brightness: f64::NAN,
            normalized: f64::NAN,
            abs_error: f64::NAN,
            evaluations: 0,
            status: RowStatus::Ok,
        };
        let result = Objective::new(model, &self.config, alpha, waist, length)
            .and_then(|obj| Ok((obj.cut_angle(), optimal_ratio(&obj)?)));
        match result {
            Ok((theta, o)) => {
                row.theta = theta;
                row.r_star = o.r_star;
                row.r_uncertainty = o.uncertainty;
                row.brightness = o.brightness;
                row.abs_error = o.abs_error;
                row.evaluations = o.evaluations;
                row.status = if o.degenerate {
                    RowStatus::Degenerate
                } else if o.at_edge {
                    RowStatus::EdgeOfBracket
                } else {
                    RowStatus::Ok
                };
            }
            Err(e) => {
                log::warn!(
                    "figure {} {model} L={length} w={waist} alpha={alpha}: {e}",
                    self.figure
                );
                row.status = RowStatus::Failed(e.to_string());
            }
        }
        row
    }
}

/// Fills `normalized` with the brightness over the maximum of each
/// (model, L) group.
pub fn normalize_rows(rows: &mut [SweepRow]) {
    let keys: Vec<(BrightnessModel, u64)> =
        rows.iter().map(|r| (r.model, r.length.to_bits())).collect();
    for key in &keys {
        let max = rows
            .iter()
            .filter(|r| (r.model, r.length.to_bits()) == *key && r.brightness.is_finite())
            .map(|r| r.brightness)
            .fold(0.0, f64::max);
        for r in rows
            .iter_mut()
            .filter(|r| (r.model, r.length.to_bits()) == *key)
        {
            r.normalized = if max > 0.0 {
                r.brightness / max
            } else {
                f64::NAN
            };
        }
    }
}

/// Runs the preset of `figure` with `overrides`.
pub fn figure_sweep(figure: u8, overrides: &SweepOverrides) -> Result<Vec<SweepRow>> {
    Ok(SweepPlan::preset(figure)?.with_overrides(overrides).run())
}
