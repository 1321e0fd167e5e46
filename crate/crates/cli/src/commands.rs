use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use spdc_core::brightness::{
    brightness_sweep, AmplitudeForm, FrequencyDomain, SetupAmplitude, SweepAxis,
};
use spdc_core::optimize::{SweepOverrides, SweepPlan, SweepRow};
use spdc_core::thinlimit::{psi_thin, psi_thin_perfect};
use spdc_core::units::wavelength_from_omega;
use spdc_core::wavefunction::{
    expansion_center, paraxial_params, psi_factorized, psi_general, transverse_integrand, IDLER,
    PUMP, SIGNAL,
};
use spdc_core::{BrightnessModel, ModelConfig, SourceSetup, TransverseWavevector};

use crate::config::Resolved;
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Result of a command: the table to write and the number of failed points.
pub struct Outcome {
    pub table: Table,
    pub failures: usize,
}

fn window_line(window: (f64, f64)) -> String {
    format!(
        "window: {:.4}-{:.4} um ({:.6}-{:.6} rad/fs)",
        wavelength_from_omega(window.1),
        wavelength_from_omega(window.0),
        window.0,
        window.1
    )
}

fn provenance(
    command: &str,
    cfg: Option<&Resolved>,
    extra: Vec<String>,
) -> Result<Vec<String>, CliError> {
    let mut lines = vec![format!("spdc {} {command}", env!("CARGO_PKG_VERSION"))];
    if let Some(cfg) = cfg {
        lines.push(window_line(cfg.setup.crystal.window));
        lines.push(format!(
            "resolved cut_angle_rad = {}",
            cfg.setup.crystal.cut_angle
        ));
        if let Some(d) = cfg.filter {
            lines.push(format!("resolved filter_half_width_rad_per_fs = {d}"));
        }
        lines.push("config:".into());
        let text = toml::to_string(&cfg.raw).map_err(|e| CliError::Usage(e.to_string()))?;
        lines.extend(text.lines().filter(|l| !l.is_empty()).map(str::to_owned));
    }
    lines.extend(extra);
    Ok(lines)
}

fn form_for(model: BrightnessModel, setup: &SourceSetup) -> Result<AmplitudeForm, CliError> {
    match model {
        BrightnessModel::ThinPerfectPm => Ok(AmplitudeForm::ThinPerfectPm),
        BrightnessModel::ThinSinc => Ok(AmplitudeForm::ThinSinc),
        BrightnessModel::FullFactorized if setup.geometry.is_principal_plane() => {
            Ok(AmplitudeForm::Factorized)
        }
        BrightnessModel::FullFactorized => Ok(AmplitudeForm::General),
        BrightnessModel::WalkoffClosedForm => Err(CliError::Usage(
            "walkoff-closed-form has no amplitude; it is available through `sweep`".into(),
        )),
    }
}

fn amplitude(
    setup: &SourceSetup,
    form: AmplitudeForm,
    wi: f64,
    ws: f64,
) -> spdc_core::Result<(Complex64, f64)> {
    match form {
        AmplitudeForm::ThinPerfectPm => Ok((psi_thin_perfect(setup, wi, ws), 0.0)),
        AmplitudeForm::ThinSinc => Ok((psi_thin(setup, wi, ws)?, 0.0)),
        AmplitudeForm::Factorized => {
            psi_factorized(setup, wi, ws).map(|s| (s.amplitude, s.abs_error))
        }
        AmplitudeForm::General => psi_general(setup, wi, ws).map(|s| (s.amplitude, s.abs_error)),
    }
}

#[derive(Debug, Serialize)]
struct BeamEcho {
    beam: &'static str,
    wavelength_um: f64,
    waist_um: [f64; 2],
    waist_over_wavelength: f64,
    xi: [f64; 2],
    nu: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct Report {
    crystal: String,
    length_um: f64,
    cut_angle_deg: f64,
    cut_angle_solved: bool,
    window_um: (f64, f64),
    window_rad_per_fs: (f64, f64),
    pump_tau_fs: f64,
    alpha_deg: f64,
    phi_deg: f64,
    polarizations: String,
    filter_half_width_rad_per_fs: Option<f64>,
    central_mismatch_per_um: f64,
    beams: Vec<BeamEcho>,
    walkoff_a: [f64; 2],
    aggregate_xi: [f64; 2],
    warnings: Vec<String>,
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "crystal: {}, L = {} um", self.crystal, self.length_um)?;
        let how = if self.cut_angle_solved {
            "phase-matched"
        } else {
            "given"
        };
        writeln!(f, "cut angle: {:.4} deg ({how})", self.cut_angle_deg)?;
        writeln!(
            f,
            "window: {:.4}-{:.4} um ({:.6}-{:.6} rad/fs)",
            self.window_um.0, self.window_um.1, self.window_rad_per_fs.0, self.window_rad_per_fs.1
        )?;
        writeln!(f, "pump duration: {} fs", self.pump_tau_fs)?;
        writeln!(
            f,
            "emission: alpha {:.4} deg, phi {:.4} deg, {}",
            self.alpha_deg, self.phi_deg, self.polarizations
        )?;
        match self.filter_half_width_rad_per_fs {
            Some(d) => writeln!(f, "filter: half-width {d:.6e} rad/fs")?,
            None => writeln!(f, "filter: none")?,
        }
        writeln!(
            f,
            "central mismatch: {:.3e} rad/um",
            self.central_mismatch_per_um
        )?;
        writeln!(
            f,
            "beam     lambda_um  w/lambda   xi_x     xi_y     nu_x     nu_y"
        )?;
        for b in &self.beams {
            writeln!(
                f,
                "{:<8} {:<10.4} {:<10.2} {:<8.4} {:<8.4} {:<8.4} {:<8.4}",
                b.beam,
                b.wavelength_um,
                b.waist_over_wavelength,
                b.xi[0],
                b.xi[1],
                b.nu[0],
                b.nu[1]
            )?;
        }
        writeln!(
            f,
            "walk-off A_x = {:.4}, A_y = {:.4}",
            self.walkoff_a[0], self.walkoff_a[1]
        )?;
        writeln!(
            f,
            "aggregate xi_x = {:.4}, xi_y = {:.4}",
            self.aggregate_xi[0], self.aggregate_xi[1]
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        write!(f, "status: ok")
    }
}

pub fn validate(cfg: &Resolved) -> Result<Report, CliError> {
    let s = &cfg.setup;
    let b = paraxial_params(s, s.idler.omega, s.signal.omega)?;
    let mut warnings = Vec::new();
    let beams = [
        ("pump", PUMP, s.pump.omega0, s.pump.waist),
        ("idler", IDLER, s.idler.omega, s.idler.waist),
        ("signal", SIGNAL, s.signal.omega, s.signal.waist),
    ]
    .into_iter()
    .map(|(name, a, omega, waist)| {
        let lambda = wavelength_from_omega(omega);
        let ratio = waist[0].min(waist[1]) / lambda;
        if ratio < spdc_core::geometry::PARAXIAL_WARNING {
            warnings.push(format!(
                "{name} waist is {ratio:.1} wavelengths; paraxial accuracy degrades"
            ));
        }
        BeamEcho {
            beam: name,
            wavelength_um: lambda,
            waist_um: waist,
            waist_over_wavelength: ratio,
            xi: [b.beams[a][0].xi, b.beams[a][1].xi],
            nu: [b.beams[a][0].nu, b.beams[a][1].nu],
        }
    })
    .collect::<Vec<_>>();
    if b.axes.iter().any(|ax| ax.xi > 0.1) {
        warnings.push("aggregate xi above 0.1: thin-crystal forms are unreliable".into());
    }
    let (lo, hi) = s.crystal.window;
    Ok(Report {
        crystal: s.crystal.name.clone(),
        length_um: s.crystal.length,
        cut_angle_deg: s.crystal.cut_angle.to_degrees(),
        cut_angle_solved: cfg.raw.setup.cut_angle.is_none(),
        window_um: (wavelength_from_omega(hi), wavelength_from_omega(lo)),
        window_rad_per_fs: (lo, hi),
        pump_tau_fs: s.pump.tau,
        alpha_deg: s.geometry.alpha_s.to_degrees(),
        phi_deg: s.geometry.phi.to_degrees(),
        polarizations: s.polarizations.to_string(),
        filter_half_width_rad_per_fs: cfg.filter,
        central_mismatch_per_um: s.central_mismatch()?,
        beams,
        walkoff_a: [b.axes[0].a, b.axes[1].a],
        aggregate_xi: [b.axes[0].xi, b.axes[1].xi],
        warnings,
    })
}

fn linspace((a, b): (f64, f64), n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|j| a + step * j as f64).collect()
}

pub fn jsa(cfg: &Resolved) -> Result<Outcome, CliError> {
    let s = &cfg.setup;
    let form = form_for(cfg.model, s)?;
    let (idler, signal, n) = match &cfg.jsa {
        Some(g) => (g.idler, g.signal, g.points),
        None => {
            let range = (s.pump.omega0 / 2.1, s.pump.omega0 / 1.9);
            (range, range, 41)
        }
    };
    let cells: Vec<(f64, f64)> = linspace(idler, n)
        .into_iter()
        .flat_map(|wi| linspace(signal, n).into_iter().map(move |ws| (wi, ws)))
        .collect();
    let values: Vec<_> = cells
        .par_iter()
        .map(|&(wi, ws)| amplitude(s, form, wi, ws))
        .collect();
    let columns = vec![
        "omega_i",
        "omega_s",
        "lambda_i_um",
        "lambda_s_um",
        "re",
        "im",
        "abs",
        "abs_error",
    ];
    let mut table = Table::new(
        columns,
        provenance("jsa", Some(cfg), vec![format!("amplitude form: {form:?}")])?,
    );
    let mut failures = 0;
    for (&(wi, ws), v) in cells.iter().zip(values) {
        let (psi, err) = v.unwrap_or_else(|e| {
            log::warn!("cell ({wi}, {ws}): {e}");
            failures += 1;
            (Complex64::new(f64::NAN, f64::NAN), f64::NAN)
        });
        table.push(vec![
            wi.into(),
            ws.into(),
            wavelength_from_omega(wi).into(),
            wavelength_from_omega(ws).into(),
            psi.re.into(),
            psi.im.into(),
            psi.norm().into(),
            err.into(),
        ]);
    }
    Ok(Outcome { table, failures })
}

pub fn transverse_map(cfg: &Resolved) -> Result<Outcome, CliError> {
    let s = &cfg.setup;
    let (wi, ws) = cfg.map_pair;
    let m = &cfg.map;
    let c = expansion_center(s, wi, ws);
    let half = m.span / c.wbar[0];
    let mid_i = 0.5 * (c.idler.kx + c.k0_i.kx);
    let mid_s = 0.5 * (c.signal.kx + c.k0_s.kx);
    let cells: Vec<(f64, f64)> = linspace((mid_i - half, mid_i + half), m.points)
        .into_iter()
        .flat_map(|ki| {
            linspace((mid_s - half, mid_s + half), m.points)
                .into_iter()
                .map(move |ks| (ki, ks))
        })
        .collect();
    let values: Vec<_> = cells
        .par_iter()
        .map(|&(ki, ks)| {
            let ki = TransverseWavevector::new(ki, c.idler.ky);
            let ks = TransverseWavevector::new(ks, c.signal.ky);
            transverse_integrand(s, wi, ws, ki, ks, m.perfect_pm).map(f64::abs)
        })
        .collect();
    let failures = values.iter().filter(|v| v.is_err()).count();
    let peak = values
        .iter()
        .filter_map(|v| v.as_ref().ok())
        .copied()
        .fold(0.0, f64::max);
    let extra = vec![format!(
        "map at omega_i = {wi}, omega_s = {ws} rad/fs, y components at the expansion centre"
    )];
    let mut table = Table::new(
        vec!["kind", "k_ix", "k_sx", "value"],
        provenance("jsa --map", Some(cfg), extra)?,
    );
    for (&(ki, ks), v) in cells.iter().zip(values) {
        let v = v
            .map(|v| if peak > 0.0 { v / peak } else { v })
            .unwrap_or(f64::NAN);
        table.push(vec!["cell".into(), ki.into(), ks.into(), v.into()]);
    }
    table.push(vec![
        "kbar".into(),
        c.idler.kx.into(),
        c.signal.kx.into(),
        f64::NAN.into(),
    ]);
    table.push(vec![
        "k0".into(),
        c.k0_i.kx.into(),
        c.k0_s.kx.into(),
        f64::NAN.into(),
    ]);
    Ok(Outcome { table, failures })
}

/// Setup with one swept quantity replaced; θ is re-solved unless fixed.
fn vary(cfg: &Resolved, axis: SweepAxis, x: f64) -> spdc_core::Result<SourceSetup> {
    let mut s = cfg.setup.clone();
    let ratio = cfg.ratio();
    match axis {
        SweepAxis::Ratio => s.pump.waist = [x * s.signal.waist[0]; 2],
        SweepAxis::Waist => {
            s.signal.waist = [x; 2];
            s.idler.waist = [x; 2];
            s.pump.waist = [ratio * x; 2];
        }
        SweepAxis::Alpha => {
            s.geometry.alpha_i = x;
            s.geometry.alpha_s = x;
        }
    }
    s.validate()?;
    if cfg.raw.setup.cut_angle.is_none() && axis == SweepAxis::Alpha {
        s = s.phase_matched()?;
    }
    Ok(s)
}

pub fn brightness(cfg: &Resolved) -> Result<Outcome, CliError> {
    let (axis, grid) = match &cfg.sweep {
        Some(g) => (g.axis, g.values.clone()),
        None => (SweepAxis::Ratio, vec![cfg.ratio()]),
    };
    let form = form_for(cfg.model, &cfg.setup)?;
    let domain = FrequencyDomain::for_setup(&cfg.setup)
        .with_filter(cfg.filter)
        .with_rel_tol(cfg.raw.computation.rel_tol);
    let points = brightness_sweep(
        |x| Ok(SetupAmplitude::new(vary(cfg, axis, x)?, form)),
        &domain,
        axis,
        &grid,
    )?;
    let top = points
        .iter()
        .filter_map(|p| p.result.as_ref().ok())
        .map(|r| r.value)
        .fold(0.0, f64::max);
    let columns = vec![
        axis.column(),
        "brightness",
        "normalized",
        "abs_error",
        "evaluations",
        "status",
    ];
    let mut table = Table::new(
        columns,
        provenance(
            "brightness",
            Some(cfg),
            vec![format!("amplitude form: {form:?}")],
        )?,
    );
    let mut failures = 0;
    for p in points {
        match p.result {
            Ok(r) => table.push(vec![
                p.param.into(),
                r.value.into(),
                (r.value / top).into(),
                r.abs_error.into(),
                r.evaluations.into(),
                "ok".into(),
            ]),
            Err(e) => {
                failures += 1;
                table.push(vec![
                    p.param.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    0usize.into(),
                    format!("failed: {e}").into(),
                ]);
            }
        }
    }
    Ok(Outcome { table, failures })
}

pub const SWEEP_COLUMNS: [&str; 13] = [
    "figure",
    "model",
    "length_um",
    "waist_um",
    "alpha_rad",
    "theta_rad",
    "r_star",
    "r_uncertainty",
    "brightness",
    "normalized",
    "abs_error",
    "evaluations",
    "status",
];

fn sweep_cells(r: &SweepRow) -> Vec<Cell> {
    vec![
        (r.figure as usize).into(),
        r.model.tag().into(),
        r.length.into(),
        r.waist.into(),
        r.alpha.into(),
        r.theta.into(),
        r.r_star.into(),
        r.r_uncertainty.into(),
        r.brightness.into(),
        r.normalized.into(),
        r.abs_error.into(),
        r.evaluations.into(),
        r.status.to_string().into(),
    ]
}

fn plan_lines(plan: &SweepPlan) -> Vec<String> {
    let list = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let c = &plan.config;
    vec![
        format!("figure {}", plan.figure),
        format!("models: {}", plan.models.iter().map(|m| m.tag()).collect::<Vec<_>>().join(" ")),
        format!("lengths_um: {}", list(&plan.lengths)),
        format!("waists_um: {}", list(&plan.waists)),
        format!("alphas_rad: {}", list(&plan.alphas)),
        format!(
            "crystal {} pump_wavelength_um {} tau_fs {} polarizations {} phi_rad {} rel_tol {} ratio_tol {}",
            c.crystal.name, c.pump_wavelength, c.tau, c.polarizations, c.phi, c.rel_tol, c.ratio_tol
        ),
        window_line(c.crystal.window),
    ]
}

pub fn sweep(
    cfg: Option<&Resolved>,
    figure: Option<u8>,
    tolerance: Option<f64>,
) -> Result<Outcome, CliError> {
    let mut config = cfg
        .map(Resolved::model_config)
        .unwrap_or_else(ModelConfig::bbo);
    if let Some(t) = tolerance {
        config.rel_tol = t;
    }
    let plan = match (figure, cfg) {
        (Some(fig), _) => SweepPlan::preset(fig)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .with_overrides(&SweepOverrides {
                config: Some(config),
                ..SweepOverrides::default()
            }),
        (None, Some(cfg)) => {
            let grid = cfg.sweep.as_ref().ok_or_else(|| {
                CliError::Usage("sweep needs --figure or a [computation.sweep] section".into())
            })?;
            let s = &cfg.setup;
            let (mut waists, mut alphas) = (vec![s.signal.waist[0]], vec![s.geometry.alpha_s]);
            match grid.axis {
                SweepAxis::Waist => waists = grid.values.clone(),
                SweepAxis::Alpha => alphas = grid.values.clone(),
                SweepAxis::Ratio => {
                    return Err(CliError::Usage(
                        "sweep optimizes the ratio; use `brightness` for a ratio grid".into(),
                    ))
                }
            }
            SweepPlan {
                figure: 0,
                models: vec![cfg.model],
                lengths: vec![s.crystal.length],
                waists,
                alphas,
                config,
            }
        }
        (None, None) => return Err(CliError::Usage("sweep needs --figure or --config".into())),
    };
    let rows = plan.run();
    let failures = rows.iter().filter(|r| r.failed()).count();
    let lines = provenance("sweep", cfg, plan_lines(&plan))?;
    let mut table = Table::new(SWEEP_COLUMNS.to_vec(), lines);
    for r in &rows {
        table.push(sweep_cells(r));
    }
    Ok(Outcome { table, failures })
}

/// Report as text or JSON bytes.
pub fn report_bytes(report: &Report, json: bool) -> Result<Vec<u8>, CliError> {
    if json {
        let mut v = serde_json::to_vec_pretty(report)?;
        v.push(b'\n');
        Ok(v)
    } else {
        let mut s = String::new();
        writeln!(s, "{report}").expect("write to string");
        Ok(s.into_bytes())
    }
}
