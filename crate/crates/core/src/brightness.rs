//! Total brightness: the integral of |Ψ|² over the collected frequencies.
//!
//! Integration runs in the rotated coordinates `u = ω_i + ω_s`,
//! `v = ω_i − ω_s` (`dω_i dω_s = ½ du dv`). The pump envelope depends on `u`
//! only and the collection envelope mostly on `v`, so the integral is nested:
//! an adaptive `v` integral inside a `u` integral.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SpdcError};
use crate::geometry::SourceSetup;
use crate::quadrature::{gauss_hermite, integrate, Doubling, QuadValue};
use crate::thinlimit::{psi_thin, psi_thin_perfect};
use crate::units::SPEED_OF_LIGHT;
use crate::wavefunction::{psi_factorized_with, psi_general_with, z_quadrature};

/// Truncation of the pump and collection envelopes, in standard deviations
/// of |Ψ|².
const ENVELOPE_SIGMAS: f64 = 8.0;

/// Something that yields Ψ(ω_i, ω_s).
pub trait Amplitude: Sync {
    fn amplitude(&self, omega_i: f64, omega_s: f64) -> Result<Complex64>;

    /// Standard deviation in `v` of |Ψ|² about `v = 0`, when known.
    fn v_scale(&self) -> Option<f64> {
        None
    }

    /// True when |Ψ(ω_i, ω_s)| = |Ψ(ω_s, ω_i)|, which halves the work.
    fn exchange_symmetric(&self) -> bool {
        false
    }
}

impl<F> Amplitude for F
where
    F: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    fn amplitude(&self, omega_i: f64, omega_s: f64) -> Result<Complex64> {
        self(omega_i, omega_s)
    }
}

/// Amplitude forms available for a [`SourceSetup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeForm {
    ThinPerfectPm,
    ThinSinc,
    Factorized,
    General,
}

/// A setup paired with an amplitude form.
#[derive(Debug, Clone)]
pub struct SetupAmplitude {
    pub setup: SourceSetup,
    pub form: AmplitudeForm,
    pub z_opts: Doubling,
}

impl SetupAmplitude {
    pub fn new(setup: SourceSetup, form: AmplitudeForm) -> Self {
        Self {
            setup,
            form,
            z_opts: z_quadrature(),
        }
    }
}

impl Amplitude for SetupAmplitude {
    fn amplitude(&self, omega_i: f64, omega_s: f64) -> Result<Complex64> {
        let s = &self.setup;
        match self.form {
            AmplitudeForm::ThinPerfectPm => Ok(psi_thin_perfect(s, omega_i, omega_s)),
            AmplitudeForm::ThinSinc => psi_thin(s, omega_i, omega_s),
            AmplitudeForm::Factorized => {
                Ok(psi_factorized_with(s, omega_i, omega_s, &self.z_opts)?.amplitude)
            }
            AmplitudeForm::General => {
                Ok(psi_general_with(s, omega_i, omega_s, &self.z_opts)?.amplitude)
            }
        }
    }

    fn v_scale(&self) -> Option<f64> {
        let g = &self.setup.geometry;
        if (g.alpha_i - g.alpha_s).abs() > 1e-12 || g.alpha_i == 0.0 {
            return None;
        }
        let wbar = (0..2)
            .map(|mu| crate::wavefunction::effective_waist(&self.setup, mu))
            .fold(f64::INFINITY, f64::min);
        Some(SPEED_OF_LIGHT / (wbar * g.alpha_i.sin()))
    }

    /// Identical collected modes at a degenerate center, emitted in the
    /// (x, z) plane or collinearly; the crystal is mirror-symmetric in x.
    fn exchange_symmetric(&self) -> bool {
        let s = &self.setup;
        let g = &s.geometry;
        s.polarizations.signal == s.polarizations.idler
            && s.signal.waist == s.idler.waist
            && s.signal.omega == s.idler.omega
            && g.alpha_i == g.alpha_s
            && (g.alpha_i == 0.0 || g.phi.sin().abs() < 1e-12)
    }
}

/// Collected frequency region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DomainMode {
    /// `ω_b ≤ ω_i, ω_s` and `ω_i + ω_s ≤ ω_t`.
    TransmissionWindow,
    /// `|ω_i − ω_0/2|, |ω_s − ω_0/2| ≤ δ` within the window.
    Filter { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyDomain {
    pub mode: DomainMode,
    /// (ω_b, ω_t), rad/fs.
    pub window: (f64, f64),
    pub omega0: f64,
    pub tau: f64,
    /// Cap on the `v` half-range, in standard deviations set by the amplitude.
    pub v_scale: Option<f64>,
    pub initial_panels: usize,
    pub nodes: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
}

impl FrequencyDomain {
    pub fn window(window: (f64, f64), omega0: f64, tau: f64) -> Self {
        Self {
            mode: DomainMode::TransmissionWindow,
            window,
            omega0,
            tau,
            v_scale: None,
            initial_panels: 2,
            nodes: 10,
            rel_tol: 1e-7,
            abs_tol: 0.0,
            max_evaluations: 1 << 22,
        }
    }

    pub fn filter(window: (f64, f64), omega0: f64, tau: f64, delta: f64) -> Self {
        Self {
            mode: DomainMode::Filter { delta },
            ..Self::window(window, omega0, tau)
        }
    }

    /// Window domain of a setup's crystal and pump.
    pub fn for_setup(setup: &SourceSetup) -> Self {
        Self::window(setup.crystal.window, setup.pump.omega0, setup.pump.tau)
    }

    pub fn with_filter(mut self, delta: Option<f64>) -> Self {
        self.mode = match delta {
            Some(delta) => DomainMode::Filter { delta },
            None => DomainMode::TransmissionWindow,
        };
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_initial_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels;
        self
    }

    pub fn with_v_scale(mut self, scale: Option<f64>) -> Self {
        self.v_scale = scale;
        self
    }

    /// True when (ω_i, ω_s) satisfies every constraint of the domain.
    pub fn contains(&self, omega_i: f64, omega_s: f64) -> bool {
        let (wb, wt) = self.window;
        let slack = 1e-12 * wt;
        let in_window =
            omega_i >= wb - slack && omega_s >= wb - slack && omega_i + omega_s <= wt + slack;
        match self.mode {
            DomainMode::TransmissionWindow => in_window,
            DomainMode::Filter { delta } => {
                let half = 0.5 * self.omega0;
                in_window
                    && (omega_i - half).abs() <= delta + slack
                    && (omega_s - half).abs() <= delta + slack
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (wb, wt) = self.window;
        if !(wb > 0.0 && wt > 2.0 * wb) {
            return Err(SpdcError::InvalidParameter(format!(
                "empty frequency domain: window [{wb}, {wt}] rad/fs"
            )));
        }
        if let DomainMode::Filter { delta } = self.mode {
            if !(delta > 0.0) {
                return Err(SpdcError::InvalidParameter(
                    "filter half-width must be positive".into(),
                ));
            }
        }
        if self.initial_panels == 0 || self.nodes == 0 {
            return Err(SpdcError::InvalidParameter(
                "quadrature needs at least one panel and node".into(),
            ));
        }
        Ok(())
    }

    /// Linear pieces `(slope, intercept)` whose minimum is the `v` half-range.
    fn v_limits(&self, v_cap: Option<f64>) -> Vec<(f64, f64)> {
        let mut out = vec![(1.0, -2.0 * self.window.0)];
        if let Some(cap) = v_cap {
            out.push((0.0, cap));
        }
        if let DomainMode::Filter { delta } = self.mode {
            out.push((-1.0, 2.0 * delta + self.omega0));
            out.push((1.0, 2.0 * delta - self.omega0));
        }
        out
    }

    /// `u` range within `spread` of ω_0, split at the breakpoints of the `v`
    /// half-range.
    fn u_segments(&self, v_cap: Option<f64>, spread: f64) -> Vec<(f64, f64)> {
        let (wb, wt) = self.window;
        let mut lo = (2.0 * wb).max(self.omega0 - spread);
        let mut hi = wt.min(self.omega0 + spread);
        if let DomainMode::Filter { delta } = self.mode {
            lo = lo.max(self.omega0 - 2.0 * delta);
            hi = hi.min(self.omega0 + 2.0 * delta);
        }
        if hi <= lo {
            return Vec::new();
        }
        let limits = self.v_limits(v_cap);
        let mut cuts = vec![lo, hi];
        for (i, &(s1, c1)) in limits.iter().enumerate() {
            for &(s2, c2) in &limits[i + 1..] {
                if s1 != s2 {
                    let u = (c2 - c1) / (s1 - s2);
                    if u > lo && u < hi {
                        cuts.push(u);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * hi);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Integrated brightness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrightnessResult {
    pub value: f64,
    /// Change of the value under the last panel doubling.
    pub abs_error: f64,
    pub evaluations: usize,
    pub domain: FrequencyDomain,
}

/// Inner integral value carried with its own error estimate through the
/// outer rule.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Carried {
    value: f64,
    error: f64,
}

impl std::ops::Add for Carried {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

impl std::ops::Sub for Carried {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            value: self.value - o.value,
            error: self.error - o.error,
        }
    }
}

impl std::ops::Mul<f64> for Carried {
    type Output = Self;
    fn mul(self, w: f64) -> Self {
        Self {
            value: self.value * w,
            error: self.error * w,
        }
    }
}

impl QuadValue for Carried {
    fn zero() -> Self {
        Self {
            value: 0.0,
            error: 0.0,
        }
    }
    fn magnitude(self) -> f64 {
        self.value.abs()
    }
}

/// Gauss–Hermite orders of the pump-weighted `u` rule.
const HERMITE_ORDERS: (usize, usize) = (12, 24);

/// ∫∫ |Ψ|² dω_i dω_s over the domain.
///
/// The inner `v` integral is a doubling Gauss–Legendre rule. When the pump
/// envelope is not cut by the domain, the outer `u` integral uses
/// Gauss–Hermite rules weighted by that envelope; otherwise, or if those
/// disagree, it falls back to doubling Gauss–Legendre. The reported error is
/// the outer refinement change plus the integrated inner changes.
pub fn total_brightness<A: Amplitude + ?Sized>(
    psi: &A,
    domain: &FrequencyDomain,
) -> Result<BrightnessResult> {
    domain.validate()?;
    let scale = match (psi.v_scale(), domain.v_scale) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    let v_cap = scale.map(|s| ENVELOPE_SIGMAS * s);
    let limits = domain.v_limits(v_cap);
    let folded = psi.exchange_symmetric();
    let outer = Doubling {
        initial_panels: domain.initial_panels,
        nodes: domain.nodes,
        rel_tol: domain.rel_tol,
        abs_tol: domain.abs_tol,
        max_panels: 1 << 12,
    };
    let inner = Doubling {
        rel_tol: 0.1 * domain.rel_tol,
        abs_tol: 0.1 * domain.abs_tol,
        ..outer
    };
    let mut evaluations = 0usize;
    let mut v_integral = |u: f64| -> Result<Carried> {
        let half = limits
            .iter()
            .map(|(s, c)| s * u + c)
            .fold(f64::INFINITY, f64::min);
        if half <= 0.0 {
            return Ok(Carried::zero());
        }
        let lo = if folded { 0.0 } else { -half };
        let r = integrate(
            |v| Ok(psi.amplitude(0.5 * (u + v), 0.5 * (u - v))?.norm_sqr()),
            lo,
            half,
            &inner,
        )?;
        evaluations += r.evaluations;
        if evaluations > domain.max_evaluations {
            return Err(SpdcError::Quadrature {
                value: f64::NAN,
                error: f64::NAN,
                evaluations,
            });
        }
        let k = if folded { 2.0 } else { 1.0 };
        Ok(Carried {
            value: k * r.value,
            error: k * r.abs_error,
        })
    };
    let (value, error) = match pump_weighted(domain, v_cap, &mut v_integral)? {
        Some(hit) => hit,
        None => {
            let mut value = 0.0;
            let mut error = 0.0;
            for (a, b) in domain.u_segments(v_cap, 0.5 * ENVELOPE_SIGMAS / domain.tau) {
                let seg = integrate(&mut v_integral, a, b, &outer)?;
                value += seg.value.value;
                error += seg.abs_error + seg.value.error.abs();
            }
            (value, error)
        }
    };
    Ok(BrightnessResult {
        value: 0.5 * value,
        abs_error: 0.5 * error,
        evaluations,
        domain: *domain,
    })
}

/// Outer integral with Gauss–Hermite rules for the weight
/// `e^{−2τ²(u−ω_0)²}`; `None` when the nodes would leave a single
/// untruncated segment or the two orders disagree.
fn pump_weighted<G>(
    domain: &FrequencyDomain,
    v_cap: Option<f64>,
    g: &mut G,
) -> Result<Option<(f64, f64)>>
where
    G: FnMut(f64) -> Result<Carried>,
{
    let scale = 1.0 / (std::f64::consts::SQRT_2 * domain.tau);
    let (coarse_n, fine_n) = HERMITE_ORDERS;
    let reach = gauss_hermite(fine_n).last().map_or(0.0, |p| p.0) * scale * (1.0 + 1e-9);
    let segments = domain.u_segments(v_cap, reach);
    if segments != [(domain.omega0 - reach, domain.omega0 + reach)] {
        return Ok(None);
    }
    let mut rule = |n: usize| -> Result<Carried> {
        let mut acc = Carried::zero();
        for &(x, w) in gauss_hermite(n) {
            acc = acc + g(domain.omega0 + scale * x)? * (w * (x * x).exp() * scale);
        }
        Ok(acc)
    };
    let coarse = rule(coarse_n)?;
    let fine = rule(fine_n)?;
    let change = (fine.value - coarse.value).abs();
    if change > domain.abs_tol.max(domain.rel_tol * fine.value.abs()) {
        return Ok(None);
    }
    Ok(Some((fine.value, change + fine.error.abs())))
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Ratio,
    Waist,
    Alpha,
}

impl SweepAxis {
    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::Ratio => "r",
            SweepAxis::Waist => "w_um",
            SweepAxis::Alpha => "alpha_rad",
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub param: f64,
    pub result: Result<BrightnessResult>,
}

/// Brightness at every grid value, evaluated in parallel; failures are kept
/// per point.
pub fn brightness_sweep<A, F>(
    factory: F,
    domain: &FrequencyDomain,
    axis: SweepAxis,
    grid: &[f64],
) -> Result<Vec<SweepPoint>>
where
    A: Amplitude,
    F: Fn(f64) -> Result<A> + Sync,
{
    if grid.is_empty() {
        return Err(SpdcError::InvalidParameter(format!(
            "empty {} grid",
            axis.column()
        )));
    }
    Ok(grid
        .par_iter()
        .map(|&param| {
            let result = factory(param).and_then(|psi| total_brightness(&psi, domain));
            if let Err(e) = &result {
                log::warn!("{} = {param}: {e}", axis.column());
            }
            SweepPoint { param, result }
        })
        .collect())
}

/// Gaussian in `(u, v)` whose brightness over an unbounded domain is 1.
pub fn gaussian_test_amplitude(
    omega0: f64,
    sigma_u: f64,
    sigma_v: f64,
) -> impl Fn(f64, f64) -> Result<Complex64> + Sync {
    move |wi: f64, ws: f64| {
        let u = wi + ws - omega0;
        let v = wi - ws;
        let norm = (PI * sigma_u * sigma_v).sqrt().recip();
        Ok(Complex64::new(
            norm * (-0.25 * (u * u / (sigma_u * sigma_u) + v * v / (sigma_v * sigma_v))).exp(),
            0.0,
        ))
    }
}
