//! Closed-form and one-dimensional results of the thin-crystal limit.
//!
//! All brightness values carry the factor L² and unit normalization, so only
//! ratios and argmaxes are physically meaningful.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use libm::{erf, lgamma};
use num_complex::Complex64;

use crate::dispersion::{CrystalModel, Polarization};
use crate::error::{Result, SpdcError};
use crate::geometry::SourceSetup;
use crate::quadrature::{integrate_real, Doubling};
use crate::units::{omega_from_wavelength, SPEED_OF_LIGHT};
use crate::wavefunction::{
    expansion_center, paraxial_params, pump_spectral_amplitude, ParaxialBundle,
};

/// `erf(y)/y`, continuous at zero.
pub fn erf_over_x(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        let y2 = y * y;
        2.0 / PI.sqrt() * (1.0 - y2 / 3.0 + y2 * y2 / 10.0)
    } else {
        erf(y) / y
    }
}

/// Symmetric-waist configuration `w_i = w_s = w`, `w_p = r w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinConfig {
    pub ratio: f64,
    /// Collection waist w, µm.
    pub waist: f64,
    /// Collection angle α, rad.
    pub alpha: f64,
    pub tau: f64,
    pub omega0: f64,
    /// (ω_b, ω_t).
    pub window: (f64, f64),
    /// Filter half-width δ, rad/fs.
    pub filter: Option<f64>,
    pub length: f64,
    /// Pump walk-off slope at ω_0.
    pub beta_p: f64,
}

impl ThinConfig {
    /// Configuration at the crystal's cut angle, window and length.
    pub fn new(crystal: &CrystalModel, pump_wavelength: f64, tau: f64) -> Result<Self> {
        let omega0 = omega_from_wavelength(pump_wavelength);
        let beta_p = crystal
            .wave_params(omega0, Polarization::Extraordinary)?
            .beta;
        Ok(Self {
            ratio: FRAC_1_SQRT_2,
            waist: 10.0,
            alpha: 0.0,
            tau,
            omega0,
            window: crystal.window,
            filter: None,
            length: crystal.length,
            beta_p,
        })
    }

    pub fn with_ratio(mut self, r: f64) -> Self {
        self.ratio = r;
        self
    }

    pub fn with_waist(mut self, w: f64) -> Self {
        self.waist = w;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_filter(mut self, delta: Option<f64>) -> Self {
        self.filter = delta;
        self
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta_p = beta;
        self
    }

    /// `ρ = r²/(1+2r²)`, so that `w̄² = ρ w²`.
    pub fn rho(&self) -> f64 {
        let r2 = self.ratio * self.ratio;
        r2 / (1.0 + 2.0 * r2)
    }

    pub fn wbar(&self) -> f64 {
        self.waist * self.rho().sqrt()
    }

    /// `α w̄ (ω_0 − 2ω_b)/c`, the parameter separating the collinear and
    /// large-angle regimes.
    pub fn angle_parameter(&self) -> f64 {
        self.alpha * self.wbar() * (self.omega0 - 2.0 * self.window.0) / SPEED_OF_LIGHT
    }

    /// Size of the series expansion parameter; the series is used below 4.
    pub fn series_parameter(&self) -> f64 {
        let s = self.alpha * self.waist / (self.tau * SPEED_OF_LIGHT);
        self.rho() * s * s * (self.tau * (self.window.1 - 2.0 * self.window.0)).powi(2)
    }

    /// Argument scale `a = w̄α/(√2 c)` of the erf.
    fn erf_scale(&self) -> f64 {
        self.wbar() * self.alpha / (SQRT_2 * SPEED_OF_LIGHT)
    }

    /// `L² r²/((1+2r²)² w² τ)`, common to the collinear-type forms.
    fn collinear_factor(&self) -> f64 {
        let r2 = self.ratio * self.ratio;
        self.length.powi(2) * r2 / ((1.0 + 2.0 * r2).powi(2) * self.waist.powi(2) * self.tau)
    }

    /// `32π/√2 · τ w̄⁴/(r² w⁶) · L²`.
    fn thin_prefactor(&self) -> f64 {
        let wbar2 = self.rho() * self.waist * self.waist;
        32.0 * PI / SQRT_2 * self.tau * wbar2 * wbar2 / (self.ratio.powi(2) * self.waist.powi(6))
            * self.length.powi(2)
    }
}

/// Perfect-phase-matching thin amplitude scaled by `sinc(LΔk̄/2)`.
pub fn psi_thin(setup: &SourceSetup, omega_i: f64, omega_s: f64) -> Result<Complex64> {
    let c = expansion_center(setup, omega_i, omega_s);
    let dk = setup.phase_mismatch(c.idler, omega_i, c.signal, omega_s)?;
    let l = setup.crystal.length;
    Ok(psi_thin_perfect(setup, omega_i, omega_s) * sinc(0.5 * l * dk))
}

/// Thin amplitude with the sinc set to one.
pub fn psi_thin_perfect(setup: &SourceSetup, omega_i: f64, omega_s: f64) -> Complex64 {
    let c = expansion_center(setup, omega_i, omega_s);
    let l = setup.crystal.length;
    let pump = pump_spectral_amplitude(omega_i + omega_s, setup.pump.omega0, setup.pump.tau);
    let mut out = 4.0 * (2.0 * PI).sqrt() * l * pump;
    let sum = c.k0_i + c.k0_s;
    for mu in 0..2 {
        let wbar = c.wbar[mu];
        let [wp, wi, ws] = setup.waists(mu);
        out *= (wbar * wbar / (wp * wi * ws)).sqrt()
            * (-0.25 * wbar * wbar * sum.component(mu).powi(2)).exp();
    }
    Complex64::new(out, 0.0)
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// First-order-in-ξ amplitude under longitudinal perfect phase matching.
pub fn psi_first_order_xi(setup: &SourceSetup, omega_i: f64, omega_s: f64) -> Result<Complex64> {
    let bundle = paraxial_params(setup, omega_i, omega_s)?;
    Ok(psi_first_order_xi_from_bundle(setup, &bundle))
}

/// As [`psi_first_order_xi`], from a precomputed bundle; only `A_µ`, the
/// waists and the suppression enter.
pub fn psi_first_order_xi_from_bundle(setup: &SourceSetup, bundle: &ParaxialBundle) -> Complex64 {
    let pump = pump_spectral_amplitude(
        bundle.omega_i + bundle.omega_s,
        setup.pump.omega0,
        setup.pump.tau,
    );
    let a = bundle.axes[0].a + bundle.axes[1].a;
    let mut out = 2.0 * PI * SQRT_2 * bundle.length * pump * erf_over_x(a.sqrt());
    for mu in 0..2 {
        let ax = &bundle.axes[mu];
        let w: f64 = (0..3).map(|b| bundle.beams[b][mu].waist).product();
        out *= ax.wbar * (-ax.suppression).exp() / w.sqrt();
    }
    Complex64::new(out, 0.0)
}

/// Location `y*` of the peak of `e^{−2(y−y0)²} y^{2n+1}`.
fn peak(n: usize, y0: f64) -> f64 {
    0.5 * (y0 + (y0 * y0 + 2.0 * (2 * n + 1) as f64).sqrt())
}

/// `∫_0^Y e^{−2(y−y0)²} y g(y) dy` restricted to the support of the peak.
fn peaked_integral(n: usize, cfg: &ThinConfig, g: impl Fn(f64) -> f64) -> Result<f64> {
    let y0 = cfg.tau * (cfg.omega0 - 2.0 * cfg.window.0);
    let upper = cfg.tau * (cfg.window.1 - 2.0 * cfg.window.0);
    let c = peak(n, y0);
    let lo = (c - 12.0).max(0.0);
    let hi = (c + 12.0).min(upper);
    if hi <= lo {
        return Ok(0.0);
    }
    let opts = Doubling::default()
        .with_rel_tol(1e-13)
        .with_initial_panels(4);
    Ok(integrate_real(
        |y| (-2.0 * (y - y0).powi(2)).exp() * y * g(y),
        lo,
        hi,
        &opts,
    )?
    .value)
}

/// `d_n = ∫_0^{τ(ω_t−2ω_b)} e^{−2(y+τ(2ω_b−ω_0))²} y^{2n+1} dy`.
pub fn d_coefficient(n: usize, cfg: &ThinConfig) -> Result<f64> {
    peaked_integral(n, cfg, |y| y.powi(2 * n as i32))
}

/// Zeroth-order (collinear) brightness.
pub fn brightness_collinear(cfg: &ThinConfig) -> Result<f64> {
    let d0 = d_coefficient(0, cfg)?;
    Ok(32.0 * (2.0 * PI).sqrt() * cfg.collinear_factor() * d0)
}

/// Large-angle brightness, erf replaced by its asymptote.
pub fn brightness_large_angle(cfg: &ThinConfig) -> f64 {
    let r = cfg.ratio;
    let (wb, wt) = cfg.window;
    let s2t = SQRT_2 * cfg.tau;
    let bracket = erf(s2t * (cfg.omega0 - 2.0 * wb)) - erf(s2t * (cfg.omega0 - wt));
    8.0 * SQRT_2 * cfg.length.powi(2) * SPEED_OF_LIGHT * PI.powf(1.5) * r
        / ((1.0 + 2.0 * r * r).powf(1.5) * cfg.waist.powi(3) * cfg.alpha)
        * bracket
}

/// Truncated Maclaurin series of the thin brightness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Magnitude of the first omitted term.
    pub remainder_bound: f64,
    pub terms: usize,
}

/// Series through order `n_max`.
///
/// Fails when the first omitted term exceeds the partial sum, or when the
/// alternating terms grow so large relative to the sum that more than ten
/// digits cancel.
pub fn brightness_series(cfg: &ThinConfig, n_max: usize) -> Result<SeriesValue> {
    let d0 = d_coefficient(0, cfg)?;
    let base = 32.0 * (2.0 * PI).sqrt() * cfg.collinear_factor();
    let b = cfg.erf_scale() / cfg.tau;
    let term = |n: usize| -> Result<f64> {
        if n == 0 {
            return Ok(base * d0);
        }
        let lf = lgamma(n as f64 + 1.0);
        let scaled = peaked_integral(n, cfg, |y| {
            if y <= 0.0 || b == 0.0 {
                0.0
            } else {
                (2.0 * n as f64 * (b * y).ln() - lf).exp()
            }
        })?;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        Ok(base * sign * scaled / (2 * n + 1) as f64)
    };
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    for n in 0..=n_max {
        let t = term(n)?;
        largest = largest.max(t.abs());
        sum += t;
    }
    let remainder_bound = term(n_max + 1)?.abs();
    if remainder_bound > sum.abs() {
        return Err(SpdcError::SeriesDivergent(format!(
            "terms still growing after {} terms at alpha = {} rad",
            n_max + 1,
            cfg.alpha
        )));
    }
    if largest > 1e10 * sum.abs() {
        return Err(SpdcError::SeriesDivergent(format!(
            "largest term {largest:e} against partial sum {sum:e} at alpha = {} rad",
            cfg.alpha
        )));
    }
    Ok(SeriesValue {
        value: sum,
        remainder_bound,
        terms: n_max + 1,
    })
}

/// Series summed until the next term is below `rel_tol` of the sum.
pub fn brightness_series_converged(cfg: &ThinConfig, rel_tol: f64) -> Result<SeriesValue> {
    let mut n = 4;
    loop {
        let s = brightness_series(cfg, n)?;
        if s.remainder_bound <= rel_tol * s.value.abs() {
            return Ok(s);
        }
        if n >= 512 {
            return Err(SpdcError::SeriesDivergent(format!(
                "remainder {:e} after {} terms",
                s.remainder_bound, s.terms
            )));
        }
        n *= 2;
    }
}

/// Thin perfect-phase-matching brightness by 1-D quadrature over the pump
/// sum frequency, with the transmission window of the config.
pub fn brightness_exact_thin(cfg: &ThinConfig) -> Result<f64> {
    let (wb, wt) = cfg.window;
    let a = cfg.erf_scale();
    let spread = 6.0 / cfg.tau;
    let lo = (2.0 * wb).max(cfg.omega0 - spread);
    let hi = wt.min(cfg.omega0 + spread);
    if hi <= lo {
        return Ok(0.0);
    }
    let tau2 = cfg.tau * cfg.tau;
    let opts = Doubling::default()
        .with_rel_tol(1e-12)
        .with_initial_panels(4);
    let integral = integrate_real(
        |u| {
            let x = u - 2.0 * wb;
            (-2.0 * tau2 * (u - cfg.omega0).powi(2)).exp() * x * erf_over_x(a * x)
        },
        lo,
        hi,
        &opts,
    )?;
    Ok(cfg.thin_prefactor() * integral.value)
}

/// Picks the series below the switchover parameter and quadrature above.
pub fn brightness_thin(cfg: &ThinConfig) -> Result<f64> {
    if cfg.series_parameter() < 4.0 {
        if let Ok(s) = brightness_series_converged(cfg, 1e-12) {
            return Ok(s.value);
        }
    }
    brightness_exact_thin(cfg)
}

/// Filtered brightness: quadrature value and third-order closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredBrightness {
    pub exact: f64,
    pub third_order: f64,
}

pub fn brightness_filtered(cfg: &ThinConfig) -> Result<FilteredBrightness> {
    let delta = cfg.filter.filter(|d| *d > 0.0).ok_or_else(|| {
        SpdcError::InvalidParameter("filtered brightness needs a positive filter half-width".into())
    })?;
    let a = cfg.erf_scale();
    let tau2 = cfg.tau * cfg.tau;
    let opts = Doubling::default()
        .with_rel_tol(1e-12)
        .with_initial_panels(4);
    let hi = (2.0 * delta).min(8.0 / cfg.tau);
    let half = integrate_real(
        |u| {
            let x = 2.0 * delta - u;
            (-2.0 * tau2 * u * u).exp() * x * erf_over_x(a * x)
        },
        0.0,
        hi,
        &opts,
    )?;
    let exact = cfg.thin_prefactor() * 2.0 * half.value;
    let r2 = cfg.ratio * cfg.ratio;
    let third_order = 128.0 * (2.0 * PI).sqrt() * cfg.length.powi(2) * cfg.tau * delta * delta * r2
        / (cfg.waist.powi(2) * (1.0 + 2.0 * r2).powi(2))
        * (1.0
            - (cfg.alpha * cfg.waist * delta).powi(2) * r2
                / (3.0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT * (1.0 + 2.0 * r2)));
    Ok(FilteredBrightness { exact, third_order })
}

/// Rate at emission azimuth φ for elliptic and unequal waists, integrated
/// over all frequencies, up to a φ-independent factor.
///
/// `waists[mu]` is `[w_p, w_i, w_s]` on axis `mu`.
pub fn anisotropic_rate(phi: f64, waists: [[f64; 3]; 2]) -> f64 {
    let wbar2 = waists.map(|w| 1.0 / w.iter().map(|x| x.powi(-2)).sum::<f64>());
    let (s, c) = phi.sin_cos();
    let mut out = (wbar2[0] * c * c + wbar2[1] * s * s).sqrt().recip();
    for mu in 0..2 {
        out *= wbar2[mu] / waists[mu].iter().product::<f64>();
    }
    out
}

/// Set of optimal azimuths for [`anisotropic_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalPhi {
    /// φ = (2n+1)π/2.
    OddHalfPi,
    /// φ = nπ.
    MultipleOfPi,
    /// Every φ.
    Any,
}

impl OptimalPhi {
    pub fn representative(self) -> f64 {
        match self {
            OptimalPhi::OddHalfPi => 0.5 * PI,
            _ => 0.0,
        }
    }
}

pub fn optimal_phi(waists: [[f64; 3]; 2]) -> OptimalPhi {
    let wbar2 = waists.map(|w| 1.0 / w.iter().map(|x| x.powi(-2)).sum::<f64>());
    let rel = (wbar2[0] - wbar2[1]) / (wbar2[0] + wbar2[1]);
    if rel.abs() < 1e-12 {
        OptimalPhi::Any
    } else if rel > 0.0 {
        OptimalPhi::OddHalfPi
    } else {
        OptimalPhi::MultipleOfPi
    }
}

/// Collinear brightness with the first-order pump walk-off correction,
/// constant indices at ω_0.
pub fn brightness_walkoff_collinear(cfg: &ThinConfig) -> Result<f64> {
    let d0 = d_coefficient(0, cfg)?;
    let r2 = cfg.ratio * cfg.ratio;
    let x = cfg.length * cfg.beta_p / (SQRT_2 * cfg.waist * (1.0 + 2.0 * r2).sqrt());
    let e = erf_over_x(x);
    Ok(8.0 * SQRT_2 * PI.powf(1.5) * cfg.collinear_factor() * d0 * e * e)
}
