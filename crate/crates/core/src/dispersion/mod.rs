//! Uniaxial-crystal dispersion: principal indices, the angle-dependent
//! extraordinary index, and the longitudinal wavevector component `k_z`
//! together with its first and second transverse derivatives.
//!
//! The crystal frame has its optical axis in the (y, z) plane at angle
//! `cut_angle` from the pump propagation direction `z`.

mod file;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::units::{wavelength_from_omega, SPEED_OF_LIGHT};

pub use file::{CrystalFile, PolingSpec, SellmeierSpec, TransmissionSpec};

/// Relative guard on the square-root radicand of `k_z` below which the
/// paraxial derivatives are considered ill-conditioned.
pub const EVANESCENCE_GUARD: f64 = 1e-6;

/// Generalized Sellmeier polynomial in the vacuum wavelength (µm):
///
/// `n² = constant + Σ b/(λ² − c) + Σ b·λ²/(λ² − c) + quadratic·λ²`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sellmeier {
    pub constant: f64,
    /// `[b, c]` pairs of `b / (λ² − c)` terms.
    #[serde(default)]
    pub poles: Vec<[f64; 2]>,
    /// `[b, c]` pairs of `b λ² / (λ² − c)` terms.
    #[serde(default)]
    pub resonances: Vec<[f64; 2]>,
    #[serde(default)]
    pub quadratic: f64,
}

impl Sellmeier {
    /// Dispersionless index `n` at every wavelength.
    pub fn constant_index(n: f64) -> Self {
        Self {
            constant: n * n,
            ..Self::default()
        }
    }

    pub fn index_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let poles: f64 = self.poles.iter().map(|[b, c]| b / (l2 - c)).sum();
        let res: f64 = self.resonances.iter().map(|[b, c]| b * l2 / (l2 - c)).sum();
        self.constant + poles + res + self.quadratic * l2
    }

    pub fn index(&self, lambda_um: f64) -> f64 {
        self.index_squared(lambda_um).sqrt()
    }
}

/// Quasi-phase-matching grating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poling {
    /// Period Λ in µm.
    pub period: f64,
    /// Grating order m.
    pub order: i32,
}

/// Polarization eigenmode of a uniaxial crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

impl Polarization {
    pub fn symbol(self) -> char {
        match self {
            Polarization::Ordinary => 'o',
            Polarization::Extraordinary => 'e',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            'o' => Some(Polarization::Ordinary),
            'e' => Some(Polarization::Extraordinary),
            _ => None,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Transverse wavevector (k_x, k_y) in rad/µm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TransverseWavevector {
    pub kx: f64,
    pub ky: f64,
}

impl TransverseWavevector {
    pub const ZERO: Self = Self { kx: 0.0, ky: 0.0 };

    pub fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    /// Component along axis 0 (x) or 1 (y).
    pub fn component(self, axis: usize) -> f64 {
        if axis == 0 {
            self.kx
        } else {
            self.ky
        }
    }

    pub fn from_components(c: [f64; 2]) -> Self {
        Self::new(c[0], c[1])
    }

    pub fn norm(self) -> f64 {
        self.kx.hypot(self.ky)
    }
}

impl Add for TransverseWavevector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.kx + o.kx, self.ky + o.ky)
    }
}

impl Sub for TransverseWavevector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.kx - o.kx, self.ky - o.ky)
    }
}

impl Neg for TransverseWavevector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.kx, -self.ky)
    }
}

impl Mul<f64> for TransverseWavevector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.kx * s, self.ky * s)
    }
}

/// Per-polarization parameters of the unified `k_z` expression
/// `k_z = β k_y + sqrt((nω/c)² − (γ k_x)² − (γ n/n_o k_y)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub n: f64,
    pub gamma: f64,
    pub beta: f64,
    pub n_o: f64,
}

impl WaveParams {
    fn gy2(&self) -> f64 {
        let g = self.gamma * self.n / self.n_o;
        g * g
    }
}

/// `k_z` with its transverse gradient and Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KzJet {
    pub kz: f64,
    pub k1: [f64; 2],
    pub k2: [[f64; 2]; 2],
}

/// Uniaxial crystal: dispersion data plus geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalModel {
    pub name: String,
    pub ordinary: Sellmeier,
    pub extraordinary: Sellmeier,
    /// (ω_b, ω_t) in rad/fs, ω_b < ω_t.
    pub window: (f64, f64),
    /// Crystal length L in µm.
    pub length: f64,
    pub poling: Option<Poling>,
    /// Angle θ between the optical axis and z, rad.
    pub cut_angle: f64,
}

impl CrystalModel {
    pub fn new(
        name: impl Into<String>,
        ordinary: Sellmeier,
        extraordinary: Sellmeier,
        window: (f64, f64),
        length: f64,
        poling: Option<Poling>,
        cut_angle: f64,
    ) -> Result<Self> {
        let crystal = Self {
            name: name.into(),
            ordinary,
            extraordinary,
            window,
            length,
            poling,
            cut_angle,
        };
        crystal.validate()?;
        Ok(crystal)
    }

    /// The bundled BBO definition.
    pub fn bbo() -> Self {
        CrystalFile::parse(include_str!("../../data/bbo.toml"))
            .and_then(|f| f.into_model())
            .expect("bundled BBO definition is valid")
    }

    /// Checks the type invariants.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(SpdcError::CrystalFile(format!(
                "transmission window must satisfy 0 < omega_b < omega_t, got ({lo}, {hi})"
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(SpdcError::CrystalFile(format!(
                "crystal length must be positive, got {}",
                self.length
            )));
        }
        if let Some(p) = self.poling {
            if !(p.period > 0.0 && p.period.is_finite()) {
                return Err(SpdcError::CrystalFile(format!(
                    "poling period must be positive, got {}",
                    p.period
                )));
            }
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.cut_angle) {
            return Err(SpdcError::CrystalFile(format!(
                "cut angle must lie in [0, pi/2], got {}",
                self.cut_angle
            )));
        }
        const SAMPLES: usize = 65;
        for i in 0..SAMPLES {
            let omega = lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64;
            let lambda = wavelength_from_omega(omega);
            for (label, s) in [
                ("ordinary", &self.ordinary),
                ("extraordinary", &self.extraordinary),
            ] {
                let n = s.index(lambda);
                if !(n > 1.0 && n < 3.0) {
                    return Err(SpdcError::CrystalFile(format!(
                        "{label} index {n} at {lambda:.4} um is outside (1, 3)"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    pub fn with_cut_angle(mut self, theta: f64) -> Self {
        self.cut_angle = theta;
        self
    }

    pub fn with_poling(mut self, poling: Option<Poling>) -> Self {
        self.poling = poling;
        self
    }

    /// `m·2π/Λ`, zero for unpoled crystals.
    pub fn grating_wavenumber(&self) -> f64 {
        self.poling
            .map(|p| p.order as f64 * 2.0 * std::f64::consts::PI / p.period)
            .unwrap_or(0.0)
    }

    fn check_window(&self, omega: f64) -> Result<()> {
        let (lo, hi) = self.window;
        let slack = 1e-12 * hi;
        if omega.is_finite() && omega >= lo - slack && omega <= hi + slack {
            Ok(())
        } else {
            Err(SpdcError::OutOfWindow { omega, lo, hi })
        }
    }

    /// Principal indices `(n_o, n_e)` at angular frequency `omega`.
    pub fn refractive_indices(&self, omega: f64) -> Result<(f64, f64)> {
        self.check_window(omega)?;
        let lambda = wavelength_from_omega(omega);
        Ok((
            self.ordinary.index(lambda),
            self.extraordinary.index(lambda),
        ))
    }

    /// Extraordinary index for propagation at angle `theta` to the optical axis.
    pub fn index_at_angle(&self, omega: f64, theta: f64) -> Result<f64> {
        let (n_o, n_e) = self.refractive_indices(omega)?;
        Ok(index_at_angle(n_o, n_e, theta))
    }

    /// Parameters (n, γ, β) of the unified `k_z` expression.
    pub fn wave_params(&self, omega: f64, pol: Polarization) -> Result<WaveParams> {
        let (n_o, n_e) = self.refractive_indices(omega)?;
        Ok(match pol {
            Polarization::Ordinary => WaveParams {
                n: n_o,
                gamma: 1.0,
                beta: 0.0,
                n_o,
            },
            Polarization::Extraordinary => {
                let theta = self.cut_angle;
                let n = index_at_angle(n_o, n_e, theta);
                let gamma = n / n_e;
                let beta = (gamma * gamma - (n / n_o).powi(2)) * theta.sin() * theta.cos();
                WaveParams {
                    n,
                    gamma,
                    beta,
                    n_o,
                }
            }
        })
    }

    /// Longitudinal wavevector component (rad/µm).
    pub fn kz(&self, k: TransverseWavevector, omega: f64, pol: Polarization) -> Result<f64> {
        let p = self.wave_params(omega, pol)?;
        let radicand = radicand(&p, k, omega);
        if radicand < 0.0 {
            return Err(SpdcError::Evanescent {
                radicand,
                kx: k.kx,
                ky: k.ky,
            });
        }
        Ok(p.beta * k.ky + radicand.sqrt())
    }

    /// `k_z` and its closed-form first and second derivatives at `k`.
    pub fn kz_jet(&self, k: TransverseWavevector, omega: f64, pol: Polarization) -> Result<KzJet> {
        let p = self.wave_params(omega, pol)?;
        let r = radicand(&p, k, omega);
        let threshold = EVANESCENCE_GUARD * (p.n * omega / SPEED_OF_LIGHT).powi(2);
        if r < threshold {
            return Err(SpdcError::IllConditioned {
                radicand: r,
                threshold,
            });
        }
        let s = r.sqrt();
        let s3 = s * r;
        let g2 = p.gamma * p.gamma;
        let gy2 = p.gy2();
        let (kx, ky) = (k.kx, k.ky);
        let k1 = [-g2 * kx / s, p.beta - gy2 * ky / s];
        let xx = -g2 * (r + g2 * kx * kx) / s3;
        let xy = -g2 * gy2 * kx * ky / s3;
        let yy = -gy2 * (r + gy2 * ky * ky) / s3;
        Ok(KzJet {
            kz: p.beta * ky + s,
            k1,
            k2: [[xx, xy], [xy, yy]],
        })
    }
}

/// `1/n_θ² = sin²θ/n_e² + cos²θ/n_o²`.
pub fn index_at_angle(n_o: f64, n_e: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let inv = s * s / (n_e * n_e) + c * c / (n_o * n_o);
    inv.sqrt().recip()
}

fn radicand(p: &WaveParams, k: TransverseWavevector, omega: f64) -> f64 {
    let k0 = p.n * omega / SPEED_OF_LIGHT;
    k0 * k0 - (p.gamma * k.kx).powi(2) - p.gy2() * k.ky * k.ky
}
