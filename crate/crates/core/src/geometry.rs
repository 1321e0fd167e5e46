//! Source configuration, collection wavevectors, phase mismatch and the
//! phase-matching angle solver.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::dispersion::{CrystalModel, Polarization, TransverseWavevector};
use crate::error::{Result, SpdcError};
use crate::units::{omega_from_wavelength, wavelength_from_omega, SPEED_OF_LIGHT};

/// Largest collection angle for which the small-angle rule is trusted.
pub const SMALL_ANGLE_LIMIT: f64 = 0.2;
/// Hard lower bound on waist / wavelength.
pub const PARAXIAL_FLOOR: f64 = 5.0;
/// Waist / wavelength below which a warning is logged.
pub const PARAXIAL_WARNING: f64 = 20.0;

/// Polarizations of pump, signal and idler, written `e->oo` or `e->o+o`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolarizationTriple {
    pub pump: Polarization,
    pub signal: Polarization,
    pub idler: Polarization,
}

impl PolarizationTriple {
    /// Type-I, extraordinary pump into two ordinary photons.
    pub const TYPE_I: Self = Self {
        pump: Polarization::Extraordinary,
        signal: Polarization::Ordinary,
        idler: Polarization::Ordinary,
    };

    pub const ALL_ORDINARY: Self = Self {
        pump: Polarization::Ordinary,
        signal: Polarization::Ordinary,
        idler: Polarization::Ordinary,
    };
}

impl FromStr for PolarizationTriple {
    type Err = SpdcError;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<char> = s
            .chars()
            .filter(|c| !c.is_whitespace() && !matches!(c, '-' | '>' | '+' | '→'))
            .collect();
        let bad = || SpdcError::InvalidParameter(format!("cannot parse polarization triple '{s}'"));
        if letters.len() != 3 {
            return Err(bad());
        }
        let p = |c| Polarization::from_symbol(c).ok_or_else(bad);
        Ok(Self {
            pump: p(letters[0])?,
            signal: p(letters[1])?,
            idler: p(letters[2])?,
        })
    }
}

impl fmt::Display for PolarizationTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}{}", self.pump, self.signal, self.idler)
    }
}

/// Collection directions of the two photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectionGeometry {
    pub alpha_i: f64,
    pub alpha_s: f64,
    /// Azimuth of the emission plane, 0 for (x, z).
    pub phi: f64,
    /// Use `sin α` instead of `α` for the transverse wavevector.
    pub exact_sine: bool,
}

impl CollectionGeometry {
    pub fn collinear() -> Self {
        Self::symmetric(0.0, 0.0)
    }

    pub fn symmetric(alpha: f64, phi: f64) -> Self {
        Self {
            alpha_i: alpha,
            alpha_s: alpha,
            phi,
            exact_sine: false,
        }
    }

    fn transverse(&self, alpha: f64) -> f64 {
        if self.exact_sine {
            alpha.sin()
        } else {
            alpha
        }
    }

    /// Unit vector of the emission plane, `(cos φ, sin φ)`.
    pub fn direction(&self) -> TransverseWavevector {
        TransverseWavevector::new(self.phi.cos(), self.phi.sin())
    }

    /// True when φ is a multiple of π/2, where the transverse axes decouple.
    pub fn is_principal_plane(&self) -> bool {
        let m = (self.phi / FRAC_PI_2).round();
        (self.phi - m * FRAC_PI_2).abs() < 1e-12
    }
}

/// Pump beam: Gaussian spectrum and waists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pump {
    /// Central angular frequency ω_0 (rad/fs).
    pub omega0: f64,
    /// Pulse duration parameter τ_p (fs).
    pub tau: f64,
    /// Waists (w_x, w_y) in µm.
    pub waist: [f64; 2],
}

/// Collected signal or idler mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectionMode {
    /// Central angular frequency Ω (rad/fs).
    pub omega: f64,
    pub waist: [f64; 2],
}

/// Full description of a source: crystal, beams and geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSetup {
    pub crystal: CrystalModel,
    pub pump: Pump,
    pub signal: CollectionMode,
    pub idler: CollectionMode,
    pub polarizations: PolarizationTriple,
    pub geometry: CollectionGeometry,
}

/// Parameters of the symmetric-waist degenerate configuration used
/// throughout the optimization studies: `w_i = w_s = w`, `w_p = r·w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricSource {
    pub pump_wavelength: f64,
    pub tau: f64,
    pub ratio: f64,
    pub waist: f64,
    pub alpha: f64,
    pub phi: f64,
    pub polarizations: PolarizationTriple,
}

impl Default for SymmetricSource {
    fn default() -> Self {
        Self {
            pump_wavelength: 0.405,
            tau: 100.0,
            ratio: std::f64::consts::FRAC_1_SQRT_2,
            waist: 10.0,
            alpha: 0.0,
            phi: 0.0,
            polarizations: PolarizationTriple::TYPE_I,
        }
    }
}

impl SourceSetup {
    /// Degenerate setup with symmetric collection waists. The crystal cut
    /// angle is left as given.
    pub fn symmetric(crystal: CrystalModel, p: &SymmetricSource) -> Result<Self> {
        let omega0 = omega_from_wavelength(p.pump_wavelength);
        let wp = p.ratio * p.waist;
        let setup = Self {
            crystal,
            pump: Pump {
                omega0,
                tau: p.tau,
                waist: [wp, wp],
            },
            signal: CollectionMode {
                omega: 0.5 * omega0,
                waist: [p.waist, p.waist],
            },
            idler: CollectionMode {
                omega: 0.5 * omega0,
                waist: [p.waist, p.waist],
            },
            polarizations: p.polarizations,
            geometry: CollectionGeometry::symmetric(p.alpha, p.phi),
        };
        setup.validate()?;
        Ok(setup)
    }

    /// Non-degenerate emission: the idler angle follows from transverse
    /// matching `Ω_i sin α_i = Ω_s sin α_s`.
    pub fn with_signal_frequency(mut self, omega_s: f64, alpha_s: f64) -> Result<Self> {
        let omega_i = self.pump.omega0 - omega_s;
        if omega_i <= 0.0 {
            return Err(SpdcError::InvalidParameter(format!(
                "signal frequency {omega_s} exceeds the pump frequency"
            )));
        }
        self.signal.omega = omega_s;
        self.idler.omega = omega_i;
        self.geometry.alpha_s = alpha_s;
        let s = omega_s * self.geometry.transverse(alpha_s) / omega_i;
        self.geometry.alpha_i = if self.geometry.exact_sine {
            if s.abs() > 1.0 {
                return Err(SpdcError::InvalidParameter(
                    "no idler angle satisfies transverse matching".into(),
                ));
            }
            s.asin()
        } else {
            s
        };
        self.validate()?;
        Ok(self)
    }

    /// Checks energy matching, waist positivity and the paraxial floor.
    pub fn validate(&self) -> Result<()> {
        let sum = self.signal.omega + self.idler.omega;
        if (sum - self.pump.omega0).abs() > 1e-12 * self.pump.omega0 {
            return Err(SpdcError::InvalidParameter(format!(
                "energy matching violated: {} + {} != {}",
                self.signal.omega, self.idler.omega, self.pump.omega0
            )));
        }
        if !(self.pump.tau > 0.0) {
            return Err(SpdcError::InvalidParameter(
                "pump duration must be positive".into(),
            ));
        }
        let g = &self.geometry;
        if g.alpha_i < 0.0 || g.alpha_s < 0.0 {
            return Err(SpdcError::InvalidParameter(
                "collection angles must be non-negative".into(),
            ));
        }
        if g.alpha_i.max(g.alpha_s) > SMALL_ANGLE_LIMIT {
            warn!(
                "collection angle {:.3} rad exceeds the small-angle range {SMALL_ANGLE_LIMIT} rad",
                g.alpha_i.max(g.alpha_s)
            );
        }
        for (name, omega, waist) in [
            ("pump", self.pump.omega0, self.pump.waist),
            ("signal", self.signal.omega, self.signal.waist),
            ("idler", self.idler.omega, self.idler.waist),
        ] {
            let lambda = wavelength_from_omega(omega);
            for w in waist {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(SpdcError::InvalidParameter(format!(
                        "{name} waist must be positive"
                    )));
                }
                if w < PARAXIAL_FLOOR * lambda {
                    return Err(SpdcError::InvalidParameter(format!(
                        "{name} waist {w} um is below the paraxial floor of {PARAXIAL_FLOOR} wavelengths ({:.3} um)",
                        PARAXIAL_FLOOR * lambda
                    )));
                }
            }
            let w = waist[0].min(waist[1]);
            if w < PARAXIAL_WARNING * lambda {
                warn!("{name} waist {w} um is under {PARAXIAL_WARNING} wavelengths; paraxial accuracy degrades");
            }
        }
        Ok(())
    }

    pub fn with_crystal(mut self, crystal: CrystalModel) -> Self {
        self.crystal = crystal;
        self
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.crystal.length = length;
        self
    }

    pub fn with_cut_angle(mut self, theta: f64) -> Self {
        self.crystal.cut_angle = theta;
        self
    }

    /// Returns the setup with the crystal cut angle set to the solved
    /// phase-matching angle.
    pub fn phase_matched(self) -> Result<Self> {
        let theta = solve_pm_angle(&self)?;
        Ok(self.with_cut_angle(theta))
    }

    /// Waists of the three beams on axis `mu`, ordered (p, i, s).
    pub fn waists(&self, mu: usize) -> [f64; 3] {
        [
            self.pump.waist[mu],
            self.idler.waist[mu],
            self.signal.waist[mu],
        ]
    }

    /// `k0_i`, `k0_s` for the given frequencies.
    pub fn collection_wavevectors(
        &self,
        omega_i: f64,
        omega_s: f64,
    ) -> (TransverseWavevector, TransverseWavevector) {
        let g = &self.geometry;
        let m = g.direction();
        let ki = omega_i * g.transverse(g.alpha_i) / SPEED_OF_LIGHT;
        let ks = omega_s * g.transverse(g.alpha_s) / SPEED_OF_LIGHT;
        (m * ki, m * (-ks))
    }

    /// Longitudinal mismatch `m2π/Λ + k_pz − k_iz − k_sz`.
    pub fn phase_mismatch(
        &self,
        k_i: TransverseWavevector,
        omega_i: f64,
        k_s: TransverseWavevector,
        omega_s: f64,
    ) -> Result<f64> {
        let c = &self.crystal;
        let pol = self.polarizations;
        let kp = c.kz(k_i + k_s, omega_i + omega_s, pol.pump)?;
        let ki = c.kz(k_i, omega_i, pol.idler)?;
        let ks = c.kz(k_s, omega_s, pol.signal)?;
        Ok(c.grating_wavenumber() + kp - ki - ks)
    }

    /// Mismatch at the central frequencies and collection wavevectors.
    pub fn central_mismatch(&self) -> Result<f64> {
        let (ki, ks) = self.collection_wavevectors(self.idler.omega, self.signal.omega);
        self.phase_mismatch(ki, self.idler.omega, ks, self.signal.omega)
    }
}

/// Scan step for bracketing the phase-matching angle.
const SCAN_STEP_DEG: f64 = 0.5;
/// Target |Δk_z| of the refined root, rad/µm.
const PM_TOLERANCE: f64 = 1e-10;

/// Crystal cut angle θ* that zeroes the central phase mismatch.
///
/// θ is scanned on a half-degree grid over [0°, 90°]; the first sign change
/// is refined by bisection with secant steps.
pub fn solve_pm_angle(setup: &SourceSetup) -> Result<f64> {
    let mismatch = |theta: f64| -> Option<f64> {
        let mut s = setup.clone();
        s.crystal.cut_angle = theta;
        s.central_mismatch().ok().filter(|v| v.is_finite())
    };
    let steps = (90.0 / SCAN_STEP_DEG).round() as usize;
    let mut prev: Option<(f64, f64)> = None;
    for j in 0..=steps {
        let theta = (j as f64 * SCAN_STEP_DEG).to_radians().min(FRAC_PI_2);
        let Some(f) = mismatch(theta) else {
            prev = None;
            continue;
        };
        if f == 0.0 {
            return Ok(theta);
        }
        if let Some((t0, f0)) = prev {
            if f0.signum() != f.signum() {
                return refine(&mismatch, (t0, f0), (theta, f));
            }
        }
        prev = Some((theta, f));
    }
    Err(SpdcError::NoPhaseMatching {
        lo_deg: 0.0,
        hi_deg: 90.0,
    })
}

fn refine(
    f: &impl Fn(f64) -> Option<f64>,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
) -> Result<f64> {
    for _ in 0..200 {
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        // Secant step only when it stays well inside the bracket.
        let lo = a.min(b);
        let hi = a.max(b);
        let t = if secant > lo + 0.1 * (hi - lo) && secant < hi - 0.1 * (hi - lo) {
            secant
        } else {
            mid
        };
        let ft = f(t).ok_or_else(|| SpdcError::NoPhaseMatching {
            lo_deg: lo.to_degrees(),
            hi_deg: hi.to_degrees(),
        })?;
        if ft.abs() <= PM_TOLERANCE {
            return Ok(t);
        }
        if ft.signum() == fa.signum() {
            a = t;
            fa = ft;
        } else {
            b = t;
            fb = ft;
        }
        if (b - a).abs() < 1e-15 {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}
