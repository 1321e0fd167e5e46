//! Paraxial expansion of the phase mismatch and the evaluators of the
//! bi-photon amplitude Ψ(ω_i, ω_s).
//!
//! The overall normalization constant is set to one. Beams are indexed
//! pump, idler, signal by [`PUMP`], [`IDLER`], [`SIGNAL`]; transverse axes
//! by 0 (x) and 1 (y).

mod general;
mod oracle;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dispersion::{KzJet, TransverseWavevector};
use crate::error::{Result, SpdcError};
use crate::geometry::SourceSetup;
use crate::quadrature::{integrate, Doubling, Integral};

pub use general::{psi_general, psi_general_with};
pub use oracle::{brute_force_phi, overlap_exponent, transverse_integrand, BruteForce};

pub const PUMP: usize = 0;
pub const IDLER: usize = 1;
pub const SIGNAL: usize = 2;

/// Normalized Gaussian pump spectrum, `∫|A|² dω = 1`.
pub fn pump_spectral_amplitude(omega_p: f64, omega0: f64, tau: f64) -> f64 {
    let d = omega_p - omega0;
    (2.0 * tau * tau / PI).powf(0.25) * (-tau * tau * d * d).exp()
}

/// One point of the joint spectral amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsaSample {
    pub omega_i: f64,
    pub omega_s: f64,
    pub amplitude: Complex64,
    /// Quadrature error estimate on `amplitude`.
    pub abs_error: f64,
}

/// Peak of the Gaussian mode overlap in transverse momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCenter {
    pub pump: TransverseWavevector,
    pub idler: TransverseWavevector,
    pub signal: TransverseWavevector,
    pub k0_i: TransverseWavevector,
    pub k0_s: TransverseWavevector,
    /// Effective waist per axis.
    pub wbar: [f64; 2],
}

impl ExpansionCenter {
    pub fn beam(&self, a: usize) -> TransverseWavevector {
        match a {
            PUMP => self.pump,
            IDLER => self.idler,
            _ => self.signal,
        }
    }
}

/// `1/w̄² = Σ_a 1/w_a²` on axis `mu`.
pub fn effective_waist(setup: &SourceSetup, mu: usize) -> f64 {
    let inv: f64 = setup.waists(mu).iter().map(|w| 1.0 / (w * w)).sum();
    inv.sqrt().recip()
}

pub fn expansion_center(setup: &SourceSetup, omega_i: f64, omega_s: f64) -> ExpansionCenter {
    let (k0_i, k0_s) = setup.collection_wavevectors(omega_i, omega_s);
    let sum = k0_i + k0_s;
    let mut out = ExpansionCenter {
        pump: TransverseWavevector::ZERO,
        idler: k0_i,
        signal: k0_s,
        k0_i,
        k0_s,
        wbar: [0.0; 2],
    };
    let mut kp = [0.0; 2];
    let mut ki = [0.0; 2];
    let mut ks = [0.0; 2];
    for mu in 0..2 {
        let wbar = effective_waist(setup, mu);
        let wbar2 = wbar * wbar;
        let [wp, wi, ws] = setup.waists(mu);
        let s = sum.component(mu);
        ki[mu] = k0_i.component(mu) - wbar2 / (wi * wi) * s;
        ks[mu] = k0_s.component(mu) - wbar2 / (ws * ws) * s;
        kp[mu] = wbar2 / (wp * wp) * s;
        out.wbar[mu] = wbar;
    }
    out.pump = TransverseWavevector::from_components(kp);
    out.idler = TransverseWavevector::from_components(ki);
    out.signal = TransverseWavevector::from_components(ks);
    out
}

/// Expansion data of one beam on one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamAxis {
    pub waist: f64,
    pub kbar: f64,
    /// First derivative of k_z along this axis.
    pub k1: f64,
    /// Diagonal second derivative of k_z along this axis.
    pub k2: f64,
    /// Focal parameter ξ = −L K₂/w².
    pub xi: f64,
    /// Deviation parameter ν = −L K₁/(2w).
    pub nu: f64,
}

impl BeamAxis {
    /// q-parameter `w²(1 − iZξ)` at rescaled position Z.
    pub fn q(&self, z: f64) -> Complex64 {
        Complex64::new(
            self.waist * self.waist,
            -self.waist * self.waist * z * self.xi,
        )
    }

    /// `z₀ = −w²/(2K₂)` in µm.
    pub fn rayleigh_range(&self) -> f64 {
        -self.waist * self.waist / (2.0 * self.k2)
    }

    /// Lateral displacement `w ν` at the crystal exit face.
    pub fn exit_shift(&self) -> f64 {
        self.waist * self.nu
    }
}

/// Aggregated per-axis parameters of the factorized amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisParams {
    pub wbar: f64,
    /// `w̄²(k0_i + k0_s)²/4`.
    pub suppression: f64,
    pub delta2_is: f64,
    pub delta2_ps: f64,
    pub delta2_pi: f64,
    pub a: f64,
    pub b: f64,
    /// Aggregate focal parameter.
    pub xi: f64,
    pub c: f64,
}

impl AxisParams {
    /// `Q(Z) = A − iBZ`.
    pub fn q(&self, z: f64) -> Complex64 {
        Complex64::new(self.a, -self.b * z)
    }

    /// `F(Z) = 1 + iξZ + CZ²`.
    pub fn f(&self, z: f64) -> Complex64 {
        Complex64::new(1.0 + self.c * z * z, self.xi * z)
    }
}

/// Everything the paraxial evaluators need at one frequency pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaxialBundle {
    pub omega_i: f64,
    pub omega_s: f64,
    pub length: f64,
    pub center: ExpansionCenter,
    /// `k_z` jets at the expansion centers, indexed by beam.
    pub jets: [KzJet; 3],
    /// Per beam, per axis.
    pub beams: [[BeamAxis; 2]; 3],
    pub axes: [AxisParams; 2],
    /// Phase mismatch at the expansion centers, rad/µm.
    pub delta_kz: f64,
}

fn delta2(wbar2: f64, a: &BeamAxis, b: &BeamAxis) -> f64 {
    let d = a.nu / b.waist - b.nu / a.waist;
    wbar2 * d * d
}

pub fn paraxial_params(setup: &SourceSetup, omega_i: f64, omega_s: f64) -> Result<ParaxialBundle> {
    let center = expansion_center(setup, omega_i, omega_s);
    let c = &setup.crystal;
    let pol = setup.polarizations;
    let jets = [
        c.kz_jet(center.pump, omega_i + omega_s, pol.pump)?,
        c.kz_jet(center.idler, omega_i, pol.idler)?,
        c.kz_jet(center.signal, omega_s, pol.signal)?,
    ];
    let length = c.length;
    let mut beams = [[BeamAxis {
        waist: 0.0,
        kbar: 0.0,
        k1: 0.0,
        k2: 0.0,
        xi: 0.0,
        nu: 0.0,
    }; 2]; 3];
    for a in 0..3 {
        for mu in 0..2 {
            let w = setup.waists(mu)[a];
            let jet = &jets[a];
            beams[a][mu] = BeamAxis {
                waist: w,
                kbar: center.beam(a).component(mu),
                k1: jet.k1[mu],
                k2: jet.k2[mu][mu],
                xi: -length * jet.k2[mu][mu] / (w * w),
                nu: -length * jet.k1[mu] / (2.0 * w),
            };
        }
    }
    let sum = center.k0_i + center.k0_s;
    let axes = [0, 1].map(|mu| {
        let wbar = center.wbar[mu];
        let wbar2 = wbar * wbar;
        let p = &beams[PUMP][mu];
        let i = &beams[IDLER][mu];
        let s = &beams[SIGNAL][mu];
        let d_is = delta2(wbar2, i, s);
        let d_ps = delta2(wbar2, p, s);
        let d_pi = delta2(wbar2, p, i);
        let frac = |b: &BeamAxis| 1.0 - wbar2 / (b.waist * b.waist);
        AxisParams {
            wbar,
            suppression: 0.25 * wbar2 * sum.component(mu).powi(2),
            delta2_is: d_is,
            delta2_ps: d_ps,
            delta2_pi: d_pi,
            a: d_is + d_ps + d_pi,
            b: d_is * p.xi - d_ps * i.xi - d_pi * s.xi,
            xi: i.xi * frac(i) + s.xi * frac(s) - p.xi * frac(p),
            c: wbar2
                * (s.xi * p.xi / (i.waist * i.waist) + i.xi * p.xi / (s.waist * s.waist)
                    - i.xi * s.xi / (p.waist * p.waist)),
        }
    });
    let delta_kz = c.grating_wavenumber() + jets[PUMP].kz - jets[IDLER].kz - jets[SIGNAL].kz;
    Ok(ParaxialBundle {
        omega_i,
        omega_s,
        length,
        center,
        jets,
        beams,
        axes,
        delta_kz,
    })
}

impl ParaxialBundle {
    /// Real symmetric overlap block `C₂` on axis `mu`, (idler, signal) order.
    pub fn overlap_block(&self, mu: usize) -> [[f64; 2]; 2] {
        let wp2 = self.beams[PUMP][mu].waist.powi(2);
        let wi2 = self.beams[IDLER][mu].waist.powi(2);
        let ws2 = self.beams[SIGNAL][mu].waist.powi(2);
        [
            [0.5 * (wp2 + wi2), 0.5 * wp2],
            [0.5 * wp2, 0.5 * (wp2 + ws2)],
        ]
    }

    /// Second-order mismatch block `D₂^{µν}`, (idler, signal) order.
    pub fn mismatch_block(&self, mu: usize, nu: usize) -> [[f64; 2]; 2] {
        let p = self.jets[PUMP].k2[mu][nu];
        let i = self.jets[IDLER].k2[mu][nu];
        let s = self.jets[SIGNAL].k2[mu][nu];
        [[p - i, p], [p, p - s]]
    }

    /// First-order mismatch vector `D₁^µ`, (idler, signal) order.
    pub fn mismatch_gradient(&self, mu: usize) -> [f64; 2] {
        let p = self.jets[PUMP].k1[mu];
        [p - self.jets[IDLER].k1[mu], p - self.jets[SIGNAL].k1[mu]]
    }

    /// `√F_µ(Z)` on the branch continuous from `F(0) = 1`.
    ///
    /// `F` is the ratio of determinants of `C₂ + i(LZ/2)D₂` and `C₂`. Both
    /// LDLᵀ pivots of the first matrix have positive real part, so the
    /// principal roots of the pivot ratios never cross a branch cut.
    pub fn sqrt_f(&self, mu: usize, z: f64) -> Complex64 {
        let c = self.overlap_block(mu);
        let d = self.mismatch_block(mu, mu);
        let s = 0.5 * self.length * z;
        let m = |j: usize, l: usize| Complex64::new(c[j][l], s * d[j][l]);
        let d1 = m(0, 0);
        let d2 = m(1, 1) - m(0, 1) * m(0, 1) / d1;
        let c1 = c[0][0];
        let c2 = c[1][1] - c[0][1] * c[0][1] / c1;
        (d1 / c1).sqrt() * (d2 / c2).sqrt()
    }

    /// Z-integrand of the factorized form without the mismatch phase.
    pub fn factorized_integrand(&self, z: f64) -> Complex64 {
        let mut out = Complex64::new(1.0, 0.0);
        for mu in 0..2 {
            let ax = &self.axes[mu];
            let root = self.sqrt_f(mu, z);
            out *= (-(z * z) * ax.q(z) / (root * root)).exp() / root;
        }
        out
    }
}

/// Settings of the Z-integral.
pub fn z_quadrature() -> Doubling {
    Doubling {
        initial_panels: 1,
        nodes: 16,
        rel_tol: 1e-8,
        abs_tol: 1e-13,
        max_panels: 1 << 14,
    }
}

/// `∫_{-1}^{1} e^{−iLΔk̄Z/2} g(Z) dZ` for integrands with `g(−Z) = conj g(Z)`,
/// which makes the result real: it equals `2 Re ∫_0^1`.
pub(crate) fn z_integral<G>(bundle: &ParaxialBundle, g: G, opts: &Doubling) -> Result<Integral<f64>>
where
    G: Fn(f64) -> Result<Complex64>,
{
    let phase = 0.5 * bundle.length * bundle.delta_kz;
    // About two oscillations per 16-node panel on the coarse level.
    let panels = (phase.abs() / (4.0 * PI)).ceil() as usize;
    let opts = Doubling {
        initial_panels: opts.initial_panels.max(panels.max(1)),
        ..*opts
    };
    let half = integrate(
        |z| Ok((Complex64::from_polar(1.0, -phase * z) * g(z)?).re),
        0.0,
        1.0,
        &opts,
    )?;
    Ok(Integral {
        value: 2.0 * half.value,
        abs_error: 2.0 * half.abs_error,
        ..half
    })
}

fn require_principal_plane(setup: &SourceSetup) -> Result<()> {
    if setup.geometry.is_principal_plane() {
        Ok(())
    } else {
        Err(SpdcError::NonPrincipalPlane {
            phi: setup.geometry.phi,
        })
    }
}

/// Factorized amplitude for emission in the (x, z) or (y, z) plane.
pub fn psi_factorized(setup: &SourceSetup, omega_i: f64, omega_s: f64) -> Result<JsaSample> {
    psi_factorized_with(setup, omega_i, omega_s, &z_quadrature())
}

pub fn psi_factorized_with(
    setup: &SourceSetup,
    omega_i: f64,
    omega_s: f64,
    opts: &Doubling,
) -> Result<JsaSample> {
    require_principal_plane(setup)?;
    let bundle = paraxial_params(setup, omega_i, omega_s)?;
    psi_factorized_from_bundle(setup, &bundle, opts)
}

/// Factorized amplitude from a precomputed bundle.
pub fn psi_factorized_from_bundle(
    setup: &SourceSetup,
    bundle: &ParaxialBundle,
    opts: &Doubling,
) -> Result<JsaSample> {
    let prefactor = factorized_prefactor(setup, bundle);
    let z = z_integral(bundle, |z| Ok(bundle.factorized_integrand(z)), opts)?;
    Ok(JsaSample {
        omega_i: bundle.omega_i,
        omega_s: bundle.omega_s,
        amplitude: Complex64::new(prefactor * z.value, 0.0),
        abs_error: prefactor.abs() * z.abs_error,
    })
}

/// `2√(2π) L A_p Π_µ w̄ e^{−w̄²S²/4}/√(w_p w_i w_s)`.
pub(crate) fn factorized_prefactor(setup: &SourceSetup, bundle: &ParaxialBundle) -> f64 {
    let pump = pump_spectral_amplitude(
        bundle.omega_i + bundle.omega_s,
        setup.pump.omega0,
        setup.pump.tau,
    );
    let mut out = 2.0 * (2.0 * PI).sqrt() * bundle.length * pump;
    for mu in 0..2 {
        let ax = &bundle.axes[mu];
        let w: f64 = (0..3).map(|a| bundle.beams[a][mu].waist).product();
        out *= ax.wbar * (-ax.suppression).exp() / w.sqrt();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{CrystalModel, Polarization};
    use crate::geometry::{PolarizationTriple, SymmetricSource};
    use crate::quadrature::integrate_real;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn noncollinear_setup() -> SourceSetup {
        SourceSetup::symmetric(
            CrystalModel::bbo(),
            &SymmetricSource {
                ratio: 0.5,
                waist: 50.0,
                alpha: 2.8f64.to_radians(),
                ..SymmetricSource::default()
            },
        )
        .unwrap()
        .phase_matched()
        .unwrap()
    }

    fn table_setup(length: f64, waist: f64, ratio: f64) -> SourceSetup {
        SourceSetup::symmetric(
            CrystalModel::bbo().with_length(length),
            &SymmetricSource {
                ratio,
                waist,
                ..SymmetricSource::default()
            },
        )
        .unwrap()
        .phase_matched()
        .unwrap()
    }

    #[test]
    fn pump_spectrum_normalized_with_expected_width() {
        let (w0, tau) = (4.65, 100.0);
        let opts = Doubling::default();
        let norm = integrate_real(
            |w| pump_spectral_amplitude(w, w0, tau).powi(2),
            w0 - 0.2,
            w0 + 0.2,
            &opts,
        )
        .unwrap();
        assert!((norm.value - 1.0).abs() < 1e-10);
        let var = integrate_real(
            |w| (w - w0).powi(2) * pump_spectral_amplitude(w, w0, tau).powi(2),
            w0 - 0.2,
            w0 + 0.2,
            &opts,
        )
        .unwrap();
        assert!((var.value.sqrt() - 1.0 / (2.0 * tau)).abs() < 1e-12);
        assert!(pump_spectral_amplitude(w0, w0, tau) > pump_spectral_amplitude(w0 + 1e-4, w0, tau));
    }

    #[test]
    fn center_reduces_to_collection_vectors_at_central_frequencies() {
        let s = noncollinear_setup();
        let c = expansion_center(&s, s.idler.omega, s.signal.omega);
        assert!((c.idler - c.k0_i).norm() < 1e-15);
        assert!((c.signal - c.k0_s).norm() < 1e-15);
        assert!(c.pump.norm() < 1e-15);
    }

    #[test]
    fn center_is_argmax_of_overlap() {
        let s = noncollinear_setup();
        let (wi, ws) = (s.pump.omega0 / 2.1, s.pump.omega0 / 1.9);
        let c = expansion_center(&s, wi, ws);
        // Coordinate-wise golden-section ascent on the x components.
        let f = |ki: f64, ks: f64| {
            overlap_exponent(
                &s,
                wi,
                ws,
                TransverseWavevector::new(ki, 0.0),
                TransverseWavevector::new(ks, 0.0),
            )
        };
        let golden = |g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64| {
            let r = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..200 {
                let x1 = b - r * (b - a);
                let x2 = a + r * (b - a);
                if g(x1) > g(x2) {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            0.5 * (a + b)
        };
        let (mut ki, mut ks) = (c.k0_i.kx, c.k0_s.kx);
        for _ in 0..60 {
            ki = golden(&|x| f(x, ks), ki - 0.5, ki + 0.5);
            ks = golden(&|x| f(ki, x), ks - 0.5, ks + 0.5);
        }
        assert!(
            ((ki - c.idler.kx) / c.idler.kx).abs() < 1e-8,
            "{ki} {}",
            c.idler.kx
        );
        assert!(
            ((ks - c.signal.kx) / c.signal.kx).abs() < 1e-8,
            "{ks} {}",
            c.signal.kx
        );
        assert!((c.idler.kx - c.k0_i.kx).abs() > 1e-4);
    }

    #[test]
    fn collinear_centers_vanish() {
        let s = table_setup(100.0, 10.0, FRAC_1_SQRT_2);
        let c = expansion_center(&s, s.pump.omega0 / 2.1, s.pump.omega0 / 1.9);
        for k in [c.pump, c.idler, c.signal] {
            assert_eq!(k, TransverseWavevector::ZERO);
        }
    }

    #[test]
    fn table_one_values() {
        let s = table_setup(100.0, 10.0, FRAC_1_SQRT_2);
        let b = paraxial_params(&s, s.idler.omega, s.signal.omega).unwrap();
        for mu in 0..2 {
            assert!((b.beams[IDLER][mu].xi - 0.07).abs() < 0.015);
        }
        assert_eq!(b.axes[0].a, 0.0);
        assert!((b.axes[1].a - 0.11).abs() < 0.02, "{}", b.axes[1].a);
        // Closed form from the pump walk-off slope alone.
        let beta = s
            .crystal
            .wave_params(s.pump.omega0, Polarization::Extraordinary)
            .unwrap()
            .beta;
        let r2 = 0.5;
        let closed = 100.0f64.powi(2) * beta * beta / (2.0 * 100.0 * (1.0 + 2.0 * r2));
        assert!((b.axes[1].a - closed).abs() / closed < 1e-9);
    }

    #[test]
    fn bundle_invariants() {
        let s = noncollinear_setup();
        let b = paraxial_params(&s, s.pump.omega0 / 2.1, s.pump.omega0 / 1.9).unwrap();
        for (mu, ax) in b.axes.iter().enumerate() {
            assert!(ax.a >= 0.0);
            assert_eq!(ax.q(0.0), Complex64::new(ax.a, 0.0));
            assert_eq!(ax.f(0.0), Complex64::new(1.0, 0.0));
            let inv: f64 = (0..3).map(|a| b.beams[a][mu].waist.powi(-2)).sum();
            assert!((ax.wbar.powi(-2) - inv).abs() < 1e-15);
        }
        let q = b.beams[PUMP][0].q(0.3);
        let w2 = b.beams[PUMP][0].waist.powi(2);
        assert!((q - Complex64::new(w2, -w2 * 0.3 * b.beams[PUMP][0].xi)).norm() < 1e-12);
        let z0 = b.beams[PUMP][0].rayleigh_range();
        assert!((s.crystal.length / z0 - 2.0 * b.beams[PUMP][0].xi).abs() < 1e-12);
    }

    #[test]
    fn xi_nu_scaling() {
        let base = table_setup(100.0, 20.0, 1.0);
        let b0 = paraxial_params(&base, base.idler.omega, base.signal.omega).unwrap();
        let longer = base.clone().with_length(300.0);
        let b1 = paraxial_params(&longer, longer.idler.omega, longer.signal.omega).unwrap();
        let mut wide = base.clone();
        for w in [
            &mut wide.pump.waist,
            &mut wide.idler.waist,
            &mut wide.signal.waist,
        ] {
            *w = [2.0 * w[0], 2.0 * w[1]];
        }
        let b2 = paraxial_params(&wide, wide.idler.omega, wide.signal.omega).unwrap();
        let p0 = b0.beams[PUMP][1];
        assert!((b1.beams[PUMP][1].xi / p0.xi - 3.0).abs() < 1e-12);
        assert!((b1.beams[PUMP][1].nu / p0.nu - 3.0).abs() < 1e-12);
        assert!((b2.beams[PUMP][1].xi / p0.xi - 0.25).abs() < 1e-12);
        assert!((b2.beams[PUMP][1].nu / p0.nu - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f_matches_determinant_ratio_and_quadratic_form() {
        let s = noncollinear_setup().with_length(800.0);
        let b = paraxial_params(&s, s.pump.omega0 / 2.05, s.pump.omega0 / 1.95).unwrap();
        for mu in 0..2 {
            for z in [-0.9, -0.3, 0.2, 0.7, 1.0] {
                let root = b.sqrt_f(mu, z);
                assert!((root * root - b.axes[mu].f(z)).norm() < 1e-12);
                // ½ M₁ᵀ M₂⁻¹ M₁ computed directly against −Z² Q/F.
                let c = b.overlap_block(mu);
                let d = b.mismatch_block(mu, mu);
                let g = b.mismatch_gradient(mu);
                let h = 0.5 * s.crystal.length * z;
                let m = |j: usize, l: usize| Complex64::new(c[j][l], h * d[j][l]);
                let det = m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
                let v = [Complex64::new(0.0, h * g[0]), Complex64::new(0.0, h * g[1])];
                let quad = (v[0] * v[0] * m(1, 1) - 2.0 * v[0] * v[1] * m(0, 1)
                    + v[1] * v[1] * m(0, 0))
                    / det;
                let expected = -(z * z) * b.axes[mu].q(z) / b.axes[mu].f(z);
                assert!((0.5 * quad - expected).norm() <= 1e-10 * (1.0 + expected.norm()));
            }
        }
    }

    #[test]
    fn sqrt_f_is_continuous_for_strong_focusing() {
        let s = table_setup(2000.0, 6.0, 1.0);
        let b = paraxial_params(&s, s.idler.omega, s.signal.omega).unwrap();
        let mut prev = b.sqrt_f(0, 0.0);
        assert_eq!(prev, Complex64::new(1.0, 0.0));
        for j in 1..=2000 {
            let z = j as f64 / 2000.0;
            let cur = b.sqrt_f(0, z);
            assert!((cur - prev).norm() < 0.05, "jump at Z = {z}");
            prev = cur;
        }
    }

    #[test]
    fn walkoff_shift_matches_real_space_centroid() {
        // Propagate the pump's y-profile to the exit face with exact k_z and
        // locate the intensity centroid.
        let s = table_setup(500.0, 20.0, 1.0);
        let b = paraxial_params(&s, s.idler.omega, s.signal.omega).unwrap();
        let beam = b.beams[PUMP][1];
        let crystal = &s.crystal;
        let w = beam.waist;
        let zexit = 0.5 * crystal.length;
        let field = |y: f64| -> Complex64 {
            let opts = Doubling::default()
                .with_initial_panels(8)
                .with_abs_tol(1e-13);
            let re = integrate_real(
                |k| {
                    let kz = crystal
                        .kz(
                            TransverseWavevector::new(0.0, k),
                            s.pump.omega0,
                            Polarization::Extraordinary,
                        )
                        .unwrap();
                    (-0.25 * w * w * k * k).exp() * (-(y * k + zexit * kz)).cos()
                },
                -12.0 / w,
                12.0 / w,
                &opts,
            )
            .unwrap()
            .value;
            let im = integrate_real(
                |k| {
                    let kz = crystal
                        .kz(
                            TransverseWavevector::new(0.0, k),
                            s.pump.omega0,
                            Polarization::Extraordinary,
                        )
                        .unwrap();
                    (-0.25 * w * w * k * k).exp() * (-(y * k + zexit * kz)).sin()
                },
                -12.0 / w,
                12.0 / w,
                &opts,
            )
            .unwrap()
            .value;
            Complex64::new(re, im)
        };
        let (mut num, mut den) = (0.0, 0.0);
        let n = 400;
        let (lo, hi) = (-4.0 * w - 20.0, 4.0 * w + 20.0);
        for j in 0..=n {
            let y = lo + (hi - lo) * j as f64 / n as f64;
            let i = field(y).norm_sqr();
            num += y * i;
            den += i;
        }
        let centroid = num / den;
        assert!(beam.exit_shift().abs() > 1.0);
        assert!(
            (centroid - beam.exit_shift()).abs() < 1e-3 * beam.exit_shift().abs(),
            "{centroid} vs {}",
            beam.exit_shift()
        );
    }

    #[test]
    fn symmetric_setup_is_exchange_symmetric() {
        let s = noncollinear_setup().with_length(300.0);
        let (a, b) = (s.pump.omega0 / 2.03, s.pump.omega0 / 1.98);
        let p = psi_factorized(&s, a, b).unwrap().amplitude.norm();
        let q = psi_factorized(&s, b, a).unwrap().amplitude.norm();
        assert!((p - q).abs() <= 1e-10 * p.max(q));
    }

    #[test]
    fn non_principal_plane_rejected() {
        let mut s = noncollinear_setup();
        s.geometry.phi = 0.4;
        assert!(matches!(
            psi_factorized(&s, s.idler.omega, s.signal.omega),
            Err(SpdcError::NonPrincipalPlane { .. })
        ));
    }

    #[test]
    fn walkoff_free_poled_setup_reduces_to_inverse_root_product() {
        let crystal = CrystalModel::bbo().with_length(2000.0).with_cut_angle(0.0);
        let mut s = SourceSetup::symmetric(
            crystal,
            &SymmetricSource {
                ratio: 0.8,
                waist: 15.0,
                polarizations: PolarizationTriple::ALL_ORDINARY,
                ..SymmetricSource::default()
            },
        )
        .unwrap();
        // Quasi-phase-match the central frequencies.
        let dk = s.central_mismatch().unwrap();
        s.crystal.poling = Some(crate::dispersion::Poling {
            period: 2.0 * PI / dk.abs(),
            order: if dk > 0.0 { -1 } else { 1 },
        });
        let (wi, ws) = (s.pump.omega0 / 2.01, s.pump.omega0 / 1.99);
        let b = paraxial_params(&s, wi, ws).unwrap();
        for ax in &b.axes {
            assert_eq!(ax.a, 0.0);
            assert_eq!(ax.b, 0.0);
        }
        let psi = psi_factorized(&s, wi, ws).unwrap();
        let phase = 0.5 * b.length * b.delta_kz;
        let reference = integrate_real(
            |z| {
                let g = (Complex64::new(1.0, 0.0) / (b.axes[0].f(z) * b.axes[1].f(z)).sqrt())
                    * Complex64::from_polar(1.0, -phase * z);
                g.re
            },
            -1.0,
            1.0,
            &Doubling::default()
                .with_rel_tol(1e-13)
                .with_initial_panels(16),
        )
        .unwrap()
        .value;
        let expected = factorized_prefactor(&s, &b) * reference;
        assert!((psi.amplitude.re - expected).abs() <= 1e-8 * expected.abs());
    }
}
