//! Amplitude for an arbitrary emission azimuth, where the two transverse
//! axes couple through the off-diagonal second derivatives of k_z.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    paraxial_params, pump_spectral_amplitude, z_integral, z_quadrature, JsaSample, ParaxialBundle,
};
use crate::error::{Result, SpdcError};
use crate::geometry::SourceSetup;
use crate::quadrature::Doubling;

type C = Complex64;

/// Index of (axis, photon) in the 4-vector; photon 0 is the idler.
fn slot(mu: usize, j: usize) -> usize {
    2 * mu + j
}

/// `M₂(Z) = C₂ + i(LZ/2)D₂` and `M₁(Z) = i(LZ/2)D₁`.
pub(crate) fn m_matrices(bundle: &ParaxialBundle, z: f64) -> ([[C; 4]; 4], [C; 4]) {
    let h = 0.5 * bundle.length * z;
    let mut m2 = [[C::new(0.0, 0.0); 4]; 4];
    let mut m1 = [C::new(0.0, 0.0); 4];
    for mu in 0..2 {
        let c = bundle.overlap_block(mu);
        let g = bundle.mismatch_gradient(mu);
        for j in 0..2 {
            m1[slot(mu, j)] = C::new(0.0, h * g[j]);
        }
        for nu in 0..2 {
            let d = bundle.mismatch_block(mu, nu);
            for j in 0..2 {
                for l in 0..2 {
                    let re = if mu == nu { c[j][l] } else { 0.0 };
                    m2[slot(mu, j)][slot(nu, l)] = C::new(re, h * d[j][l]);
                }
            }
        }
    }
    (m2, m1)
}

/// Unpivoted LDLᵀ of a complex symmetric matrix with positive-definite real
/// part. Returns the unit lower factor and the pivots, all of which lie in
/// the open right half-plane.
fn ldlt(m: &[[C; 4]; 4], z: f64) -> Result<([[C; 4]; 4], [C; 4])> {
    let mut l = [[C::new(0.0, 0.0); 4]; 4];
    let mut d = [C::new(0.0, 0.0); 4];
    let scale = m
        .iter()
        .map(|r| r.iter().map(|x| x.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    for k in 0..4 {
        let mut dk = m[k][k];
        for j in 0..k {
            dk -= l[k][j] * l[k][j] * d[j];
        }
        if !(dk.norm() > 1e-14 * scale) {
            return Err(SpdcError::Singular { z });
        }
        d[k] = dk;
        l[k][k] = C::new(1.0, 0.0);
        for i in k + 1..4 {
            let mut v = m[i][k];
            for j in 0..k {
                v -= l[i][j] * l[k][j] * d[j];
            }
            l[i][k] = v / dk;
        }
    }
    Ok((l, d))
}

/// `exp(½ M₁ᵀM₂⁻¹M₁) / √det M₂`, with the root taken pivot by pivot.
pub(crate) fn general_integrand(bundle: &ParaxialBundle, z: f64) -> Result<C> {
    let (m2, m1) = m_matrices(bundle, z);
    let (l, d) = ldlt(&m2, z)?;
    // M₁ᵀ M₂⁻¹ M₁ = yᵀ D⁻¹ y with L y = M₁.
    let mut y = m1;
    for i in 0..4 {
        for j in 0..i {
            let t = l[i][j] * y[j];
            y[i] -= t;
        }
    }
    let mut quad = C::new(0.0, 0.0);
    let mut root = C::new(1.0, 0.0);
    for k in 0..4 {
        quad += y[k] * y[k] / d[k];
        root *= d[k].sqrt();
    }
    Ok((0.5 * quad).exp() / root)
}

/// Amplitude for any emission azimuth.
pub fn psi_general(setup: &SourceSetup, omega_i: f64, omega_s: f64) -> Result<JsaSample> {
    psi_general_with(setup, omega_i, omega_s, &z_quadrature())
}

pub fn psi_general_with(
    setup: &SourceSetup,
    omega_i: f64,
    omega_s: f64,
    opts: &Doubling,
) -> Result<JsaSample> {
    let bundle = paraxial_params(setup, omega_i, omega_s)?;
    let pump = pump_spectral_amplitude(omega_i + omega_s, setup.pump.omega0, setup.pump.tau);
    let mut prefactor = 0.5 * bundle.length * (2.0 * PI).sqrt() * pump;
    let mut suppression = 0.0;
    for mu in 0..2 {
        suppression += bundle.axes[mu].suppression;
        for a in 0..3 {
            prefactor *= bundle.beams[a][mu].waist.sqrt();
        }
    }
    prefactor *= (-suppression).exp();
    let z = z_integral(&bundle, |z| general_integrand(&bundle, z), opts)?;
    Ok(JsaSample {
        omega_i,
        omega_s,
        amplitude: C::new(prefactor * z.value, 0.0),
        abs_error: prefactor.abs() * z.abs_error,
    })
}
