//! Reference amplitude by direct quadrature of the unexpanded transverse
//! integral, with exact k_z everywhere.
//!
//! The longitudinal integral is done in closed form,
//! `∫_{-1}^{1} e^{−iLΔk_z Z/2} dZ = 2 sinc(LΔk_z/2)`, which leaves a real
//! four-dimensional Gaussian-weighted integral over the transverse momenta.
//! Each axis is decorrelated by the Cholesky factor of its overlap block and
//! integrated with composite Gauss–Legendre on ±6 standard deviations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{expansion_center, pump_spectral_amplitude, ExpansionCenter};
use crate::dispersion::TransverseWavevector;
use crate::error::{Result, SpdcError};
use crate::geometry::SourceSetup;
use crate::quadrature::gauss_legendre;

const BOX: f64 = 6.0;
const NODES: usize = 8;

/// Log of the Gaussian mode-overlap product at the given transverse momenta.
pub fn overlap_exponent(
    setup: &SourceSetup,
    omega_i: f64,
    omega_s: f64,
    k_i: TransverseWavevector,
    k_s: TransverseWavevector,
) -> f64 {
    let (k0_i, k0_s) = setup.collection_wavevectors(omega_i, omega_s);
    let kp = k_i + k_s;
    let mut e = 0.0;
    for mu in 0..2 {
        let [wp, wi, ws] = setup.waists(mu);
        e -= 0.25 * wi * wi * (k_i.component(mu) - k0_i.component(mu)).powi(2);
        e -= 0.25 * ws * ws * (k_s.component(mu) - k0_s.component(mu)).powi(2);
        e -= 0.25 * wp * wp * kp.component(mu).powi(2);
    }
    e
}

/// Integrand of the transverse integral at fixed momenta: the overlap
/// Gaussian times `2 sinc(LΔk_z/2)`, or the overlap alone under perfect phase
/// matching.
pub fn transverse_integrand(
    setup: &SourceSetup,
    omega_i: f64,
    omega_s: f64,
    k_i: TransverseWavevector,
    k_s: TransverseWavevector,
    perfect_pm: bool,
) -> Result<f64> {
    let overlap = overlap_exponent(setup, omega_i, omega_s, k_i, k_s).exp();
    if perfect_pm {
        return Ok(overlap);
    }
    let dk = setup.phase_mismatch(k_i, omega_i, k_s, omega_s)?;
    Ok(overlap * 2.0 * sinc(0.5 * setup.crystal.length * dk))
}

/// Reference value with an error estimate from one resolution doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForce {
    pub value: Complex64,
    pub abs_error: f64,
    pub evaluations: usize,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// 1-D nodes on [−BOX, BOX] with the standard-normal weight folded in.
fn nodes(panels: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(NODES);
    let h = 2.0 * BOX / panels as f64;
    let mut out = Vec::with_capacity(panels * NODES);
    for p in 0..panels {
        let mid = -BOX + h * (p as f64 + 0.5);
        for &(x, w) in rule {
            let t = mid + 0.5 * h * x;
            out.push((t, 0.5 * h * w * (-0.5 * t * t).exp()));
        }
    }
    out
}

struct Frame {
    center: ExpansionCenter,
    /// Per axis: entries (l11, l21, l22) of the Cholesky factor of C₂.
    chol: [[f64; 3]; 2],
}

impl Frame {
    fn new(setup: &SourceSetup, omega_i: f64, omega_s: f64) -> Self {
        let center = expansion_center(setup, omega_i, omega_s);
        let chol = [0, 1].map(|mu| {
            let [wp, wi, ws] = setup.waists(mu);
            let (a, b, d) = (
                0.5 * (wp * wp + wi * wi),
                0.5 * wp * wp,
                0.5 * (wp * wp + ws * ws),
            );
            let l11 = a.sqrt();
            let l21 = b / l11;
            let l22 = (d - l21 * l21).sqrt();
            [l11, l21, l22]
        });
        Self { center, chol }
    }

    /// Deviations (q_i, q_s) on one axis from decorrelated coordinates.
    fn deviation(&self, mu: usize, e1: f64, e2: f64) -> (f64, f64) {
        let [l11, l21, l22] = self.chol[mu];
        let qs = e2 / l22;
        let qi = (e1 - l21 * qs) / l11;
        (qi, qs)
    }

    fn jacobian(&self) -> f64 {
        self.chol
            .iter()
            .map(|[l11, _, l22]| 1.0 / (l11 * l22))
            .product()
    }
}

fn integrate_grid(
    setup: &SourceSetup,
    frame: &Frame,
    omega_i: f64,
    omega_s: f64,
    panels: usize,
) -> Result<f64> {
    let grid = nodes(panels);
    let half_l = 0.5 * setup.crystal.length;
    grid.par_iter()
        .map(|&(a, wa)| -> Result<f64> {
            let mut acc = 0.0;
            for &(b, wb) in &grid {
                let (qix, qsx) = frame.deviation(0, a, b);
                for &(c, wc) in &grid {
                    for &(d, wd) in &grid {
                        let (qiy, qsy) = frame.deviation(1, c, d);
                        let ki = frame.center.idler + TransverseWavevector::new(qix, qiy);
                        let ks = frame.center.signal + TransverseWavevector::new(qsx, qsy);
                        let dk = setup.phase_mismatch(ki, omega_i, ks, omega_s)?;
                        acc += wb * wc * wd * 2.0 * sinc(half_l * dk);
                    }
                }
            }
            Ok(wa * acc)
        })
        .try_reduce(|| 0.0, |x, y| Ok(x + y))
}

/// Reference Ψ(ω_i, ω_s) by direct quadrature.
///
/// `resolution` is the number of 8-point panels per decorrelated axis; the
/// returned error is the change on doubling it.
pub fn brute_force_phi(
    setup: &SourceSetup,
    omega_i: f64,
    omega_s: f64,
    resolution: usize,
) -> Result<BruteForce> {
    if resolution == 0 {
        return Err(SpdcError::InvalidParameter(
            "resolution must be positive".into(),
        ));
    }
    let frame = Frame::new(setup, omega_i, omega_s);
    let mut prefactor = 0.5
        * setup.crystal.length
        * (2.0 * PI).powf(-1.5)
        * pump_spectral_amplitude(omega_i + omega_s, setup.pump.omega0, setup.pump.tau)
        * frame.jacobian();
    let mut suppression = 0.0;
    let (k0_i, k0_s) = (frame.center.k0_i, frame.center.k0_s);
    for mu in 0..2 {
        for w in setup.waists(mu) {
            prefactor *= w.sqrt();
        }
        let wbar = frame.center.wbar[mu];
        suppression += 0.25 * wbar * wbar * (k0_i.component(mu) + k0_s.component(mu)).powi(2);
    }
    prefactor *= (-suppression).exp();
    let coarse = integrate_grid(setup, &frame, omega_i, omega_s, resolution)?;
    let fine = integrate_grid(setup, &frame, omega_i, omega_s, 2 * resolution)?;
    let n = |p: usize| (p * NODES).pow(4);
    Ok(BruteForce {
        value: Complex64::new(prefactor * fine, 0.0),
        abs_error: (prefactor * (fine - coarse)).abs(),
        evaluations: n(resolution) + n(2 * resolution),
    })
}
