//! Composite Gauss–Legendre quadrature with panel doubling.
//!
//! Every integral here is estimated at two consecutive panel counts; the
//! difference between the two is the reported error and the finer value is
//! returned. Refinement stops when that difference falls below the
//! requested tolerance.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};
use std::sync::{Mutex, OnceLock};

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Result, SpdcError};

/// Scalar types that can be integrated.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Family {
    Legendre,
    Hermite,
}

fn cached_rule(family: Family, n: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Mutex<HashMap<(Family, usize), &'static [(f64, f64)]>>> =
        OnceLock::new();
    let rules = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = rules.lock().expect("quadrature rule cache poisoned");
    guard.entry((family, n)).or_insert_with(|| {
        let degree = NonZeroUsize::new(n.max(1)).unwrap();
        let pairs: Vec<(f64, f64)> = match family {
            Family::Legendre => GaussLegendre::new(degree)
                .into_node_weight_pairs()
                .into_vec(),
            Family::Hermite => GaussHermite::new(degree)
                .into_node_weight_pairs()
                .into_vec(),
        };
        Box::leak(pairs.into_boxed_slice())
    })
}

/// Node/weight pairs of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    cached_rule(Family::Legendre, n)
}

/// Node/weight pairs of the `n`-point Gauss–Hermite rule for the weight
/// `e^{−x²}` on the real line.
pub fn gauss_hermite(n: usize) -> &'static [(f64, f64)] {
    cached_rule(Family::Hermite, n)
}

/// Composite rule: `panels` equal panels of the `n`-point rule on `[a, b]`.
pub fn composite<T, F>(mut f: F, a: f64, b: f64, panels: usize, n: usize) -> Result<T>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let rule = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut sum = T::zero();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let mut panel = T::zero();
        for &(x, w) in rule {
            panel = panel + f(mid + 0.5 * h * x)? * w;
        }
        sum = sum + panel * (0.5 * h);
    }
    Ok(sum)
}

/// Result of a doubling integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    /// |I(2P) - I(P)| at the final panel count.
    pub abs_error: f64,
    pub evaluations: usize,
    /// Panel count of the returned value.
    pub panels: usize,
}

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Doubling {
    pub initial_panels: usize,
    pub nodes: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for Doubling {
    fn default() -> Self {
        Self {
            initial_panels: 1,
            nodes: 16,
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_panels: 1 << 14,
        }
    }
}

impl Doubling {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_initial_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }
}

/// Integrates `f` over `[a, b]`, doubling the panel count until two
/// successive estimates agree within tolerance.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, opts: &Doubling) -> Result<Integral<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            abs_error: 0.0,
            evaluations: 0,
            panels: 0,
        });
    }
    let mut panels = opts.initial_panels.max(1);
    let mut evaluations = panels * opts.nodes;
    let mut coarse = composite(&mut f, a, b, panels, opts.nodes)?;
    loop {
        let fine_panels = panels * 2;
        let fine = composite(&mut f, a, b, fine_panels, opts.nodes)?;
        evaluations += fine_panels * opts.nodes;
        let err = (fine - coarse).magnitude();
        let tol = opts.abs_tol.max(opts.rel_tol * fine.magnitude());
        if err <= tol {
            return Ok(Integral {
                value: fine,
                abs_error: err,
                evaluations,
                panels: fine_panels,
            });
        }
        if fine_panels >= opts.max_panels {
            return Err(SpdcError::Quadrature {
                value: fine.magnitude(),
                error: err,
                evaluations,
            });
        }
        panels = fine_panels;
        coarse = fine;
    }
}

/// Infallible-integrand convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, opts: &Doubling) -> Result<Integral<f64>>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Ok(f(x)), a, b, opts)
}
