use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpdcError {
    #[error(
        "angular frequency {omega} rad/fs is outside the transmission window [{lo}, {hi}] rad/fs"
    )]
    OutOfWindow { omega: f64, lo: f64, hi: f64 },

    #[error("evanescent wave: negative radicand {radicand:e} at k = ({kx}, {ky}) rad/um")]
    Evanescent { radicand: f64, kx: f64, ky: f64 },

    #[error("paraxial expansion ill-conditioned: radicand {radicand:e} below guard {threshold:e}")]
    IllConditioned { radicand: f64, threshold: f64 },

    #[error("phase matching unattainable: no sign change of the mismatch for theta in [{lo_deg}, {hi_deg}] deg")]
    NoPhaseMatching { lo_deg: f64, hi_deg: f64 },

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {evaluations} evaluations")]
    Quadrature {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("series not convergent for these parameters ({0}); use the exact quadrature path")]
    SeriesDivergent(String),

    #[error("emission azimuth {phi} rad is not a principal plane; the factorized form needs phi in {{0, pi/2}} mod pi")]
    NonPrincipalPlane { phi: f64 },

    #[error("singular overlap matrix at Z = {z}")]
    Singular { z: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("crystal definition: {0}")]
    CrystalFile(String),
}

pub type Result<T> = std::result::Result<T, SpdcError>;
