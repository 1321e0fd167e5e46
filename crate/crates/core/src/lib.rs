//! Paraxial two-photon wavefunction of SPDC sources and the brightness
//! integrals built on it.
//!
//! Units throughout: lengths in µm, times in fs, angular frequencies in
//! rad/fs, angles in rad.

pub mod brightness;
pub mod dispersion;
pub mod error;
pub mod geometry;
pub mod optimize;
pub mod quadrature;
pub mod thinlimit;
pub mod units;
pub mod wavefunction;

pub use brightness::{
    brightness_sweep, total_brightness, Amplitude, AmplitudeForm, BrightnessResult, DomainMode,
    FrequencyDomain, SetupAmplitude, SweepAxis, SweepPoint,
};
pub use dispersion::{
    CrystalModel, KzJet, Polarization, Sellmeier, TransverseWavevector, WaveParams,
};
pub use error::{Result, SpdcError};
pub use geometry::{
    solve_pm_angle, CollectionGeometry, CollectionMode, PolarizationTriple, Pump, SourceSetup,
    SymmetricSource,
};
pub use optimize::{
    figure_sweep, optimal_ratio, optimal_waist, BrightnessModel, ModelConfig, Objective,
    RatioOptimum, RowStatus, SweepOverrides, SweepPlan, SweepRow, WaistOptimum,
};
pub use quadrature::{Doubling, Integral};
pub use thinlimit::ThinConfig;
pub use wavefunction::{
    brute_force_phi, paraxial_params, psi_factorized, psi_general, BruteForce, JsaSample,
    ParaxialBundle,
};
