//! Shared fixtures for the criterion benchmarks.

use spdc_core::{CrystalModel, SourceSetup, SymmetricSource};

/// Phase-matched degenerate BBO source.
pub fn source(length: f64, waist: f64, alpha: f64) -> SourceSetup {
    let p = SymmetricSource {
        waist,
        alpha,
        ..SymmetricSource::default()
    };
    SourceSetup::symmetric(CrystalModel::bbo().with_length(length), &p)
        .and_then(SourceSetup::phase_matched)
        .expect("fixture setup")
}
