//! Shared fixtures for the benchmarks.

use goblend_core::explorer::run;
use goblend_core::suite::{prepare, SuiteConfig};
use goblend_core::{Archive, ExperimentConfig, Replacement, Setup};

/// The built-in track with the default synthetic demonstrations.
pub fn setup() -> Setup {
    prepare(&SuiteConfig::default(), None).expect("default setup")
}

/// An archive grown by a short max-score run.
pub fn grown_archive(setup: &Setup, iterations: u64) -> Archive {
    let config = ExperimentConfig {
        name: "bench".into(),
        replacement: Replacement::Score,
        iterations,
        ..ExperimentConfig::default()
    };
    run(setup, &config, 0, 1).expect("run").archive.expect("go-blend keeps an archive")
}
