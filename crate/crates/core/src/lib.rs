//! Simulation of coherence estimation from finite measurement data.
//!
//! The crate compares a two-copy collective measurement (Bell basis for
//! qubits, symmetric/antisymmetric pair basis for qutrits) against direct
//! Pauli measurements, a two-step adaptive scheme and maximum-likelihood
//! tomography. Ground truth comes from the exact coherence measures in
//! [`measures`]; [`harness`] runs seeded Monte Carlo sweeps over the state
//! families in [`states`] and reports mean absolute errors.

pub mod config;
pub mod error;
pub mod estimators;
pub mod figures;
pub mod harness;
pub mod linalg;
pub mod measurement;
pub mod measures;
pub mod mle;
pub mod plot;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use estimators::{
    CountSource, Estimate, EstimatorSettings, ExactCounts, SchemeKind, SchemeSpec,
};
pub use figures::{FigureName, FigureOptions};
pub use harness::{average_over_grid, oracle_mode, run_sweep, Execution, SweepConfig, SweepResult};
pub use linalg::ComplexMatrix;
pub use measures::Measure;
pub use rng::RandomStream;
pub use states::{BlochVector, DensityMatrix, StateFamily, StateFamilyPoint};
