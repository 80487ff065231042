//! Lifted linear models of nonlinear dynamical systems.
//!
//! The crate learns finite-dimensional approximations of the Koopman
//! operator from trajectory data with extended dynamic mode decomposition
//! (EDMD), optionally with a control input (EDMDc), and checks the
//! control-relevant properties of the learned model: prediction accuracy,
//! stability of the spectrum, and controllability/observability ranks.
//!
//! Module map:
//!
//! * [`dictionary`] observable functions, lifting and projection
//! * [`dynamics`] benchmark systems, RK4 simulation, training data
//! * [`edmd`] snapshot assembly, operator fits and both prediction schemes
//! * [`analysis`] spectra, matrix logarithm, rank tests, error metrics
//! * [`ingest`] measurement files and velocity estimation
//! * [`config`] and [`reproduce`] experiment configuration and the
//!   end-to-end reproduction targets

pub mod analysis;
pub mod config;
pub mod dictionary;
pub mod dynamics;
pub mod edmd;
mod error;
pub mod ingest;
pub mod linalg;
pub mod reproduce;
pub mod rng;

pub use analysis::{
    analyze, controllability_rank, cumulative_error, generator, observability_rank, spectrum,
    AnalysisOptions, AnalysisReport, RankResult, Spectrum,
};
pub use dictionary::{
    build_dictionary, Dictionary, DictionaryKind, DictionarySpec, Expr, ObservableFn,
    ObservableKind, ProjectionMatrix,
};
pub use dynamics::{
    generate_training_set, rk4_step, sample_initial_conditions, simulate, GolfParameters,
    InputSignal, SystemModel, Trajectory,
};
pub use edmd::{
    assemble, fit, fit_with_control, pinv, predict_corrected, predict_straight, KoopmanModel,
    SnapshotSet,
};
pub use error::{Error, Result};
