//! Configured experiments: parsing, seeded runs with a paired baseline,
//! CSV and summary output, and parallel sweeps.

mod config;
mod experiment;
mod sweep;

pub use config::{
    parse_config, Algorithm, AlphaConfig, ExperimentConfig, GameRef, SolverConfig, SteerMode, TargetSource, OUTPUT_VAR,
    SEED_VAR,
};
pub use experiment::{
    convergence_round, prepare, run_experiment, run_prepared, HyperSummary, Prepared, RunOutput, RunSummary, Solved,
    CONVERGENCE_TOLERANCE,
};
pub use sweep::{parse_vary, run_sweep, SweepRun};

use crate::mediator::MediatorError;
use crate::steering::SteeringError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Parse(String),
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("equilibrium not certified: deviation benefit {benefit:.3e} after {iterations} iterations")]
    NotCertified { benefit: f64, iterations: usize },
    #[error(transparent)]
    Mediator(#[from] MediatorError),
    #[error(transparent)]
    Steering(#[from] SteeringError),
    #[error(transparent)]
    Learner(#[from] crate::learners::LearnerError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn config(field: impl Into<String>, reason: impl std::fmt::Display) -> Self {
        HarnessError::Config { field: field.into(), reason: reason.to_string() }
    }

    /// Whether the error comes from the configuration rather than the run.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Parse(_) | HarnessError::Config { .. })
    }
}
