//! Payments that steer learners toward a fixed pure target equilibrium.

pub mod adversarial;
mod metrics;
pub mod payments;
mod runner;
mod schedule;

pub use adversarial::{run_budget_capped, run_trajectory_adversary, BudgetRun};
pub use metrics::{directness_gap, dynamic_alpha, SteeringMetrics};
pub use payments::{ff_payment, ff_payment_vector, nf_payment, nf_payment_vector, traj_payment, traj_payment_vector};
pub use runner::{
    run, run_full_feedback_steer, run_normal_form_steer, run_trajectory_steer, AlphaMode, RunOptions, Scheme,
};
pub use schedule::{bounds, clamped_schedule, minimal_horizon, schedule, Bounds, Hyperparams, ScheduleInput, Theorem};


use crate::game::GameError;
use crate::learners::{AdversaryError, LearnerError};

#[derive(Debug, thiserror::Error)]
pub enum SteeringError {
    #[error("normal-form payments need one decision point per player; player {player} has {infosets}")]
    NotNormalForm { player: usize, infosets: usize },
    #[error("target profile is not a Nash equilibrium")]
    TargetNotNash,
    #[error("horizon too short for the {theorem} schedule at T = {horizon}{}", match .minimal {
        Some(t) => format!("; minimal admissible T is {t}"),
        None => "; no horizon is long enough".to_string(),
    })]
    HorizonTooShort { theorem: &'static str, horizon: usize, minimal: Option<usize> },
    #[error("{0}")]
    BadParameter(String),
    #[error("length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
}
