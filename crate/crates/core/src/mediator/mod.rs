//! Optimal equilibria through a recommending mediator.

mod augment;
mod bce;
mod steer;

pub use augment::{augment, fix_mediator, AugmentedGame, TerminalIdentity};
pub use bce::{lagrangian_value, solve_optimal_bce, BceOptions, BceSolution, LagrangianGame};
pub use steer::{compute_then_steer, nf_online_payment, nf_online_steer, online_steer, NfBranch};

use crate::game::GameError;
use crate::learners::LearnerError;
use crate::steering::SteeringError;

#[derive(Debug, thiserror::Error)]
pub enum MediatorError {
    #[error("invalid mediator strategy: {0}")]
    BadStrategy(String),
    #[error("mediator solve not certified: deviation benefit {benefit:.3e} after {iterations} iterations")]
    NotCertified { benefit: f64, iterations: usize },
    #[error("normal-form game required; player {player} has {infosets} infosets")]
    NotNormalForm { player: usize, infosets: usize },
    #[error("{0}")]
    BadParameter(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Steering(#[from] SteeringError),
}
