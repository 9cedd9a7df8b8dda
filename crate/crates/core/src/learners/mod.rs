//! No-regret learners and the adversarial players used in negative tests.

pub mod adversary;
mod cfr;
mod exp3;
mod mwu;
mod regret;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

pub use adversary::{equilibrium_adversary, table_equilibrium, AdversaryError, BudgetAdversary, BudgetPhase, PayoffTable};
pub use cfr::{Averaging, CfrPlus};
pub use exp3::{Exp3, OutcomeSampling, MAX_PLANS};
pub use mwu::Mwu;
pub use regret::{RegretBound, RegretRecord};

use crate::game::{SeqStrategy, Treeplex};

#[derive(Debug, thiserror::Error)]
pub enum LearnerError {
    #[error("utility has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite utility")]
    NonFinite,
    #[error("payoff {payoff} outside [0, {range}]")]
    PayoffOutOfRange { payoff: f64, range: f64 },
    #[error("learner needs a single decision point, player has {0} infosets")]
    NotNormalForm(usize),
    #[error("{0} pure plans is too many to enumerate")]
    TooManyPlans(u128),
    #[error("bad learner parameter: {0}")]
    BadParameter(String),
    #[error("payoff reported without a sampled plan")]
    NoPendingSample,
    #[error("learner does not accept this kind of feedback")]
    WrongFeedback,
    #[error("regret of an empty record")]
    EmptyRecord,
}

/// What a learner observes after each round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feedback {
    /// The whole linear utility over its sequences.
    Full,
    /// Only the payoff of the sampled playout.
    Bandit,
}

pub trait Learner: Send {
    fn player(&self) -> usize;
    fn treeplex(&self) -> &Treeplex;
    fn feedback(&self) -> Feedback;
    /// Strategy for the coming round.
    fn strategy(&self) -> &SeqStrategy;
    /// Weighted average of past strategies.
    fn average(&self) -> SeqStrategy;
    fn rounds(&self) -> usize;
    /// Full-feedback update with the utility coefficients over sequences.
    fn observe(&mut self, utility: &[f64]) -> Result<(), LearnerError>;

    /// Draws a pure plan (one action per local infoset) for this round.
    fn sample_plan(&mut self, rng: &mut dyn RngCore) -> Vec<usize> {
        let tp = self.treeplex();
        let x = self.strategy();
        (0..tp.num_infosets())
            .map(|k| {
                let r: f64 = rng.gen();
                let probs = x.behavior_at(tp, k);
                let mut acc = 0.0;
                for (a, p) in probs.iter().enumerate() {
                    acc += p;
                    if r < acc {
                        return a;
                    }
                }
                probs.len() - 1
            })
            .collect()
    }

    /// Bandit update with the realized payoff and the player's last
    /// sequence on the sampled playout.
    fn observe_payoff(&mut self, _terminal_seq: usize, _payoff: f64) -> Result<(), LearnerError> {
        Err(LearnerError::WrongFeedback)
    }
}

/// Learner choice from configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerKind {
    CfrPlus {
        #[serde(default)]
        averaging: Averaging,
    },
    Mwu {
        #[serde(default = "default_eta")]
        eta: f64,
    },
    /// EXP3 over pure plans, or outcome-sampling CFR+ when there are too
    /// many plans.
    Exp3 {
        #[serde(default = "default_exploration")]
        epsilon: f64,
    },
}

fn default_eta() -> f64 {
    0.1
}

fn default_exploration() -> f64 {
    0.05
}

impl Default for LearnerKind {
    fn default() -> Self {
        LearnerKind::CfrPlus { averaging: Averaging::Uniform }
    }
}

impl LearnerKind {
    pub fn mwu() -> Self {
        LearnerKind::Mwu { eta: default_eta() }
    }

    pub fn exp3() -> Self {
        LearnerKind::Exp3 { epsilon: default_exploration() }
    }

    /// Builds a learner whose utilities lie in `[0, range]`.
    pub fn build(&self, tp: &Treeplex, range: f64) -> Result<Box<dyn Learner>, LearnerError> {
        if !(range > 0.0 && range.is_finite()) {
            return Err(LearnerError::BadParameter(format!("utility range {range}")));
        }
        Ok(match *self {
            LearnerKind::CfrPlus { averaging } => Box::new(CfrPlus::new(tp, averaging)),
            LearnerKind::Mwu { eta } => Box::new(Mwu::new(tp, eta, 1.0 / range)?),
            LearnerKind::Exp3 { epsilon } => {
                if tp.num_plans() <= MAX_PLANS as u128 {
                    Box::new(Exp3::new(tp, epsilon, range)?)
                } else {
                    Box::new(OutcomeSampling::new(tp, epsilon, range)?)
                }
            }
        })
    }

    /// `R(T)` for this learner on `tp`, in units of the utility range.
    pub fn regret_bound(&self, tp: &Treeplex) -> RegretBound {
        match *self {
            LearnerKind::CfrPlus { .. } => RegretBound::cfr(tp),
            LearnerKind::Mwu { eta } => RegretBound::Mwu { actions: tp.num_actions.first().copied().unwrap_or(1), eta },
            LearnerKind::Exp3 { epsilon } => {
                if tp.num_plans() <= MAX_PLANS as u128 {
                    RegretBound::Exp3 { arms: tp.num_plans() as usize, gamma: epsilon }
                } else {
                    RegretBound::cfr(tp)
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::CfrPlus { .. } => "cfr_plus",
            LearnerKind::Mwu { .. } => "mwu",
            LearnerKind::Exp3 { .. } => "exp3",
        }
    }
}
