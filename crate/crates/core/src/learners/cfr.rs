//! CFR+ over a single player's treeplex.

use serde::{Deserialize, Serialize};

use super::{Feedback, Learner, LearnerError};
use crate::game::{SeqStrategy, Treeplex};

/// How the reported average strategy weights past rounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Uniform,
    /// Round `t` gets weight `t`.
    Linear,
}

#[derive(Clone, Debug)]
pub struct CfrPlus {
    tp: Treeplex,
    regrets: Vec<f64>,
    behavior: Vec<Vec<f64>>,
    current: SeqStrategy,
    sum: Vec<f64>,
    weight: f64,
    rounds: usize,
    averaging: Averaging,
}

impl CfrPlus {
    pub fn new(tp: &Treeplex, averaging: Averaging) -> Self {
        let current = SeqStrategy::uniform(tp);
        let behavior = tp.num_actions.iter().map(|&k| vec![1.0 / k as f64; k]).collect();
        CfrPlus {
            tp: tp.clone(),
            regrets: vec![0.0; tp.num_sequences()],
            behavior,
            current,
            sum: vec![0.0; tp.num_sequences()],
            weight: 0.0,
            rounds: 0,
            averaging,
        }
    }

    /// Cumulative (truncated) regret of every sequence.
    pub fn regrets(&self) -> &[f64] {
        &self.regrets
    }

    /// Applies one regret-matching+ step given the utility coefficients of
    /// the round and returns the next strategy.
    pub fn step(&mut self, utility: &[f64]) -> Result<&SeqStrategy, LearnerError> {
        let tp = &self.tp;
        if utility.len() != tp.num_sequences() {
            return Err(LearnerError::Dimension { expected: tp.num_sequences(), got: utility.len() });
        }
        if utility.iter().any(|u| !u.is_finite()) {
            return Err(LearnerError::NonFinite);
        }
        let w = match self.averaging {
            Averaging::Uniform => 1.0,
            Averaging::Linear => (self.rounds + 1) as f64,
        };
        for (s, m) in self.sum.iter_mut().zip(&self.current.mass) {
            *s += w * m;
        }
        self.weight += w;

        // Counterfactual value of every sequence's subtree, bottom-up.
        let mut value = utility.to_vec();
        for k in (0..tp.num_infosets()).rev() {
            let first = tp.first_seq[k];
            let na = tp.num_actions[k];
            let vk: f64 = (0..na).map(|a| self.behavior[k][a] * value[first + a]).sum();
            for a in 0..na {
                let r = &mut self.regrets[first + a];
                *r = (*r + value[first + a] - vk).max(0.0);
            }
            value[tp.parent_seq[k]] += vk;
        }
        for k in 0..tp.num_infosets() {
            let first = tp.first_seq[k];
            let na = tp.num_actions[k];
            let total: f64 = self.regrets[first..first + na].iter().sum();
            for a in 0..na {
                self.behavior[k][a] = if total > 0.0 { self.regrets[first + a] / total } else { 1.0 / na as f64 };
            }
        }
        self.current = SeqStrategy::from_behavioral(tp, &self.behavior);
        self.rounds += 1;
        Ok(&self.current)
    }
}

impl Learner for CfrPlus {
    fn player(&self) -> usize {
        self.tp.player
    }

    fn treeplex(&self) -> &Treeplex {
        &self.tp
    }

    fn feedback(&self) -> Feedback {
        Feedback::Full
    }

    fn strategy(&self) -> &SeqStrategy {
        &self.current
    }

    fn average(&self) -> SeqStrategy {
        if self.weight == 0.0 {
            return self.current.clone();
        }
        SeqStrategy { player: self.tp.player, mass: self.sum.iter().map(|s| s / self.weight).collect() }
    }

    fn rounds(&self) -> usize {
        self.rounds
    }

    fn observe(&mut self, utility: &[f64]) -> Result<(), LearnerError> {
        self.step(utility).map(|_| ())
    }
}
