//! Multiplicative weights for players with a single decision point.

use super::{Feedback, Learner, LearnerError};
use crate::game::{SeqStrategy, Treeplex};

#[derive(Clone, Debug)]
pub struct Mwu {
    tp: Treeplex,
    eta: f64,
    scale: f64,
    log_weights: Vec<f64>,
    current: SeqStrategy,
    sum: Vec<f64>,
    rounds: usize,
}

impl Mwu {
    /// `scale` multiplies every utility before the update, so utilities in
    /// `[0, range]` should pass `1 / range`.
    pub fn new(tp: &Treeplex, eta: f64, scale: f64) -> Result<Self, LearnerError> {
        if tp.num_infosets() != 1 {
            return Err(LearnerError::NotNormalForm(tp.num_infosets()));
        }
        let k = tp.num_actions[0];
        let log_weights = vec![0.0; k];
        let current = SeqStrategy::uniform(tp);
        Ok(Mwu { tp: tp.clone(), eta, scale, log_weights, current, sum: vec![0.0; tp.num_sequences()], rounds: 0 })
    }

    /// Starts from the given action distribution instead of uniform.
    pub fn with_initial(mut self, probs: &[f64]) -> Self {
        self.log_weights = probs.iter().map(|p| p.max(1e-300).ln()).collect();
        self.refresh();
        self
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    fn refresh(&mut self) {
        let m = self.log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|x| x / s).collect();
        self.current = SeqStrategy::from_behavioral(&self.tp, &[probs]);
    }

    /// Update with per-action utilities.
    pub fn step(&mut self, action_utility: &[f64]) -> Result<&SeqStrategy, LearnerError> {
        if action_utility.len() != self.log_weights.len() {
            return Err(LearnerError::Dimension { expected: self.log_weights.len(), got: action_utility.len() });
        }
        if action_utility.iter().any(|u| !u.is_finite()) {
            return Err(LearnerError::NonFinite);
        }
        for (s, m) in self.sum.iter_mut().zip(&self.current.mass) {
            *s += m;
        }
        for (l, u) in self.log_weights.iter_mut().zip(action_utility) {
            *l += self.eta * self.scale * u;
        }
        self.refresh();
        self.rounds += 1;
        Ok(&self.current)
    }
}

impl Learner for Mwu {
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
        if self.rounds == 0 {
            return self.current.clone();
        }
        SeqStrategy { player: self.tp.player, mass: self.sum.iter().map(|s| s / self.rounds as f64).collect() }
    }

    fn rounds(&self) -> usize {
        self.rounds
    }

    fn observe(&mut self, utility: &[f64]) -> Result<(), LearnerError> {
        if utility.len() != self.tp.num_sequences() {
            return Err(LearnerError::Dimension { expected: self.tp.num_sequences(), got: utility.len() });
        }
        let first = self.tp.first_seq[0];
        let per_action: Vec<f64> = utility[first..first + self.tp.num_actions[0]].to_vec();
        self.step(&per_action).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::coordination;

    #[test]
    fn one_step_ratio() {
        let g = coordination();
        let mut m = Mwu::new(g.treeplex(0), 0.1, 1.0).unwrap();
        m.step(&[1.0, 0.0]).unwrap();
        let w = m.weights();
        assert!((w[0] / w[1] - 0.1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn equal_utilities_stay_uniform() {
        let g = coordination();
        let mut m = Mwu::new(g.treeplex(1), 0.1, 1.0).unwrap();
        for _ in 0..50 {
            m.step(&[0.3, 0.3]).unwrap();
        }
        assert_eq!(m.strategy(), &SeqStrategy::uniform(g.treeplex(1)));
    }

    #[test]
    fn rejects_extensive_form() {
        let g = crate::benchmarks::kuhn3();
        assert!(matches!(Mwu::new(g.treeplex(0), 0.1, 1.0), Err(LearnerError::NotNormalForm(_))));
    }
}
