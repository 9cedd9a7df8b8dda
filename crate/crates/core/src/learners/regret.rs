//! Regret bookkeeping with payments.

use crate::game::{treeplex_best_response, SeqStrategy, Treeplex};

use super::LearnerError;

/// Running record of the utility functions a player faced.
///
/// Utilities are linear functions of the player's sequence-form strategy
/// and include the payment of the round.
#[derive(Clone, Debug)]
pub struct RegretRecord {
    cap: f64,
    cumulative: Vec<f64>,
    realized: Vec<f64>,
    realized_total: f64,
}

impl RegretRecord {
    /// `cap` is the per-round payment cap `P`.
    pub fn new(num_sequences: usize, cap: f64) -> Self {
        RegretRecord { cap, cumulative: vec![0.0; num_sequences], realized: Vec::new(), realized_total: 0.0 }
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn rounds(&self) -> usize {
        self.realized.len()
    }

    /// Value of the round's utility at the strategy actually played.
    pub fn realized(&self) -> &[f64] {
        &self.realized
    }

    /// Sum of every recorded utility vector.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn push(&mut self, utility: &[f64], played: &SeqStrategy) {
        let v: f64 = utility.iter().zip(&played.mass).map(|(a, b)| a * b).sum();
        self.push_value(utility, v);
    }

    /// Records a round whose realized value was computed elsewhere.
    pub fn push_value(&mut self, utility: &[f64], realized: f64) {
        for (c, u) in self.cumulative.iter_mut().zip(utility) {
            *c += u;
        }
        self.realized.push(realized);
        self.realized_total += realized;
    }

    /// `(max_x sum_t v_t(x) - sum_t v_t(x_t)) / (P + 1)`.
    pub fn regret(&self, tp: &Treeplex) -> Result<f64, LearnerError> {
        if self.realized.is_empty() {
            return Err(LearnerError::EmptyRecord);
        }
        let (_, best) = treeplex_best_response(tp, &self.cumulative);
        Ok((best - self.realized_total) / (self.cap + 1.0))
    }
}

/// Regret bound `R(T)` of a learner on utilities scaled into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegretBound {
    /// `sum_I sqrt(|A_I|) * sqrt(T)`.
    Cfr { sum_sqrt_actions: f64 },
    /// `ln|A| / eta + eta T / 8`.
    Mwu { actions: usize, eta: f64 },
    /// `(e - 1) gamma T + K ln K / gamma`.
    Exp3 { arms: usize, gamma: f64 },
}

impl RegretBound {
    pub fn cfr(tp: &Treeplex) -> Self {
        RegretBound::Cfr { sum_sqrt_actions: tp.num_actions.iter().map(|&k| (k as f64).sqrt()).sum() }
    }

    pub fn at(&self, t: f64) -> f64 {
        match *self {
            RegretBound::Cfr { sum_sqrt_actions } => sum_sqrt_actions * t.sqrt(),
            RegretBound::Mwu { actions, eta } => (actions as f64).ln() / eta + eta * t / 8.0,
            RegretBound::Exp3 { arms, gamma } => {
                let k = arms as f64;
                (std::f64::consts::E - 1.0) * gamma * t + k * k.ln() / gamma
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::coordination;

    #[test]
    fn best_response_player_has_no_regret() {
        let g = coordination();
        let tp = g.treeplex(0);
        let mut rec = RegretRecord::new(tp.num_sequences(), 1.0);
        let rounds = [[0.0, 0.3, 0.7], [0.0, 0.9, 0.1], [0.0, 0.2, 0.2]];
        for u in &rounds {
            let (br, _) = treeplex_best_response(tp, u);
            rec.push(u, &br);
        }
        assert!(rec.regret(tp).unwrap() <= 0.0);
    }

    #[test]
    fn constant_maximizer_has_zero_regret() {
        let g = coordination();
        let tp = g.treeplex(0);
        let mut rec = RegretRecord::new(tp.num_sequences(), 0.5);
        let x = SeqStrategy::pure(tp, &[1]);
        for _ in 0..10 {
            rec.push(&[0.0, 0.2, 0.6], &x);
        }
        assert_eq!(rec.regret(tp).unwrap(), 0.0);
    }

    #[test]
    fn regret_is_scaled_by_cap() {
        let g = coordination();
        let tp = g.treeplex(0);
        let mut rec = RegretRecord::new(tp.num_sequences(), 3.0);
        rec.push(&[0.0, 0.0, 2.0], &SeqStrategy::pure(tp, &[0]));
        assert_eq!(rec.regret(tp).unwrap(), 0.5);
        assert!(matches!(RegretRecord::new(3, 0.0).regret(tp), Err(LearnerError::EmptyRecord)));
    }

    #[test]
    fn bound_values() {
        let b = RegretBound::Mwu { actions: 2, eta: 0.1 };
        assert!((b.at(1e5) - (2f64.ln() / 0.1 + 1250.0)).abs() < 1e-9);
        let g = coordination();
        assert!((RegretBound::cfr(g.treeplex(0)).at(100.0) - 2f64.sqrt() * 10.0).abs() < 1e-12);
    }
}
