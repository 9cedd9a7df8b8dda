//! Bandit learners: EXP3 over pure plans and outcome-sampling CFR+.

use rand::{Rng, RngCore};

use super::{Feedback, Learner, LearnerError};
use crate::game::{enumerate_plans, SeqStrategy, Treeplex};

/// Largest number of pure plans EXP3 enumerates.
pub const MAX_PLANS: usize = 10_000;

/// EXP3 with uniform exploration `gamma` over every pure plan of a treeplex.
#[derive(Clone, Debug)]
pub struct Exp3 {
    tp: Treeplex,
    plans: Vec<Vec<usize>>,
    gamma: f64,
    range: f64,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    current: SeqStrategy,
    sum: Vec<f64>,
    last: Option<usize>,
    rounds: usize,
}

impl Exp3 {
    /// Payoffs must lie in `[0, range]`.
    pub fn new(tp: &Treeplex, gamma: f64, range: f64) -> Result<Self, LearnerError> {
        let plans = enumerate_plans(tp, MAX_PLANS).ok_or(LearnerError::TooManyPlans(tp.num_plans()))?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(LearnerError::BadParameter(format!("exploration {gamma} not in (0, 1]")));
        }
        let k = plans.len();
        let mut out = Exp3 {
            tp: tp.clone(),
            plans,
            gamma,
            range,
            log_weights: vec![0.0; k],
            probs: vec![1.0 / k as f64; k],
            current: SeqStrategy::uniform(tp),
            sum: vec![0.0; tp.num_sequences()],
            last: None,
            rounds: 0,
        };
        out.refresh();
        Ok(out)
    }

    pub fn num_arms(&self) -> usize {
        self.plans.len()
    }

    pub fn plans(&self) -> &[Vec<usize>] {
        &self.plans
    }

    /// Current probability of every arm.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    fn refresh(&mut self) {
        let k = self.plans.len() as f64;
        let m = self.log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = w.iter().sum();
        self.probs = w.iter().map(|x| (1.0 - self.gamma) * x / s + self.gamma / k).collect();
        let mut mass = vec![0.0; self.tp.num_sequences()];
        mass[0] = 1.0;
        for (plan, &p) in self.plans.iter().zip(&self.probs) {
            // A plan reaches an infoset iff it picked the parent sequence.
            let mut on = vec![false; self.tp.num_sequences()];
            on[0] = true;
            for (k, &a) in plan.iter().enumerate() {
                if on[self.tp.parent_seq[k]] {
                    let s = self.tp.seq(k, a);
                    on[s] = true;
                    mass[s] += p;
                }
            }
        }
        self.current = SeqStrategy { player: self.tp.player, mass };
    }

    /// Samples an arm index and remembers it for the next update.
    pub fn sample_arm(&mut self, rng: &mut dyn RngCore) -> usize {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut arm = self.probs.len() - 1;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if r < acc {
                arm = i;
                break;
            }
        }
        self.last = Some(arm);
        arm
    }

    /// Importance-weighted update for the last sampled arm.
    pub fn step(&mut self, payoff: f64) -> Result<(), LearnerError> {
        let arm = self.last.take().ok_or(LearnerError::NoPendingSample)?;
        if !payoff.is_finite() {
            return Err(LearnerError::NonFinite);
        }
        if payoff < -1e-12 || payoff > self.range + 1e-12 {
            return Err(LearnerError::PayoffOutOfRange { payoff, range: self.range });
        }
        for (s, m) in self.sum.iter_mut().zip(&self.current.mass) {
            *s += m;
        }
        let k = self.plans.len() as f64;
        let estimate = (payoff / self.range) / self.probs[arm];
        self.log_weights[arm] += self.gamma * estimate / k;
        self.refresh();
        self.rounds += 1;
        Ok(())
    }
}

impl Learner for Exp3 {
    fn player(&self) -> usize {
        self.tp.player
    }

    fn treeplex(&self) -> &Treeplex {
        &self.tp
    }

    fn feedback(&self) -> Feedback {
        Feedback::Bandit
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

    fn observe(&mut self, _utility: &[f64]) -> Result<(), LearnerError> {
        Err(LearnerError::WrongFeedback)
    }

    fn sample_plan(&mut self, rng: &mut dyn RngCore) -> Vec<usize> {
        let arm = self.sample_arm(rng);
        self.plans[arm].clone()
    }

    fn observe_payoff(&mut self, _terminal_seq: usize, payoff: f64) -> Result<(), LearnerError> {
        self.step(payoff)
    }
}

/// Outcome-sampling CFR+: regret matching+ on importance-weighted estimates
/// of the sequence utility, with `epsilon`-uniform exploration mixed in at
/// every infoset.
#[derive(Clone, Debug)]
pub struct OutcomeSampling {
    tp: Treeplex,
    epsilon: f64,
    range: f64,
    regrets: Vec<f64>,
    policy: Vec<Vec<f64>>,
    current: SeqStrategy,
    sum: Vec<f64>,
    pending: bool,
    rounds: usize,
}

impl OutcomeSampling {
    pub fn new(tp: &Treeplex, epsilon: f64, range: f64) -> Result<Self, LearnerError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(LearnerError::BadParameter(format!("exploration {epsilon} not in (0, 1]")));
        }
        let policy: Vec<Vec<f64>> = tp.num_actions.iter().map(|&k| vec![1.0 / k as f64; k]).collect();
        Ok(OutcomeSampling {
            tp: tp.clone(),
            epsilon,
            range,
            regrets: vec![0.0; tp.num_sequences()],
            current: SeqStrategy::uniform(tp),
            policy,
            sum: vec![0.0; tp.num_sequences()],
            pending: false,
            rounds: 0,
        })
    }

    fn refresh(&mut self) {
        for k in 0..self.tp.num_infosets() {
            let first = self.tp.first_seq[k];
            let na = self.tp.num_actions[k];
            let total: f64 = self.regrets[first..first + na].iter().sum();
            for a in 0..na {
                let rm = if total > 0.0 { self.regrets[first + a] / total } else { 1.0 / na as f64 };
                self.policy[k][a] = (1.0 - self.epsilon) * rm + self.epsilon / na as f64;
            }
        }
        self.current = SeqStrategy::from_behavioral(&self.tp, &self.policy);
    }
}

impl Learner for OutcomeSampling {
    fn player(&self) -> usize {
        self.tp.player
    }

    fn treeplex(&self) -> &Treeplex {
        &self.tp
    }

    fn feedback(&self) -> Feedback {
        Feedback::Bandit
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

    fn observe(&mut self, _utility: &[f64]) -> Result<(), LearnerError> {
        Err(LearnerError::WrongFeedback)
    }

    fn sample_plan(&mut self, rng: &mut dyn RngCore) -> Vec<usize> {
        self.pending = true;
        self.policy
            .iter()
            .map(|p| {
                let r: f64 = rng.gen();
                let mut acc = 0.0;
                for (a, q) in p.iter().enumerate() {
                    acc += q;
                    if r < acc {
                        return a;
                    }
                }
                p.len() - 1
            })
            .collect()
    }

    fn observe_payoff(&mut self, terminal_seq: usize, payoff: f64) -> Result<(), LearnerError> {
        if !std::mem::take(&mut self.pending) {
            return Err(LearnerError::NoPendingSample);
        }
        if !payoff.is_finite() {
            return Err(LearnerError::NonFinite);
        }
        if payoff < -1e-12 || payoff > self.range + 1e-12 {
            return Err(LearnerError::PayoffOutOfRange { payoff, range: self.range });
        }
        for (s, m) in self.sum.iter_mut().zip(&self.current.mass) {
            *s += m;
        }
        let mut estimate = vec![0.0; self.tp.num_sequences()];
        estimate[terminal_seq] = (payoff / self.range) / self.current.mass[terminal_seq];
        let tp = &self.tp;
        let mut value = estimate;
        for k in (0..tp.num_infosets()).rev() {
            let first = tp.first_seq[k];
            let na = tp.num_actions[k];
            let vk: f64 = (0..na).map(|a| self.policy[k][a] * value[first + a]).sum();
            for a in 0..na {
                let r = &mut self.regrets[first + a];
                *r = (*r + value[first + a] - vk).max(0.0);
            }
            value[tp.parent_seq[k]] += vk;
        }
        self.refresh();
        self.rounds += 1;
        Ok(())
    }
}
