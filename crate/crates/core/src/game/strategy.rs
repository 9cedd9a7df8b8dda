//! Sequence-form strategies.

use rand::Rng;

use super::tree::Treeplex;

/// A mixed strategy as probability mass on every sequence of one player.
#[derive(Clone, Debug, PartialEq)]
pub struct SeqStrategy {
    pub player: usize,
    pub mass: Vec<f64>,
}

impl SeqStrategy {
    /// Builds a strategy from per-infoset action distributions (behavioral form).
    pub fn from_behavioral(tp: &Treeplex, behavior: &[Vec<f64>]) -> Self {
        let mut mass = vec![0.0; tp.num_sequences()];
        mass[0] = 1.0;
        for k in 0..tp.num_infosets() {
            let parent = mass[tp.parent_seq[k]];
            for a in 0..tp.num_actions[k] {
                mass[tp.first_seq[k] + a] = parent * behavior[k][a];
            }
        }
        SeqStrategy { player: tp.player, mass }
    }

    pub fn uniform(tp: &Treeplex) -> Self {
        let beh: Vec<Vec<f64>> = tp
            .num_actions
            .iter()
            .map(|&k| vec![1.0 / k as f64; k])
            .collect();
        Self::from_behavioral(tp, &beh)
    }

    /// Pure strategy choosing `actions[k]` at local infoset `k`.
    pub fn pure(tp: &Treeplex, actions: &[usize]) -> Self {
        let beh: Vec<Vec<f64>> = tp
            .num_actions
            .iter()
            .zip(actions)
            .map(|(&k, &a)| {
                let mut v = vec![0.0; k];
                v[a] = 1.0;
                v
            })
            .collect();
        Self::from_behavioral(tp, &beh)
    }

    /// A random behavioral strategy with Dirichlet(1)-like weights per infoset.
    pub fn random<R: Rng + ?Sized>(tp: &Treeplex, rng: &mut R) -> Self {
        let beh: Vec<Vec<f64>> = tp
            .num_actions
            .iter()
            .map(|&k| {
                let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let s: f64 = w.iter().sum();
                w.iter().map(|x| x / s).collect()
            })
            .collect();
        Self::from_behavioral(tp, &beh)
    }

    /// A random pure strategy.
    pub fn random_pure<R: Rng + ?Sized>(tp: &Treeplex, rng: &mut R) -> Self {
        let actions: Vec<usize> = tp.num_actions.iter().map(|&k| rng.gen_range(0..k)).collect();
        Self::pure(tp, &actions)
    }

    /// Probability of each action at local infoset `k`, uniform where unreached.
    pub fn behavior_at(&self, tp: &Treeplex, k: usize) -> Vec<f64> {
        let parent = self.mass[tp.parent_seq[k]];
        let na = tp.num_actions[k];
        if parent <= 0.0 {
            return vec![1.0 / na as f64; na];
        }
        (0..na).map(|a| self.mass[tp.first_seq[k] + a] / parent).collect()
    }

    /// `theta * self + (1 - theta) * other`.
    pub fn mix(&self, other: &SeqStrategy, theta: f64) -> SeqStrategy {
        SeqStrategy {
            player: self.player,
            mass: self
                .mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| theta * a + (1.0 - theta) * b)
                .collect(),
        }
    }

    /// Flow-conservation check; returns a description of the first failure.
    pub fn check(&self, tp: &Treeplex, tol: f64) -> Result<(), String> {
        if self.mass.len() != tp.num_sequences() {
            return Err(format!("expected {} sequences, got {}", tp.num_sequences(), self.mass.len()));
        }
        if (self.mass[0] - 1.0).abs() > tol {
            return Err(format!("empty sequence has mass {}", self.mass[0]));
        }
        if let Some(v) = self.mass.iter().find(|&&m| !(-tol..=1.0 + tol).contains(&m)) {
            return Err(format!("mass {v} outside [0,1]"));
        }
        for k in 0..tp.num_infosets() {
            let s: f64 = (0..tp.num_actions[k]).map(|a| self.mass[tp.first_seq[k] + a]).sum();
            let p = self.mass[tp.parent_seq[k]];
            if (s - p).abs() > tol {
                return Err(format!("infoset {k}: children sum {s} but parent mass {p}"));
            }
        }
        Ok(())
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.mass.iter().all(|&m| m.abs() <= tol || (m - 1.0).abs() <= tol)
    }

    /// Dot product restricted to terminal-relevant sequences.
    pub fn dot_relevant(&self, other: &SeqStrategy, tp: &Treeplex) -> f64 {
        self.mass
            .iter()
            .zip(&other.mass)
            .zip(&tp.terminal_relevant)
            .filter(|(_, &r)| r)
            .map(|((a, b), _)| a * b)
            .sum()
    }
}

/// Enumerates every pure plan of a treeplex as action-index vectors.
///
/// Returns `None` when there are more than `limit` plans.
pub fn enumerate_plans(tp: &Treeplex, limit: usize) -> Option<Vec<Vec<usize>>> {
    if tp.num_plans() > limit as u128 {
        return None;
    }
    let mut out = vec![Vec::with_capacity(tp.num_infosets())];
    for &k in &tp.num_actions {
        let mut next = Vec::with_capacity(out.len() * k);
        for p in &out {
            for a in 0..k {
                let mut q = p.clone();
                q.push(a);
                next.push(q);
            }
        }
        out = next;
    }
    Some(out)
}
