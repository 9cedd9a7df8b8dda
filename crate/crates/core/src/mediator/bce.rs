//! Optimal Bayes-correlated equilibria through the Lagrangian saddle point.

use serde::Serialize;

use super::{AugmentedGame, MediatorError};
use crate::game::{treeplex_best_response, SeqStrategy};
use crate::learners::{Averaging, CfrPlus, Learner};

/// `u_0(mu, d) - lambda * sum_i [u_i(mu, x_i, d_-i) - u_i(mu, d)]` with the
/// per-terminal data it needs precomputed.
#[derive(Clone, Debug)]
pub struct LagrangianGame {
    /// Mediator objective per augmented terminal.
    pub objective: Vec<f64>,
    /// Direct strategies of augmented players `1..=n`.
    pub direct: Vec<SeqStrategy>,
    pub lambda: f64,
    /// Reach of the direct profile at each terminal.
    d_hat: Vec<f64>,
    /// Per base player: terminals where every other player is direct.
    others_direct: Vec<Vec<usize>>,
    /// Terminals reached by direct play.
    direct_terminals: Vec<usize>,
    chance: Vec<f64>,
    utilities: Vec<Vec<f64>>,
    mediator_seq: Vec<usize>,
    player_seq: Vec<Vec<usize>>,
}

impl LagrangianGame {
    /// `base_objective` is indexed by base terminals.
    pub fn new(aug: &AugmentedGame, base_objective: &[f64], lambda: f64) -> Self {
        let g = &aug.game;
        let n = aug.num_base_players();
        let nz = g.num_terminals();
        let direct = aug.direct_profile();
        let player_seq: Vec<Vec<usize>> = (0..n).map(|i| (0..nz).map(|z| g.terminal_seq(z, i + 1)).collect()).collect();
        let dir = |i: usize, z: usize| direct[i].mass[player_seq[i][z]];
        let d_hat: Vec<f64> = (0..nz).map(|z| (0..n).map(|i| dir(i, z)).product()).collect();
        let others_direct = (0..n)
            .map(|i| (0..nz).filter(|&z| (0..n).filter(|&j| j != i).all(|j| dir(j, z) == 1.0)).collect())
            .collect();
        LagrangianGame {
            objective: aug.lift(base_objective),
            lambda,
            direct_terminals: (0..nz).filter(|&z| d_hat[z] == 1.0).collect(),
            d_hat,
            others_direct,
            chance: g.chance_reach_vector().to_vec(),
            utilities: (1..=n).map(|p| g.utility_vector(p)).collect(),
            mediator_seq: (0..nz).map(|z| g.terminal_seq(z, 0)).collect(),
            player_seq,
            direct,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        LagrangianGame { lambda, ..self.clone() }
    }

    fn num_players(&self) -> usize {
        self.direct.len()
    }

    /// `u_0(mu, d)`.
    pub fn objective_value(&self, mu: &SeqStrategy) -> f64 {
        self.direct_terminals.iter().map(|&z| self.chance[z] * mu.mass[self.mediator_seq[z]] * self.objective[z]).sum()
    }

    /// `u_i(mu, d)` for base player `i`.
    pub fn direct_utility(&self, mu: &SeqStrategy, i: usize) -> f64 {
        self.direct_terminals
            .iter()
            .map(|&z| self.chance[z] * mu.mass[self.mediator_seq[z]] * self.utilities[i][z])
            .sum()
    }

    /// Coefficients of `x_i -> u_i(mu, x_i, d_-i)` over augmented player
    /// `i + 1`'s sequences.
    pub fn deviator_gradient(&self, mu: &SeqStrategy, i: usize, num_sequences: usize) -> Vec<f64> {
        let mut g = vec![0.0; num_sequences];
        for &z in &self.others_direct[i] {
            g[self.player_seq[i][z]] += self.chance[z] * mu.mass[self.mediator_seq[z]] * self.utilities[i][z];
        }
        g
    }

    /// `max_{x_i} u_i(mu, x_i, d_-i) - u_i(mu, d)` for every base player.
    pub fn deviation_benefits(&self, aug: &AugmentedGame, mu: &SeqStrategy) -> Vec<f64> {
        (0..self.num_players())
            .map(|i| {
                let tp = aug.game.treeplex(i + 1);
                let g = self.deviator_gradient(mu, i, tp.num_sequences());
                let (_, best) = treeplex_best_response(tp, &g);
                (best - self.direct_utility(mu, i)).max(0.0)
            })
            .collect()
    }

    /// Coefficients over the mediator's sequences of `mu -> scale * u_0(mu, d)
    /// - sum_i [u_i(mu, x_i, d_-i) - u_i(mu, d)]`.
    pub fn mediator_gradient(&self, x: &[SeqStrategy], scale: f64, num_sequences: usize) -> Vec<f64> {
        let mut g = vec![0.0; num_sequences];
        for &z in &self.direct_terminals {
            let mut v = scale * self.objective[z];
            for i in 0..self.num_players() {
                v += self.utilities[i][z];
            }
            g[self.mediator_seq[z]] += self.chance[z] * v;
        }
        for i in 0..self.num_players() {
            for &z in &self.others_direct[i] {
                let xi = x[i].mass[self.player_seq[i][z]];
                if xi != 0.0 {
                    g[self.mediator_seq[z]] -= self.chance[z] * self.utilities[i][z] * xi;
                }
            }
        }
        g
    }

    /// Terminal-wise coefficient whose dot product with the reach of
    /// `(mu, x)` gives [`lagrangian_value`]; exposed for brute-force checks.
    pub fn terminal_coefficients(&self, x: &[SeqStrategy]) -> Vec<f64> {
        let nz = self.chance.len();
        (0..nz)
            .map(|z| {
                let mut v = self.objective[z] * self.d_hat[z];
                for i in 0..self.num_players() {
                    let od: f64 = (0..self.num_players())
                        .filter(|&j| j != i)
                        .map(|j| self.direct[j].mass[self.player_seq[j][z]])
                        .product();
                    let xi = x[i].mass[self.player_seq[i][z]];
                    v -= self.lambda * self.utilities[i][z] * (xi * od - self.d_hat[z]);
                }
                self.chance[z] * v
            })
            .collect()
    }
}

/// Value of the Lagrangian at mediator strategy `mu` and deviator
/// strategies `x` (augmented players `1..=n`, in order).
pub fn lagrangian_value(lag: &LagrangianGame, mu: &SeqStrategy, x: &[SeqStrategy]) -> f64 {
    let penalty: f64 = (0..lag.num_players())
        .map(|i| {
            let g = lag.deviator_gradient(mu, i, x[i].mass.len());
            let deviated: f64 = g.iter().zip(&x[i].mass).map(|(a, b)| a * b).sum();
            deviated - lag.direct_utility(mu, i)
        })
        .sum();
    lag.objective_value(mu) - lag.lambda * penalty
}

/// Solver settings.
#[derive(Clone, Debug, Serialize)]
pub struct BceOptions {
    /// Total self-play iterations over all multipliers.
    pub budget: usize,
    /// Certificate threshold on every player's deviation benefit.
    pub tolerance: f64,
    /// Duality gap, relative to `lambda`, at which a multiplier is judged.
    pub gap_tolerance: f64,
    pub initial_lambda: f64,
    /// Iterations between convergence checks.
    pub check_every: usize,
}

impl Default for BceOptions {
    fn default() -> Self {
        BceOptions { budget: 200_000, tolerance: 1e-4, gap_tolerance: 2e-5, initial_lambda: 1.0, check_every: 100 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BceSolution {
    #[serde(skip)]
    pub mu: SeqStrategy,
    /// `u_0(mu, d)` in objective units.
    pub value: f64,
    pub benefits: Vec<f64>,
    /// Multiplier at which the solution was found; the smallest certified
    /// one when `certified`.
    pub lambda: f64,
    pub certified: bool,
    pub iterations: usize,
    pub duality_gap: f64,
}

impl BceSolution {
    pub fn max_benefit(&self) -> f64 {
        self.benefits.iter().cloned().fold(0.0, f64::max)
    }
}

/// Optimal mediator strategy for a per-base-terminal objective in [0,1].
///
/// CFR+ self-play between the mediator and one deviator per player on the
/// Lagrangian, doubling the multiplier from `initial_lambda` until the
/// average mediator strategy's deviation benefits fall under `tolerance`.
pub fn solve_optimal_bce(
    aug: &AugmentedGame,
    base_objective: &[f64],
    opts: &BceOptions,
) -> Result<BceSolution, MediatorError> {
    if base_objective.len() != aug.base.num_terminals() {
        return Err(MediatorError::BadParameter(format!(
            "objective has {} entries for {} terminals",
            base_objective.len(),
            aug.base.num_terminals()
        )));
    }
    if base_objective.iter().any(|v| !(-1e-12..=1.0 + 1e-12).contains(v)) {
        return Err(MediatorError::BadParameter("objective values must lie in [0,1]".into()));
    }
    let base_lag = LagrangianGame::new(aug, base_objective, opts.initial_lambda);
    let n = aug.num_base_players();
    let tp0 = aug.game.treeplex(0);
    let mut lambda = opts.initial_lambda;
    let mut used = 0;
    let mut best: Option<BceSolution> = None;
    while used < opts.budget {
        let lag = base_lag.with_lambda(lambda);
        let mut mediator = CfrPlus::new(tp0, Averaging::Linear);
        let mut deviators: Vec<CfrPlus> =
            (1..=n).map(|p| CfrPlus::new(aug.game.treeplex(p), Averaging::Linear)).collect();
        let mut outcome = None;
        while used < opts.budget {
            let x: Vec<SeqStrategy> = deviators.iter().map(|d| d.strategy().clone()).collect();
            let g0 = lag.mediator_gradient(&x, 1.0 / lambda, tp0.num_sequences());
            let mu = mediator.step(&g0)?.clone();
            for (i, dev) in deviators.iter_mut().enumerate() {
                let g = lag.deviator_gradient(&mu, i, aug.game.treeplex(i + 1).num_sequences());
                dev.step(&g)?;
            }
            used += 1;
            if used % opts.check_every != 0 && used < opts.budget {
                continue;
            }
            let mu_bar = mediator.average();
            let x_bar: Vec<SeqStrategy> = deviators.iter().map(|d| d.average()).collect();
            let benefits = lag.deviation_benefits(aug, &mu_bar);
            let value = lag.objective_value(&mu_bar);
            // Both bounds in units of the scaled Lagrangian (objective / lambda - deviation).
            let g_bar = lag.mediator_gradient(&x_bar, 1.0 / lambda, tp0.num_sequences());
            let (_, upper) = treeplex_best_response(tp0, &g_bar);
            let lower = value / lambda - benefits.iter().sum::<f64>();
            let gap = (upper - lower).max(0.0);
            let max_benefit = benefits.iter().cloned().fold(0.0, f64::max);
            let sol = BceSolution {
                mu: mu_bar,
                value,
                benefits,
                lambda,
                certified: max_benefit <= opts.tolerance,
                iterations: used,
                duality_gap: gap * lambda,
            };
            if sol.certified && gap <= opts.gap_tolerance {
                return Ok(sol);
            }
            let judged = gap <= opts.gap_tolerance;
            let better = match &best {
                None => true,
                Some(b) => (sol.certified, -sol.max_benefit()) > (b.certified, -b.max_benefit()),
            };
            if better {
                best = Some(sol);
            }
            if judged {
                outcome = Some(());
                break;
            }
        }
        if outcome.is_none() {
            break;
        }
        lambda *= 2.0;
    }
    let mut sol = best.ok_or_else(|| MediatorError::BadParameter("zero iteration budget".into()))?;
    sol.certified = sol.max_benefit() <= opts.tolerance;
    Ok(sol)
}
