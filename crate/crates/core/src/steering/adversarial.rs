//! Steering against players that pick worst-case equilibria instead of
//! learning.

use super::payments::{nf_payment, target_indicator, traj_payment_vector};
use super::{SteeringError, SteeringMetrics};
use crate::game::{reach_products, terminal_distribution, GameTree, SeqStrategy};
use crate::learners::{equilibrium_adversary, BudgetAdversary, BudgetPhase, PayoffTable, RegretRecord};

/// Trajectory payments with fixed `alpha` and `cap` against players who play,
/// every round, an equilibrium of the game plus that round's expected
/// payments, preferring the pure profile `prefer`.
pub fn run_trajectory_adversary(
    game: &GameTree,
    target: &[SeqStrategy],
    alpha: f64,
    cap: f64,
    rounds: usize,
    prefer: &[usize],
) -> Result<SteeringMetrics, SteeringError> {
    let n = game.num_players();
    let all: Vec<usize> = (0..n).collect();
    let d_hat = target_indicator(game, target);
    let welfare = game.welfare_vector();
    let q: Vec<Vec<f64>> = (0..n).map(|i| traj_payment_vector(game, target, i, alpha, cap)).collect();
    let direct: Vec<Vec<f64>> = (0..n).map(|i| super::payments::direct_indicator(game, target, i)).collect();
    let mut metrics = SteeringMetrics::new(n);
    for _ in 0..rounds {
        let x = equilibrium_adversary(game, Some(&q), Some(prefer))?;
        let x_hat = reach_products(game, &x, &all)?;
        let gap: f64 = x_hat.iter().zip(&d_hat).map(|(a, b)| (a - b).abs()).sum();
        let dist = terminal_distribution(game, &x)?;
        let expected: Vec<f64> = q.iter().map(|qi| dist.iter().zip(qi).map(|(p, v)| p * v).sum()).collect();
        let w: f64 = dist.iter().zip(&welfare).map(|(p, v)| p * v).sum();
        let dev: Vec<f64> = direct
            .iter()
            .map(|di| dist.iter().zip(di).filter(|(_, &d)| d == 0.0).map(|(p, _)| p).sum())
            .collect();
        metrics.push_round(&expected, &expected, w, None, gap, alpha, cap, &dev);
    }
    Ok(metrics)
}

/// Outcome of [`run_budget_capped`].
#[derive(Clone, Debug)]
pub struct BudgetRun {
    /// Pure profile played each round, when the players did not mix.
    pub profiles: Vec<Option<Vec<usize>>>,
    pub phases: Vec<BudgetPhase>,
    /// Total payment issued each round.
    pub spent: Vec<f64>,
    /// Largest regret over players after each round, including payments and
    /// divided by `P + 1`.
    pub regret: Vec<f64>,
}

/// Normal-form payments toward `target` from a mediator whose total budget
/// over the whole run is `budget`, against a [`BudgetAdversary`] aiming for
/// the pure profile `bad`. Payments are scaled down so the budget is never
/// exceeded.
pub fn run_budget_capped(
    game: &GameTree,
    target: &[SeqStrategy],
    alpha: f64,
    budget: f64,
    bad: Vec<usize>,
    rounds: usize,
) -> Result<BudgetRun, SteeringError> {
    let n = game.num_players();
    let utility = PayoffTable::from_game(game, None)?;
    let actions = utility.actions().to_vec();
    let pure_payments = PayoffTable::from_fn(&actions, |a| {
        let x: Vec<SeqStrategy> = (0..n).map(|i| SeqStrategy::pure(game.treeplex(i), &[a[i]])).collect();
        (0..n).map(|i| nf_payment(game, target, &x, i, alpha).expect("normal form")).collect()
    });
    let per_round_max = n as f64 * (1.0 + alpha);
    let mut adversary = BudgetAdversary::new(budget, bad);
    let mut records: Vec<RegretRecord> =
        (0..n).map(|i| RegretRecord::new(game.treeplex(i).num_sequences(), 1.0 + alpha)).collect();
    let mut remaining = budget;
    let mut out = BudgetRun { profiles: Vec::new(), phases: Vec::new(), spent: Vec::new(), regret: Vec::new() };
    for _ in 0..rounds {
        let scale = (remaining / per_round_max).clamp(0.0, 1.0);
        let payments = PayoffTable::from_fn(&actions, |a| {
            (0..n).map(|i| scale * pure_payments.payoff(a, i)).collect()
        });
        let (mixed, phase) = adversary.play(&utility, &payments)?;
        let total = utility.plus(&payments);
        let spent: f64 = (0..n).map(|i| payments.expected(&mixed, i)).sum();
        remaining -= spent;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            let tp = game.treeplex(i);
            let mut g = vec![0.0; tp.num_sequences()];
            let first = tp.first_seq[0];
            for (a, v) in total.action_values(&mixed, i).into_iter().enumerate() {
                g[first + a] = v;
            }
            let x = SeqStrategy::from_behavioral(tp, &[mixed[i].clone()]);
            records[i].push(&g, &x);
            worst = worst.max(records[i].regret(tp)?);
        }
        let pure = mixed
            .iter()
            .map(|p| p.iter().position(|&v| v == 1.0))
            .collect::<Option<Vec<usize>>>();
        out.profiles.push(pure);
        out.phases.push(phase);
        out.spent.push(spent);
        out.regret.push(worst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{constant_profile, coordination, lower_bound, HARE, STAG};

    #[test]
    fn hare_persists_with_small_payments() {
        let g = lower_bound(3);
        let d = constant_profile(&g, STAG);
        let m = run_trajectory_adversary(&g, &d, 0.1, 1.0, 20, &[HARE; 3]).unwrap();
        assert!(m.running_gap.iter().all(|&gap| gap >= 0.5));
    }

    #[test]
    fn budget_runs_dry_then_bad_equilibrium() {
        let g = coordination();
        let d = constant_profile(&g, STAG);
        let budget = 5.0;
        let run = run_budget_capped(&g, &d, 0.1, budget, vec![HARE, HARE], 80).unwrap();
        assert!(run.spent.iter().sum::<f64>() <= budget + 1e-9);
        assert!(run.spent.iter().all(|&s| s >= -1e-12));
        for t in 36..80 {
            assert_eq!(run.profiles[t], Some(vec![HARE, HARE]), "round {t}");
        }
        for (t, r) in run.regret.iter().enumerate() {
            assert!(*r <= 2.0 * ((t + 1) as f64).sqrt(), "round {t}: {r}");
        }
    }
}
