//! Payment functions of the three steering schemes.
//!
//! Every scheme is linear in the paid player's own strategy, so each one is
//! exposed both as a value and as a coefficient vector over that player's
//! sequences. A constant part is folded into the empty sequence, whose mass
//! is always 1.

use crate::game::{
    is_nash, reach_products, sequence_utility, treeplex_best_response, GameTree, SeqStrategy,
};

use super::SteeringError;

/// `d_i[z]` for every terminal: 1 when `z` is consistent with player `i`'s
/// own part of the target.
pub fn direct_indicator(game: &GameTree, target: &[SeqStrategy], player: usize) -> Vec<f64> {
    (0..game.num_terminals())
        .map(|z| target[player].mass[game.terminal_seq(z, player)])
        .collect()
}

/// `d_hat[z]`: 1 when every player is direct at `z` (chance excluded).
pub fn target_indicator(game: &GameTree, target: &[SeqStrategy]) -> Vec<f64> {
    let all: Vec<usize> = (0..game.num_players()).collect();
    reach_products(game, target, &all).expect("target matches game")
}

fn relevant_mask(game: &GameTree, target: &[SeqStrategy], player: usize) -> Vec<f64> {
    let tp = game.treeplex(player);
    target[player]
        .mass
        .iter()
        .zip(&tp.terminal_relevant)
        .map(|(&m, &r)| if r { m } else { 0.0 })
        .collect()
}

fn check_normal_form(game: &GameTree) -> Result<(), SteeringError> {
    for i in 0..game.num_players() {
        let k = game.treeplex(i).num_infosets();
        if k != 1 {
            return Err(SteeringError::NotNormalForm { player: i, infosets: k });
        }
    }
    Ok(())
}

/// Coefficients over player `i`'s sequences of the normal-form payment
/// `(d_i . x_i)(alpha + 1 - prod_{j != i} d_j . x_j)`.
pub fn nf_payment_vector(
    game: &GameTree,
    target: &[SeqStrategy],
    profile: &[SeqStrategy],
    player: usize,
    alpha: f64,
) -> Result<Vec<f64>, SteeringError> {
    check_normal_form(game)?;
    let others: f64 = (0..game.num_players())
        .filter(|&j| j != player)
        .map(|j| target[j].dot_relevant(&profile[j], game.treeplex(j)))
        .product();
    let coef = alpha + 1.0 - others;
    Ok(relevant_mask(game, target, player).into_iter().map(|m| coef * m).collect())
}

/// Normal-form payment to `player`.
pub fn nf_payment(
    game: &GameTree,
    target: &[SeqStrategy],
    profile: &[SeqStrategy],
    player: usize,
    alpha: f64,
) -> Result<f64, SteeringError> {
    let g = nf_payment_vector(game, target, profile, player, alpha)?;
    Ok(dot(&g, &profile[player]))
}

/// Coefficients over player `i`'s sequences of the full-feedback payment
/// `alpha d_i . x_i + [u_i(x_i, d_-i) - u_i(x_i, x_-i)] - min_x' [same at x']`.
///
/// The payment lies in `[0, 2 + alpha * max_x d_i . x]`, which is within
/// `[0, 3]` when `alpha * d_i . d_i <= 1`. Does not check that the target
/// is an equilibrium.
pub fn ff_payment_vector(
    game: &GameTree,
    target: &[SeqStrategy],
    profile: &[SeqStrategy],
    player: usize,
    alpha: f64,
) -> Vec<f64> {
    let u = game.utility_vector(player);
    let vs_target = sequence_utility(game, target, player, &u);
    let vs_profile = sequence_utility(game, profile, player, &u);
    let sandbox: Vec<f64> = vs_target.iter().zip(&vs_profile).map(|(a, b)| a - b).collect();
    let negated: Vec<f64> = sandbox.iter().map(|v| -v).collect();
    let (_, max_neg) = treeplex_best_response(game.treeplex(player), &negated);
    let min_sandbox = -max_neg;
    let mut g: Vec<f64> = relevant_mask(game, target, player)
        .into_iter()
        .zip(&sandbox)
        .map(|(m, s)| alpha * m + s)
        .collect();
    g[0] -= min_sandbox;
    g
}

/// Full-feedback payment to `player`; rejects targets that are not Nash
/// equilibria (checked to 1e-9).
pub fn ff_payment(
    game: &GameTree,
    target: &[SeqStrategy],
    profile: &[SeqStrategy],
    player: usize,
    alpha: f64,
) -> Result<f64, SteeringError> {
    if !is_nash(game, target, 1e-9) {
        return Err(SteeringError::TargetNotNash);
    }
    Ok(dot(&ff_payment_vector(game, target, profile, player, alpha), &profile[player]))
}

/// Trajectory payment `alpha d_hat[z] + cap d_i[z] (1 - d_hat[z])` at every terminal.
pub fn traj_payment_vector(game: &GameTree, target: &[SeqStrategy], player: usize, alpha: f64, cap: f64) -> Vec<f64> {
    let dh = target_indicator(game, target);
    let di = direct_indicator(game, target, player);
    dh.iter().zip(&di).map(|(&h, &i)| alpha * h + cap * i * (1.0 - h)).collect()
}

/// Trajectory payment to `player` at terminal `z`.
pub fn traj_payment(game: &GameTree, target: &[SeqStrategy], player: usize, z: usize, alpha: f64, cap: f64) -> f64 {
    let n = game.num_players();
    let direct = |j: usize| target[j].mass[game.terminal_seq(z, j)];
    let dh: f64 = (0..n).map(direct).product();
    alpha * dh + cap * direct(player) * (1.0 - dh)
}

fn dot(g: &[f64], x: &SeqStrategy) -> f64 {
    g.iter().zip(&x.mass).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{constant_profile, coordination, lower_bound, stag_hunt, stag_hunt_target, HARE, STAG};
    use crate::game::expected_value;

    #[test]
    fn nf_direct_profile_pays_alpha() {
        let g = coordination();
        let d = constant_profile(&g, STAG);
        for i in 0..2 {
            assert!((nf_payment(&g, &d, &d, i, 0.1).unwrap() - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn nf_one_deviator() {
        let g = coordination();
        let d = constant_profile(&g, STAG);
        let x = vec![SeqStrategy::pure(g.treeplex(0), &[STAG]), SeqStrategy::pure(g.treeplex(1), &[HARE])];
        assert!((nf_payment(&g, &d, &x, 0, 0.1).unwrap() - 1.1).abs() < 1e-12);
        assert_eq!(nf_payment(&g, &d, &x, 1, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn nf_mixed_opponent() {
        let g = coordination();
        let d = constant_profile(&g, STAG);
        let x = vec![d[0].clone(), SeqStrategy::uniform(g.treeplex(1))];
        assert!((nf_payment(&g, &d, &x, 0, 0.1).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn nf_rejects_extensive_form() {
        let g = crate::benchmarks::kuhn3();
        let x: Vec<SeqStrategy> = (0..3).map(|i| SeqStrategy::uniform(g.treeplex(i))).collect();
        assert!(matches!(nf_payment(&g, &x, &x, 0, 0.1), Err(SteeringError::NotNormalForm { .. })));
    }

    #[test]
    fn ff_at_target_is_directness_bonus() {
        let g = stag_hunt();
        let d = stag_hunt_target(&g);
        for i in 0..2 {
            let ones: f64 = d[i].dot_relevant(&d[i], g.treeplex(i));
            assert!((ff_payment(&g, &d, &d, i, 0.2).unwrap() - 0.2 * ones).abs() < 1e-12);
        }
    }

    #[test]
    fn ff_compensates_for_deviation() {
        // P2 deviates to Hare while P1 stays on Stag.
        let g = stag_hunt();
        let d = stag_hunt_target(&g);
        let x = vec![d[0].clone(), SeqStrategy::pure(g.treeplex(1), &[HARE])];
        // Sandbox term for P1 at x_1 = S: u_1(S, S) - u_1(S, H) = 0.5 - 0 = 0.5.
        // Over P1's strategies the sandbox term is 0 at H and 0.5 at S, so the min is 0.
        let alpha = 0.1;
        let p = ff_payment(&g, &d, &x, 0, alpha).unwrap();
        let bonus = alpha * d[0].dot_relevant(&x[0], g.treeplex(0));
        assert!((p - (bonus + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn ff_rejects_non_equilibrium_target() {
        let g = stag_hunt();
        let bad = vec![SeqStrategy::pure(g.treeplex(0), &[STAG]), SeqStrategy::pure(g.treeplex(1), &[HARE])];
        assert!(matches!(ff_payment(&g, &bad, &bad, 0, 0.1), Err(SteeringError::TargetNotNash)));
    }

    #[test]
    fn traj_cases() {
        let g = lower_bound(3);
        let d = constant_profile(&g, STAG);
        let (alpha, cap) = (0.3, 2.0);
        // Find the "none, k=1" terminals: first Hare ends, players act 0,1,2.
        let dh = target_indicator(&g, &d);
        for z in 0..g.num_terminals() {
            let direct: Vec<bool> = (0..3).map(|j| d[j].mass[g.terminal_seq(z, j)] == 1.0).collect();
            for i in 0..3 {
                let q = traj_payment(&g, &d, i, z, alpha, cap);
                let want = if dh[z] == 1.0 { alpha } else if direct[i] { cap } else { 0.0 };
                assert_eq!(q, want);
            }
        }
    }

    #[test]
    fn traj_expectation_closed_form() {
        let g = stag_hunt();
        let d = stag_hunt_target(&g);
        let x = vec![SeqStrategy::uniform(g.treeplex(0)), SeqStrategy::uniform(g.treeplex(1))];
        let dh = target_indicator(&g, &d);
        for i in 0..2 {
            let q = traj_payment_vector(&g, &d, i, 0.2, 3.0);
            let di = direct_indicator(&g, &d, i);
            let all_direct: Vec<f64> = dh.clone();
            let i_only: Vec<f64> = di.iter().zip(&dh).map(|(a, h)| a * (1.0 - h)).collect();
            let closed = 0.2 * expected_value(&g, &x, &all_direct) + 3.0 * expected_value(&g, &x, &i_only);
            assert!((expected_value(&g, &x, &q) - closed).abs() < 1e-12);
        }
    }
}
