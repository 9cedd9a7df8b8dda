//! Reach products, terminal distributions and expected utilities.

use super::strategy::SeqStrategy;
use super::tree::GameTree;
use super::GameError;

/// `x_i[z]` for every terminal.
pub fn player_reach(game: &GameTree, x: &SeqStrategy) -> Vec<f64> {
    let p = x.player;
    (0..game.num_terminals())
        .map(|z| x.mass[game.terminal_seq(z, p)])
        .collect()
}

fn check_profile(game: &GameTree, profile: &[SeqStrategy]) -> Result<(), GameError> {
    if profile.len() != game.num_players() {
        return Err(GameError::DimensionMismatch {
            what: "profile",
            expected: game.num_players(),
            got: profile.len(),
        });
    }
    for (i, x) in profile.iter().enumerate() {
        let want = game.treeplex(i).num_sequences();
        if x.mass.len() != want {
            return Err(GameError::DimensionMismatch { what: "strategy", expected: want, got: x.mass.len() });
        }
    }
    Ok(())
}

/// `prod_{j in subset} x_j[z]` for every terminal; chance is not included.
pub fn reach_products(game: &GameTree, profile: &[SeqStrategy], subset: &[usize]) -> Result<Vec<f64>, GameError> {
    check_profile(game, profile)?;
    if let Some(&bad) = subset.iter().find(|&&j| j >= game.num_players()) {
        return Err(GameError::UnknownPlayer(bad));
    }
    Ok(reach_products_unchecked(game, profile, subset))
}

pub(crate) fn reach_products_unchecked(game: &GameTree, profile: &[SeqStrategy], subset: &[usize]) -> Vec<f64> {
    let n = game.num_players();
    (0..game.num_terminals())
        .map(|z| {
            subset
                .iter()
                .map(|&j| profile[j].mass[game.terminal_seq[z * n + j]])
                .product()
        })
        .collect()
}

/// Probability of reaching each terminal, chance included.
pub fn terminal_distribution(game: &GameTree, profile: &[SeqStrategy]) -> Result<Vec<f64>, GameError> {
    check_profile(game, profile)?;
    Ok(terminal_distribution_unchecked(game, profile))
}

pub(crate) fn terminal_distribution_unchecked(game: &GameTree, profile: &[SeqStrategy]) -> Vec<f64> {
    let n = game.num_players();
    (0..game.num_terminals())
        .map(|z| {
            let mut p = game.chance_reach[z];
            for (j, x) in profile.iter().enumerate() {
                p *= x.mass[game.terminal_seq[z * n + j]];
            }
            p
        })
        .collect()
}

/// `E_{z ~ profile}[u_player(z) + bonus(z)]`.
pub fn expected_utility(
    game: &GameTree,
    profile: &[SeqStrategy],
    player: usize,
    bonus: Option<&[f64]>,
) -> Result<f64, GameError> {
    check_profile(game, profile)?;
    if player >= game.num_players() {
        return Err(GameError::UnknownPlayer(player));
    }
    if let Some(b) = bonus {
        if b.len() != game.num_terminals() {
            return Err(GameError::DimensionMismatch { what: "bonus", expected: game.num_terminals(), got: b.len() });
        }
    }
    let dist = terminal_distribution_unchecked(game, profile);
    Ok(dist
        .iter()
        .enumerate()
        .map(|(z, p)| p * (game.utility(z, player) + bonus.map_or(0.0, |b| b[z])))
        .sum())
}

/// Expectation of an arbitrary terminal vector under the profile.
pub fn expected_value(game: &GameTree, profile: &[SeqStrategy], values: &[f64]) -> f64 {
    terminal_distribution_unchecked(game, profile)
        .iter()
        .zip(values)
        .map(|(p, v)| p * v)
        .sum()
}

/// Linear coefficients over `player`'s sequences of
/// `x_player -> E[values(z)]` with every other player fixed by `profile`.
///
/// `profile[player]` is ignored.
pub fn sequence_utility(game: &GameTree, profile: &[SeqStrategy], player: usize, values: &[f64]) -> Vec<f64> {
    let n = game.num_players();
    let mut g = vec![0.0; game.treeplex(player).num_sequences()];
    for z in 0..game.num_terminals() {
        let v = values[z];
        if v == 0.0 {
            continue;
        }
        let mut w = game.chance_reach[z];
        for (j, x) in profile.iter().enumerate() {
            if j != player {
                w *= x.mass[game.terminal_seq[z * n + j]];
            }
        }
        g[game.terminal_seq[z * n + player]] += w * v;
    }
    g
}

/// Dot product of a sequence vector with a strategy.
pub fn dot(g: &[f64], x: &SeqStrategy) -> f64 {
    g.iter().zip(&x.mass).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::stag_hunt;

    #[test]
    fn stag_hunt_direct_utility() {
        let g = stag_hunt();
        let d = crate::benchmarks::stag_hunt_target(&g);
        let u0 = expected_utility(&g, &d, 0, None).unwrap();
        let u1 = expected_utility(&g, &d, 1, None).unwrap();
        assert!((u0 - 0.5).abs() < 1e-12);
        assert!((u1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_subset_is_ones() {
        let g = stag_hunt();
        let x: Vec<_> = (0..2).map(|i| SeqStrategy::uniform(g.treeplex(i))).collect();
        assert!(reach_products(&g, &x, &[]).unwrap().iter().all(|&v| v == 1.0));
        assert!(reach_products(&g, &x, &[2]).is_err());
    }

    #[test]
    fn unit_bonus_adds_one() {
        let g = stag_hunt();
        let x: Vec<_> = (0..2).map(|i| SeqStrategy::uniform(g.treeplex(i))).collect();
        let ones = vec![1.0; g.num_terminals()];
        let a = expected_utility(&g, &x, 0, None).unwrap();
        let b = expected_utility(&g, &x, 0, Some(&ones)).unwrap();
        assert!((b - a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequence_utility_matches_expectation() {
        let g = stag_hunt();
        let x: Vec<_> = (0..2).map(|i| SeqStrategy::uniform(g.treeplex(i))).collect();
        let u = g.utility_vector(1);
        let gv = sequence_utility(&g, &x, 1, &u);
        let a = dot(&gv, &x[1]);
        let b = expected_utility(&g, &x, 1, None).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
