//! Best responses by bottom-up dynamic programming over infosets.

use super::eval::sequence_utility;
use super::strategy::SeqStrategy;
use super::tree::{GameTree, Treeplex};
use super::GameError;

/// Relative slack under which two action values count as tied.
const TIE_TOL: f64 = 1e-12;

/// Maximizes the linear function `x -> g . x` over the sequence-form polytope.
///
/// Ties go to the lowest action index.
pub fn treeplex_best_response(tp: &Treeplex, g: &[f64]) -> (SeqStrategy, f64) {
    let (choice, value) = treeplex_argmax(tp, g);
    (SeqStrategy::pure(tp, &choice), value)
}

/// Per-infoset maximizing actions and the optimal value.
pub fn treeplex_argmax(tp: &Treeplex, g: &[f64]) -> (Vec<usize>, f64) {
    let mut value = g.to_vec();
    let mut choice = vec![0; tp.num_infosets()];
    for k in (0..tp.num_infosets()).rev() {
        let first = tp.first_seq[k];
        let mut best = value[first];
        let mut arg = 0;
        for a in 1..tp.num_actions[k] {
            let v = value[first + a];
            if v > best + TIE_TOL * best.abs().max(1.0) {
                best = v;
                arg = a;
            }
        }
        choice[k] = arg;
        value[tp.parent_seq[k]] += best;
    }
    (choice, value[0])
}

/// Best pure response of `player` to the rest of `profile`, maximizing
/// expected utility plus an optional per-terminal bonus.
///
/// `profile[player]` is ignored.
pub fn best_response(
    game: &GameTree,
    player: usize,
    profile: &[SeqStrategy],
    bonus: Option<&[f64]>,
) -> Result<(SeqStrategy, f64), GameError> {
    if player >= game.num_players() {
        return Err(GameError::UnknownPlayer(player));
    }
    if profile.len() != game.num_players() {
        return Err(GameError::DimensionMismatch {
            what: "profile",
            expected: game.num_players(),
            got: profile.len(),
        });
    }
    let mut values = game.utility_vector(player);
    if let Some(b) = bonus {
        if b.len() != values.len() {
            return Err(GameError::DimensionMismatch { what: "bonus", expected: values.len(), got: b.len() });
        }
        for (v, x) in values.iter_mut().zip(b) {
            *v += x;
        }
    }
    let g = sequence_utility(game, profile, player, &values);
    Ok(treeplex_best_response(game.treeplex(player), &g))
}

/// Largest gain any single player can get by deviating from `profile`.
pub fn max_deviation_benefit(game: &GameTree, profile: &[SeqStrategy]) -> f64 {
    (0..game.num_players())
        .map(|i| {
            let (_, br) = best_response(game, i, profile, None).expect("valid profile");
            let cur = super::eval::expected_utility(game, profile, i, None).expect("valid profile");
            br - cur
        })
        .fold(0.0, f64::max)
}

/// Whether `profile` is a Nash equilibrium up to `tol`.
pub fn is_nash(game: &GameTree, profile: &[SeqStrategy], tol: f64) -> bool {
    max_deviation_benefit(game, profile) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::stag_hunt;
    use crate::game::eval::expected_utility;

    #[test]
    fn hare_against_hare() {
        let g = stag_hunt();
        // P2 always Hare: action 0 at its only infoset.
        let p2 = SeqStrategy::pure(g.treeplex(1), &[0]);
        let profile = vec![SeqStrategy::uniform(g.treeplex(0)), p2];
        let (br, v) = best_response(&g, 0, &profile, None).unwrap();
        assert_eq!(br.mass, SeqStrategy::pure(g.treeplex(0), &[0]).mass);
        assert!((v - 0.375).abs() < 1e-12);
        let mut prof = profile.clone();
        prof[0] = br;
        assert!((expected_utility(&g, &prof, 0, None).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn constant_bonus_keeps_argmax() {
        let g = stag_hunt();
        let profile: Vec<_> = (0..2).map(|i| SeqStrategy::uniform(g.treeplex(i))).collect();
        let ten = vec![10.0; g.num_terminals()];
        for i in 0..2 {
            let (a, _) = best_response(&g, i, &profile, None).unwrap();
            let (b, _) = best_response(&g, i, &profile, Some(&ten)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ties_prefer_lowest_index() {
        let g = stag_hunt();
        let tp = g.treeplex(0);
        let (x, v) = treeplex_best_response(tp, &vec![0.0; tp.num_sequences()]);
        assert_eq!(v, 0.0);
        assert_eq!(x.mass, SeqStrategy::pure(tp, &[0]).mass);
    }
}
