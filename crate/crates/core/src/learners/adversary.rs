//! Equilibrium-playing adversaries for one-shot games with payments.
//!
//! These players are not regret minimizers. Each round they look at the
//! game plus the mediator's payments and play an equilibrium of it, which
//! keeps their regret small while picking the equilibrium that hurts the
//! mediator.

use crate::game::{terminal_distribution, GameTree, SeqStrategy};

#[derive(Debug, thiserror::Error)]
pub enum AdversaryError {
    #[error("player {0} has {1} infosets; adversaries need one decision point per player")]
    NotNormalForm(usize, usize),
    #[error("{0} pure profiles is too many to tabulate")]
    TooLarge(u128),
    #[error("bonus vector for player {player} has length {got}, expected {expected}")]
    Dimension { player: usize, expected: usize, got: usize },
    #[error("support enumeration found no equilibrium")]
    NoEquilibrium,
}

const MAX_PROFILES: u128 = 1 << 16;

/// Expected payoff of every pure profile of a game in which each player
/// has a single decision point (chance moves are allowed).
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffTable {
    actions: Vec<usize>,
    values: Vec<f64>,
}

impl PayoffTable {
    /// Tabulates `u_i + bonus_i` in expectation over chance.
    pub fn from_game(game: &GameTree, bonuses: Option<&[Vec<f64>]>) -> Result<Self, AdversaryError> {
        let n = game.num_players();
        let mut actions = Vec::with_capacity(n);
        for i in 0..n {
            let tp = game.treeplex(i);
            if tp.num_infosets() != 1 {
                return Err(AdversaryError::NotNormalForm(i, tp.num_infosets()));
            }
            actions.push(tp.num_actions[0]);
        }
        let count: u128 = actions.iter().map(|&k| k as u128).product();
        if count > MAX_PROFILES {
            return Err(AdversaryError::TooLarge(count));
        }
        if let Some(b) = bonuses {
            for (i, v) in b.iter().enumerate() {
                if v.len() != game.num_terminals() {
                    return Err(AdversaryError::Dimension { player: i, expected: game.num_terminals(), got: v.len() });
                }
            }
        }
        let mut table = PayoffTable { actions, values: vec![0.0; count as usize * n] };
        for idx in 0..count as usize {
            let prof = table.profile(idx);
            let strategies: Vec<SeqStrategy> =
                (0..n).map(|i| SeqStrategy::pure(game.treeplex(i), &[prof[i]])).collect();
            let dist = terminal_distribution(game, &strategies).expect("tabulated profile is valid");
            for i in 0..n {
                let mut v = 0.0;
                for (z, p) in dist.iter().enumerate() {
                    if *p > 0.0 {
                        v += p * (game.utility(z, i) + bonuses.map_or(0.0, |b| b[i][z]));
                    }
                }
                table.values[idx * n + i] = v;
            }
        }
        Ok(table)
    }

    /// Builds a table from a payoff function on pure profiles.
    pub fn from_fn(actions: &[usize], f: impl Fn(&[usize]) -> Vec<f64>) -> Self {
        let n = actions.len();
        let count: usize = actions.iter().product();
        let mut table = PayoffTable { actions: actions.to_vec(), values: vec![0.0; count * n] };
        for idx in 0..count {
            let v = f(&table.profile(idx));
            table.values[idx * n..(idx + 1) * n].copy_from_slice(&v);
        }
        table
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn num_profiles(&self) -> usize {
        self.values.len() / self.actions.len()
    }

    /// Mixed-radix index with player 0 most significant.
    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.actions).fold(0, |acc, (&a, &k)| acc * k + a)
    }

    pub fn profile(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.actions.len()];
        for i in (0..self.actions.len()).rev() {
            out[i] = idx % self.actions[i];
            idx /= self.actions[i];
        }
        out
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> f64 {
        self.values[self.index(profile) * self.actions.len() + player]
    }

    /// Entrywise sum of two tables over the same action sets.
    pub fn plus(&self, other: &PayoffTable) -> PayoffTable {
        assert_eq!(self.actions, other.actions, "tables over different games");
        PayoffTable {
            actions: self.actions.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    /// Expected payoff of `player` under independent mixed strategies.
    pub fn expected(&self, mixed: &[Vec<f64>], player: usize) -> f64 {
        let n = self.actions.len();
        (0..self.num_profiles())
            .map(|idx| {
                let prof = self.profile(idx);
                let p: f64 = prof.iter().enumerate().map(|(j, &a)| mixed[j][a]).product();
                p * self.values[idx * n + player]
            })
            .sum()
    }

    /// Payoff of each action of `player` against the others' mixed strategies.
    pub fn action_values(&self, mixed: &[Vec<f64>], player: usize) -> Vec<f64> {
        let mut m = mixed.to_vec();
        (0..self.actions[player])
            .map(|a| {
                m[player] = unit(self.actions[player], a);
                self.expected(&m, player)
            })
            .collect()
    }

    /// Largest unilateral gain from a pure deviation.
    pub fn deviation_benefit(&self, mixed: &[Vec<f64>]) -> f64 {
        (0..self.actions.len())
            .map(|i| {
                let cur = self.expected(mixed, i);
                let best = self.action_values(mixed, i).into_iter().fold(f64::NEG_INFINITY, f64::max);
                best - cur
            })
            .fold(0.0, f64::max)
    }

    pub fn is_pure_nash(&self, profile: &[usize], tol: f64) -> bool {
        let mut p = profile.to_vec();
        (0..self.actions.len()).all(|i| {
            let cur = self.payoff(profile, i);
            (0..self.actions[i]).all(|a| {
                p[i] = a;
                let ok = self.payoff(&p, i) <= cur + tol;
                p[i] = profile[i];
                ok
            })
        })
    }

    /// Every pure Nash equilibrium, in index order.
    pub fn pure_equilibria(&self, tol: f64) -> Vec<Vec<usize>> {
        (0..self.num_profiles())
            .map(|idx| self.profile(idx))
            .filter(|p| self.is_pure_nash(p, tol))
            .collect()
    }

    /// Mixed equilibria of two-player tables by enumerating equal-size supports.
    pub fn support_enumeration(&self, tol: f64) -> Option<Vec<Vec<f64>>> {
        if self.actions.len() != 2 {
            return None;
        }
        let (m, k) = (self.actions[0], self.actions[1]);
        for size in 1..=m.min(k) {
            for s1 in subsets(m, size) {
                for s2 in subsets(k, size) {
                    // Opponent mixes on s2 to make player 0 indifferent on s1, and vice versa.
                    let y = indifference(size, |r, c| self.payoff(&[s1[r], s2[c]], 0));
                    let x = indifference(size, |r, c| self.payoff(&[s1[c], s2[r]], 1));
                    let (Some(x), Some(y)) = (x, y) else { continue };
                    if x.iter().chain(&y).any(|&p| p < -tol) {
                        continue;
                    }
                    let mut mx = vec![0.0; m];
                    let mut my = vec![0.0; k];
                    for (j, &a) in s1.iter().enumerate() {
                        mx[a] = x[j].max(0.0);
                    }
                    for (j, &a) in s2.iter().enumerate() {
                        my[a] = y[j].max(0.0);
                    }
                    let mixed = vec![mx, my];
                    if self.deviation_benefit(&mixed) <= tol {
                        return Some(mixed);
                    }
                }
            }
        }
        None
    }

    /// Converts per-player action distributions to sequence form.
    pub fn to_strategies(&self, game: &GameTree, mixed: &[Vec<f64>]) -> Vec<SeqStrategy> {
        mixed
            .iter()
            .enumerate()
            .map(|(i, p)| SeqStrategy::from_behavioral(game.treeplex(i), &[p.clone()]))
            .collect()
    }
}

fn unit(k: usize, a: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[a] = 1.0;
    v
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == size {
            out.push((0..n).filter(|&b| mask & (1 << b) != 0).collect());
        }
    }
    out
}

/// Solves for weights `w` on `size` columns with `sum w = 1` making every
/// row of `payoff(row, col)` earn the same value.
fn indifference(size: usize, payoff: impl Fn(usize, usize) -> f64) -> Option<Vec<f64>> {
    // Unknowns: w_0..w_{size-1}, v. Rows: sum_c payoff(r,c) w_c - v = 0; sum w = 1.
    let dim = size + 1;
    let mut a = vec![vec![0.0; dim + 1]; dim];
    for r in 0..size {
        for c in 0..size {
            a[r][c] = payoff(r, c);
        }
        a[r][size] = -1.0;
    }
    for c in 0..size {
        a[size][c] = 1.0;
    }
    a[size][dim] = 1.0;
    for col in 0..dim {
        let piv = (col..dim).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..dim {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=dim {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..size).map(|c| a[c][dim] / a[c][c]).collect())
}

/// A Nash equilibrium of `game` with per-terminal `bonuses` added to each
/// player's utility, preferring `prefer` when it is one, then any pure
/// equilibrium, then a mixed one.
pub fn equilibrium_adversary(
    game: &GameTree,
    bonuses: Option<&[Vec<f64>]>,
    prefer: Option<&[usize]>,
) -> Result<Vec<SeqStrategy>, AdversaryError> {
    let table = PayoffTable::from_game(game, bonuses)?;
    let mixed = table_equilibrium(&table, prefer)?;
    Ok(table.to_strategies(game, &mixed))
}

/// Equilibrium selection on a table, as action distributions.
pub fn table_equilibrium(table: &PayoffTable, prefer: Option<&[usize]>) -> Result<Vec<Vec<f64>>, AdversaryError> {
    const TOL: f64 = 1e-12;
    let pure = |p: &[usize]| p.iter().zip(table.actions()).map(|(&a, &k)| unit(k, a)).collect::<Vec<_>>();
    if let Some(p) = prefer {
        if table.is_pure_nash(p, TOL) {
            return Ok(pure(p));
        }
    }
    if let Some(p) = table.pure_equilibria(TOL).first() {
        return Ok(pure(p));
    }
    table.support_enumeration(1e-9).ok_or(AdversaryError::NoEquilibrium)
}

/// Which case of the budget adversary's rule produced a move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetPhase {
    /// Early rounds: any equilibrium of the game with payments.
    Arbitrary,
    /// The bad profile is an equilibrium and is played.
    Bad,
    /// The bad profile is not an equilibrium; play a profile that costs the
    /// mediator more than one half.
    Drain,
}

/// Players facing a mediator with total budget `budget`: any equilibrium for
/// the first `budget^2` rounds, then the bad profile whenever it is an
/// equilibrium, and otherwise a profile whose total payment exceeds 1/2.
#[derive(Clone, Debug)]
pub struct BudgetAdversary {
    budget: f64,
    bad: Vec<usize>,
    round: usize,
}

impl BudgetAdversary {
    pub fn new(budget: f64, bad: Vec<usize>) -> Self {
        BudgetAdversary { budget, bad, round: 0 }
    }

    /// Last round of the arbitrary-equilibrium phase.
    pub fn warmup(&self) -> usize {
        (self.budget * self.budget).floor() as usize
    }

    /// Picks this round's mixed profile given base utilities and the
    /// mediator's payment table.
    pub fn play(&mut self, utility: &PayoffTable, payments: &PayoffTable) -> Result<(Vec<Vec<f64>>, BudgetPhase), AdversaryError> {
        self.round += 1;
        let game = utility.plus(payments);
        if self.round <= self.warmup() {
            return Ok((table_equilibrium(&game, None)?, BudgetPhase::Arbitrary));
        }
        if game.is_pure_nash(&self.bad, 1e-12) {
            let p = self.bad.iter().zip(game.actions()).map(|(&a, &k)| unit(k, a)).collect();
            return Ok((p, BudgetPhase::Bad));
        }
        let n = payments.num_players();
        let best = (0..payments.num_profiles())
            .map(|idx| payments.profile(idx))
            .max_by(|a, b| {
                let sa: f64 = (0..n).map(|i| payments.payoff(a, i)).sum();
                let sb: f64 = (0..n).map(|i| payments.payoff(b, i)).sum();
                sa.total_cmp(&sb)
            })
            .expect("nonempty table");
        let p = best.iter().zip(game.actions()).map(|(&a, &k)| unit(k, a)).collect();
        Ok((p, BudgetPhase::Drain))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{coordination, lower_bound, matching, HARE, STAG};

    #[test]
    fn coordination_prefers_bad_equilibrium() {
        let g = coordination();
        let x = equilibrium_adversary(&g, None, Some(&[HARE, HARE])).unwrap();
        for (i, s) in x.iter().enumerate() {
            assert_eq!(s.mass[g.treeplex(i).seq(0, HARE)], 1.0);
        }
    }

    #[test]
    fn dominant_payments_give_unique_equilibrium() {
        let g = coordination();
        // Pay 1 for B regardless of the opponent.
        let bonuses: Vec<Vec<f64>> = (0..2)
            .map(|i| (0..g.num_terminals()).map(|z| if g.terminal_seq(z, i) == g.treeplex(i).seq(0, STAG) { 1.0 } else { 0.0 }).collect())
            .collect();
        let x = equilibrium_adversary(&g, Some(&bonuses), Some(&[HARE, HARE])).unwrap();
        for (i, s) in x.iter().enumerate() {
            assert_eq!(s.mass[g.treeplex(i).seq(0, STAG)], 1.0);
        }
        let t = PayoffTable::from_game(&g, Some(&bonuses)).unwrap();
        assert_eq!(t.pure_equilibria(1e-12), vec![vec![STAG, STAG]]);
    }

    #[test]
    fn matching_game_has_pure_coordination_equilibrium() {
        let g = matching();
        let x = equilibrium_adversary(&g, None, None).unwrap();
        assert!(x.iter().all(|s| s.is_pure(0.0)));
        let t = PayoffTable::from_game(&g, None).unwrap();
        // Oracle: the two diagonal profiles are the only pure equilibria.
        assert_eq!(t.pure_equilibria(1e-12), vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn support_enumeration_finds_mixed() {
        // Matching pennies has only the uniform equilibrium.
        let t = PayoffTable::from_fn(&[2, 2], |a| if a[0] == a[1] { vec![1.0, 0.0] } else { vec![0.0, 1.0] });
        assert!(t.pure_equilibria(1e-12).is_empty());
        let m = t.support_enumeration(1e-9).unwrap();
        for p in &m {
            assert!((p[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_bound_table() {
        let n = 3;
        let g = lower_bound(n);
        let t = PayoffTable::from_game(&g, None).unwrap();
        let all = |a| vec![a; n];
        let norm = g.normalization();
        assert!((norm.raw(t.payoff(&all(STAG), 0)) - 1.0 / 4.0).abs() < 1e-12);
        assert!((norm.raw(t.payoff(&all(HARE), 0)) - 0.5 / 4.0).abs() < 1e-12);
        assert!(t.is_pure_nash(&all(HARE), 0.0));
        assert!(t.is_pure_nash(&all(STAG), 0.0));
    }

    #[test]
    fn budget_phases() {
        let u = PayoffTable::from_fn(&[2, 2], |a| match (a[0], a[1]) {
            (0, 0) => vec![0.5, 0.5],
            (1, 1) => vec![1.0, 1.0],
            _ => vec![0.0, 0.0],
        });
        let zero = PayoffTable::from_fn(&[2, 2], |_| vec![0.0, 0.0]);
        let big = PayoffTable::from_fn(&[2, 2], |a| vec![if a[0] == 1 { 1.0 } else { 0.0 }, if a[1] == 1 { 1.0 } else { 0.0 }]);
        let mut adv = BudgetAdversary::new(1.0, vec![0, 0]);
        assert_eq!(adv.play(&u, &zero).unwrap().1, BudgetPhase::Arbitrary);
        assert_eq!(adv.play(&u, &zero).unwrap().1, BudgetPhase::Bad);
        let (p, phase) = adv.play(&u, &big).unwrap();
        assert_eq!(phase, BudgetPhase::Drain);
        assert_eq!(p, vec![vec![0.0, 1.0], vec![0.0, 1.0]]);
    }
}
