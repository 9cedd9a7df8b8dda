//! Small hand-specified games: the extensive-form stag hunt, the n-player
//! stag/hare game with a trap equilibrium, and two 2x2 matrix games.

use crate::game::{GameTree, NodeId, SeqStrategy, TreeBuilder};

/// Action index of Hare/A in every game of this file.
pub const HARE: usize = 0;
/// Action index of Stag/B in every game of this file.
pub const STAG: usize = 1;

/// Two-player stag hunt with a chance move at the root.
///
/// Left branch: player 2 alone picks H -> (0,3) or S -> (0,0).
/// Right branch: player 1 picks H -> (3,0) or S, then player 2 (same infoset
/// as on the left) picks H -> (0,0) or S -> (4,4). Payoffs are divided by 4.
pub fn stag_hunt() -> GameTree {
    let mut b = TreeBuilder::new(2);
    let root = b.chance(None, &[("left", 0.5), ("right", 0.5)]);
    let p2 = b.decision(Some(root), 1, "P2", &["H", "S"]);
    b.terminal(Some(p2), &[0.0, 3.0]);
    b.terminal(Some(p2), &[0.0, 0.0]);
    let p1 = b.decision(Some(root), 0, "P1", &["H", "S"]);
    b.terminal(Some(p1), &[3.0, 0.0]);
    let p2b = b.decision(Some(p1), 1, "P2", &["H", "S"]);
    b.terminal(Some(p2b), &[0.0, 0.0]);
    b.terminal(Some(p2b), &[4.0, 4.0]);
    b.finish_normalized()
}

/// Every player picks the action at index `action` at each of its infosets.
pub fn constant_profile(game: &GameTree, action: usize) -> Vec<SeqStrategy> {
    (0..game.num_players())
        .map(|i| {
            let tp = game.treeplex(i);
            SeqStrategy::pure(tp, &vec![action; tp.num_infosets()])
        })
        .collect()
}

/// (S, S) in [`stag_hunt`].
pub fn stag_hunt_target(game: &GameTree) -> Vec<SeqStrategy> {
    constant_profile(game, STAG)
}

/// n-player stag/hare game.
///
/// Chance picks j in {1..n} or "none" uniformly. For a player j, only j acts:
/// Hare pays j one half, Stag pays nothing. For "none", chance picks a first
/// mover k uniformly and players act in cyclic order from k; any Hare ends
/// the game with 0 for everyone, all Stag pays 1 to everyone. Each player has
/// a single infoset.
pub fn lower_bound(n: usize) -> GameTree {
    assert!(n >= 2, "lower_bound needs at least two players");
    let mut b = TreeBuilder::new(n);
    let p = 1.0 / (n as f64 + 1.0);
    let labels: Vec<String> = (0..n).map(|j| format!("j={}", j + 1)).chain(["none".to_string()]).collect();
    let outcomes: Vec<(&str, f64)> = labels.iter().map(|l| (l.as_str(), p)).collect();
    let root = b.chance(None, &outcomes);
    for j in 0..n {
        let d = b.decision(Some(root), j, "I", &["H", "S"]);
        let mut hare = vec![0.0; n];
        hare[j] = 0.5;
        b.terminal(Some(d), &hare);
        b.terminal(Some(d), &vec![0.0; n]);
    }
    let klabels: Vec<String> = (0..n).map(|k| format!("k={}", k + 1)).collect();
    let kout: Vec<(&str, f64)> = klabels.iter().map(|l| (l.as_str(), 1.0 / n as f64)).collect();
    let second = b.chance(Some(root), &kout);
    for k in 0..n {
        let mut parent: NodeId = second;
        for step in 0..n {
            let player = (k + step) % n;
            let d = b.decision(Some(parent), player, "I", &["H", "S"]);
            b.terminal(Some(d), &vec![0.0; n]);
            parent = d;
        }
        b.terminal(Some(parent), &vec![1.0; n]);
    }
    b.finish_normalized()
}

/// Builds a simultaneous-move game as a tree in which each player moves in
/// index order without observing earlier moves.
pub fn normal_form(actions: &[Vec<&str>], payoff: impl Fn(&[usize]) -> Vec<f64>) -> GameTree {
    fn rec(
        b: &mut TreeBuilder,
        parent: Option<NodeId>,
        actions: &[Vec<&str>],
        prefix: &mut Vec<usize>,
        payoff: &dyn Fn(&[usize]) -> Vec<f64>,
    ) {
        let i = prefix.len();
        if i == actions.len() {
            let u = payoff(prefix);
            b.terminal(parent, &u);
            return;
        }
        let node = b.decision(parent, i, format!("P{}", i + 1), &actions[i]);
        for a in 0..actions[i].len() {
            prefix.push(a);
            rec(b, Some(node), actions, prefix, payoff);
            prefix.pop();
        }
    }
    let mut b = TreeBuilder::new(actions.len());
    rec(&mut b, None, actions, &mut Vec::new(), &payoff);
    b.finish_normalized()
}

/// Coordination game: (A,A) pays 0.5 each, (B,B) pays 1 each, else 0.
pub fn coordination() -> GameTree {
    normal_form(&[vec!["A", "B"], vec!["A", "B"]], |a| match (a[0], a[1]) {
        (0, 0) => vec![0.5, 0.5],
        (1, 1) => vec![1.0, 1.0],
        _ => vec![0.0, 0.0],
    })
}

/// Matching game: +1 each for choosing the same action, -1 each otherwise.
pub fn matching() -> GameTree {
    normal_form(&[vec!["A", "B"], vec!["A", "B"]], |a| {
        if a[0] == a[1] {
            vec![1.0, 1.0]
        } else {
            vec![-1.0, -1.0]
        }
    })
}
