//! Three-player Kuhn poker.
//!
//! Four cards, each player antes 1 and receives one card. Players act in
//! order 1, 2, 3. Until someone bets, a player may check or bet 1. After a
//! bet, every other player in turn order calls or folds once. The highest
//! card among the bettor and the callers wins the pot.

use crate::game::{GameTree, NodeId, TreeBuilder};

const CARDS: [&str; 4] = ["J", "Q", "K", "A"];
const PLAYERS: usize = 3;

pub fn kuhn3() -> GameTree {
    let mut b = TreeBuilder::new(PLAYERS);
    let mut deals = Vec::new();
    for c0 in 0..4 {
        for c1 in 0..4 {
            for c2 in 0..4 {
                if c0 != c1 && c1 != c2 && c0 != c2 {
                    deals.push([c0, c1, c2]);
                }
            }
        }
    }
    let labels: Vec<String> = deals
        .iter()
        .map(|d| d.iter().map(|&c| CARDS[c]).collect::<String>())
        .collect();
    let p = 1.0 / deals.len() as f64;
    let outcomes: Vec<(&str, f64)> = labels.iter().map(|l| (l.as_str(), p)).collect();
    let root = b.chance(None, &outcomes);
    for deal in &deals {
        betting(&mut b, root, deal, String::new(), None, [false; PLAYERS], 0);
    }
    b.finish_normalized()
}

/// Recursively emits the betting tree for one deal.
///
/// `bettor` is who bet (if anyone); `in_pot` marks players who put the extra
/// chip in; `acted` counts decisions taken so far in the current phase.
fn betting(
    b: &mut TreeBuilder,
    parent: NodeId,
    deal: &[usize; PLAYERS],
    history: String,
    bettor: Option<usize>,
    in_pot: [bool; PLAYERS],
    acted: usize,
) {
    match bettor {
        None => {
            if acted == PLAYERS {
                b.terminal(Some(parent), &showdown(deal, &[true; PLAYERS], &in_pot));
                return;
            }
            let player = acted;
            let key = format!("{}:{}", CARDS[deal[player]], history);
            let node = b.decision(Some(parent), player, key, &["check", "bet"]);
            betting(b, node, deal, format!("{history}p"), None, in_pot, acted + 1);
            let mut pot = in_pot;
            pot[player] = true;
            betting(b, node, deal, format!("{history}b"), Some(player), pot, 0);
        }
        Some(k) => {
            if acted == PLAYERS - 1 {
                b.terminal(Some(parent), &showdown(deal, &in_pot, &in_pot));
                return;
            }
            let player = (k + 1 + acted) % PLAYERS;
            let key = format!("{}:{}", CARDS[deal[player]], history);
            let node = b.decision(Some(parent), player, key, &["fold", "call"]);
            betting(b, node, deal, format!("{history}f"), Some(k), in_pot, acted + 1);
            let mut pot = in_pot;
            pot[player] = true;
            betting(b, node, deal, format!("{history}c"), Some(k), pot, acted + 1);
        }
    }
}

/// Net payoffs: every player loses its ante plus any extra chip; the best
/// card among `live` players collects the whole pot.
fn showdown(deal: &[usize; PLAYERS], live: &[bool; PLAYERS], in_pot: &[bool; PLAYERS]) -> Vec<f64> {
    let contrib: Vec<f64> = in_pot.iter().map(|&x| if x { 2.0 } else { 1.0 }).collect();
    let pot: f64 = contrib.iter().sum();
    let winner = (0..PLAYERS)
        .filter(|&i| live[i])
        .max_by_key(|&i| deal[i])
        .expect("someone is live");
    (0..PLAYERS)
        .map(|i| if i == winner { pot - contrib[i] } else { -contrib[i] })
        .collect()
}
