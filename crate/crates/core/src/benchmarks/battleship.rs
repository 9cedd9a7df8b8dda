//! Battleship on small grids with one single-cell ship per player.
//!
//! Player 1 places its ship, then player 2 places its own without seeing the
//! first placement. Players then alternate shots, player 1 first, never
//! firing twice at the same cell. Every shot and its outcome is public. A hit
//! destroys the ship and ends the game; otherwise the game ends once each
//! player has fired `shots` times. A player scores the value of the enemy
//! ship it destroyed minus `loss_multiplier` times its own lost ships.

use crate::game::{GameTree, NodeId, TreeBuilder};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BattleshipParams {
    pub rows: usize,
    pub cols: usize,
    pub shots: usize,
    pub ship_value: f64,
    pub loss_multiplier: f64,
}

impl Default for BattleshipParams {
    fn default() -> Self {
        BattleshipParams { rows: 2, cols: 2, shots: 2, ship_value: 1.0, loss_multiplier: 2.0 }
    }
}

pub fn battleship(params: BattleshipParams) -> GameTree {
    let cells = params.rows * params.cols;
    assert!(cells >= 1 && params.shots <= cells, "invalid battleship parameters");
    let names: Vec<String> = (0..cells).map(|c| format!("{}{}", (b'a' + (c / params.cols) as u8) as char, c % params.cols)).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut b = TreeBuilder::new(2);
    let first = b.decision(None, 0, "place", &refs);
    for s0 in 0..cells {
        let second = b.decision(Some(first), 1, "place", &refs);
        for s1 in 0..cells {
            fire(&mut b, second, &params, &names, [s0, s1], [Vec::new(), Vec::new()]);
        }
    }
    b.finish_normalized()
}

fn fire(
    b: &mut TreeBuilder,
    parent: NodeId,
    params: &BattleshipParams,
    names: &[String],
    ships: [usize; 2],
    fired: [Vec<usize>; 2],
) {
    let turn = fired[0].len() + fired[1].len();
    if turn == 2 * params.shots {
        b.terminal(Some(parent), &[0.0, 0.0]);
        return;
    }
    let shooter = turn % 2;
    let target = 1 - shooter;
    let open: Vec<usize> = (0..names.len()).filter(|c| !fired[shooter].contains(c)).collect();
    let labels: Vec<&str> = open.iter().map(|&c| names[c].as_str()).collect();
    // All earlier shots missed, so the public record is just the cells fired.
    let key = format!("ship={} mine={:?} theirs={:?}", names[ships[shooter]], fired[shooter], fired[target]);
    let node = b.decision(Some(parent), shooter, key, &labels);
    for &c in &open {
        if c == ships[target] {
            let mut u = [0.0; 2];
            u[shooter] = params.ship_value;
            u[target] = -params.loss_multiplier;
            b.terminal(Some(node), &u);
        } else {
            let mut next = fired.clone();
            next[shooter].push(c);
            fire(b, node, params, names, ships, next);
        }
    }
}
