//! Sheriff: a smuggler loads illegal items and bargains with a sheriff.
//!
//! Player 1 (smuggler) loads `n` items in `0..=max_items`, then for each of
//! `rounds` bargaining rounds proposes a bribe in `0..=max_bribe` which player
//! 2 (sheriff) accepts or declines. Only the final round counts: an accepted
//! final bribe `b` ends the game with the sheriff getting `b` and the smuggler
//! `value * n - b`. After a declined final bribe the sheriff inspects or not.
//! Inspection that finds items makes the smuggler pay `n` to the sheriff;
//! inspection that finds nothing costs the sheriff 1, paid to the smuggler.
//! Without inspection the sheriff gets 0 and the smuggler `value * n`.

use crate::game::{GameTree, NodeId, TreeBuilder};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SheriffParams {
    pub max_items: usize,
    pub max_bribe: usize,
    pub rounds: usize,
    pub item_value: f64,
}

impl Default for SheriffParams {
    fn default() -> Self {
        SheriffParams { max_items: 1, max_bribe: 2, rounds: 2, item_value: 5.0 }
    }
}

const SMUGGLER: usize = 0;
const SHERIFF: usize = 1;

pub fn sheriff(params: SheriffParams) -> GameTree {
    let mut b = TreeBuilder::new(2);
    let items: Vec<String> = (0..=params.max_items).map(|n| n.to_string()).collect();
    let item_refs: Vec<&str> = items.iter().map(String::as_str).collect();
    let root = b.decision(None, SMUGGLER, "load", &item_refs);
    for n in 0..=params.max_items {
        bargain(&mut b, root, &params, n, 0, String::new(), None);
    }
    b.finish_normalized()
}

fn bargain(
    b: &mut TreeBuilder,
    parent: NodeId,
    params: &SheriffParams,
    items: usize,
    round: usize,
    public: String,
    last: Option<(usize, bool)>,
) {
    let value = params.item_value * items as f64;
    if round == params.rounds {
        let (bribe, accepted) = last.expect("at least one round");
        if accepted {
            b.terminal(Some(parent), &[value - bribe as f64, bribe as f64]);
            return;
        }
        let node = b.decision(Some(parent), SHERIFF, format!("inspect?{public}"), &["pass", "inspect"]);
        b.terminal(Some(node), &[value, 0.0]);
        if items > 0 {
            b.terminal(Some(node), &[-(items as f64), items as f64]);
        } else {
            b.terminal(Some(node), &[1.0, -1.0]);
        }
        return;
    }
    let bribes: Vec<String> = (0..=params.max_bribe).map(|x| x.to_string()).collect();
    let bribe_refs: Vec<&str> = bribes.iter().map(String::as_str).collect();
    let offer = b.decision(Some(parent), SMUGGLER, format!("n={items}|{public}"), &bribe_refs);
    for bribe in 0..=params.max_bribe {
        let seen = format!("{public}b{bribe}");
        let reply = b.decision(Some(offer), SHERIFF, format!("reply?{seen}"), &["decline", "accept"]);
        for (k, accepted) in [false, true].into_iter().enumerate() {
            let tag = if k == 1 { "a" } else { "d" };
            bargain(b, reply, params, items, round + 1, format!("{seen}{tag}"), Some((bribe, accepted)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape() {
        let g = sheriff(SheriffParams::default());
        assert!(g.validate().is_empty());
        // 2 loads x (3 bribes x 2 replies) x 3 bribes x (accept + 2 inspect choices).
        assert_eq!(g.num_terminals(), 2 * 6 * 3 * 3);
        assert_eq!(g.normalization().offset, -2.0);
        assert_eq!(g.normalization().scale, 7.0);
    }

    #[test]
    fn zero_items_no_inspection_is_zero() {
        let g = sheriff(SheriffParams::default());
        let norm = g.normalization();
        // First terminal: n=0, bribes 0, declines, pass.
        let z = 0;
        assert_eq!(norm.raw(g.utility(z, SMUGGLER)), 0.0);
        assert_eq!(norm.raw(g.utility(z, SHERIFF)), 0.0);
    }
}
