//! Sampled playouts.

use rand::Rng;

use super::strategy::SeqStrategy;
use super::tree::{GameTree, NodeKind};

fn pick<R: Rng + ?Sized>(probs: impl Iterator<Item = f64>, total: f64, rng: &mut R) -> usize {
    let r = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, p) in probs.enumerate() {
        if p > 0.0 {
            last = k;
        }
        acc += p;
        if r < acc {
            return k;
        }
    }
    last
}

/// Walks the tree once, drawing chance outcomes and player actions, and
/// returns the terminal index reached.
pub fn sample_playout<R: Rng + ?Sized>(game: &GameTree, profile: &[SeqStrategy], rng: &mut R) -> usize {
    let mut node = 0;
    loop {
        let nd = game.node(node);
        match &nd.kind {
            NodeKind::Terminal { index } => return *index,
            NodeKind::Chance { probs } => {
                let k = pick(probs.iter().copied(), probs.iter().sum(), rng);
                node = nd.children[k];
            }
            NodeKind::Decision { player, infoset } => {
                let tp = game.treeplex(*player);
                let local = game.infosets()[*infoset].local;
                let x = &profile[*player];
                let parent = x.mass[tp.parent_seq[local]];
                let na = tp.num_actions[local];
                let k = if parent > 0.0 {
                    let first = tp.first_seq[local];
                    pick((0..na).map(|a| x.mass[first + a]), parent, rng)
                } else {
                    rng.gen_range(0..na)
                };
                node = nd.children[k];
            }
        }
    }
}
