//! Two drivers competing for ride requests on a small road map.
//!
//! Both drivers start at vertex 0. Each time step, both drivers move along
//! one edge simultaneously (driver 2 does not see driver 1's move of the
//! same step). The first driver to arrive at a vertex with an open request
//! collects its reward and clears it; if both arrive at once, the request is
//! cleared and neither is paid. Drivers observe their own position and the
//! set of open requests. The game stops after `horizon` steps or once every
//! request is cleared.

use crate::game::{GameTree, NodeId, TreeBuilder};

pub const REWARDS: [f64; 7] = [1.0, 0.5, 0.5, 1.5, 4.5, 2.0, 1.5];
pub const EDGES: [(usize, usize); 10] = [(0, 1), (0, 3), (1, 2), (3, 2), (4, 2), (3, 6), (5, 6), (5, 1), (2, 5), (2, 6)];

pub fn neighbors(v: usize) -> Vec<usize> {
    let mut out: Vec<usize> = EDGES
        .iter()
        .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
        .collect();
    out.sort_unstable();
    out
}

pub fn ridesharing(horizon: usize) -> GameTree {
    let mut b = TreeBuilder::new(2);
    let open = vec![true; REWARDS.len()];
    step(&mut b, None, horizon, [0, 0], open, [0.0, 0.0]);
    b.finish_normalized()
}

fn open_key(open: &[bool]) -> String {
    open.iter().map(|&o| if o { '1' } else { '0' }).collect()
}

fn step(b: &mut TreeBuilder, parent: Option<NodeId>, left: usize, pos: [usize; 2], open: Vec<bool>, earned: [f64; 2]) {
    if left == 0 || open.iter().all(|&o| !o) {
        b.terminal(parent, &earned);
        return;
    }
    let key = open_key(&open);
    let m0 = neighbors(pos[0]);
    let m1 = neighbors(pos[1]);
    let l0: Vec<String> = m0.iter().map(|v| v.to_string()).collect();
    let l1: Vec<String> = m1.iter().map(|v| v.to_string()).collect();
    let r0: Vec<&str> = l0.iter().map(String::as_str).collect();
    let r1: Vec<&str> = l1.iter().map(String::as_str).collect();
    let first = b.decision(parent, 0, format!("at={} open={} left={}", pos[0], key, left), &r0);
    for &v0 in &m0 {
        let second = b.decision(Some(first), 1, format!("at={} open={} left={}", pos[1], key, left), &r1);
        for &v1 in &m1 {
            let mut open2 = open.clone();
            let mut e = earned;
            if v0 == v1 {
                open2[v0] = false;
            } else {
                for (d, v) in [(0, v0), (1, v1)] {
                    if open2[v] {
                        e[d] += REWARDS[v];
                        open2[v] = false;
                    }
                }
            }
            step(b, Some(second), left - 1, [v0, v1], open2, e);
        }
    }
}
