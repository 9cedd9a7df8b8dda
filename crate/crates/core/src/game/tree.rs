//! Game tree storage and construction.
//!
//! Nodes are stored in depth-first preorder with the root at index 0.
//! Terminals, infosets and sequences are numbered in order of first
//! appearance in that traversal, so every vector indexed by terminals or
//! sequences has a stable layout for a given tree.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub type NodeId = usize;

/// What happens at a node.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Chance { probs: Vec<f64> },
    Decision { player: usize, infoset: usize },
    Terminal { index: usize },
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    /// Action index taken at the parent to reach this node.
    pub parent_action: usize,
    pub children: Vec<NodeId>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Infoset {
    pub player: usize,
    pub key: String,
    pub actions: Vec<String>,
    pub nodes: Vec<NodeId>,
    /// Position of this infoset inside its owner's [`Treeplex`].
    pub local: usize,
}

/// Affine map from raw payoffs to the unit interval: `norm = (raw - offset) / scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub scale: f64,
    pub offset: f64,
}

impl Normalization {
    pub fn identity() -> Self {
        Normalization { scale: 1.0, offset: 0.0 }
    }

    /// Shared scale over every player's payoffs.
    pub fn fit<'a>(raw: impl IntoIterator<Item = &'a f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in raw {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || hi - lo <= 0.0 {
            return Normalization { scale: 1.0, offset: if lo.is_finite() { lo.min(0.0) } else { 0.0 } };
        }
        Normalization { scale: hi - lo, offset: lo }
    }

    pub fn apply(&self, raw: f64) -> f64 {
        (raw - self.offset) / self.scale
    }

    pub fn raw(&self, norm: f64) -> f64 {
        norm * self.scale + self.offset
    }
}

/// One player's sequence space.
///
/// Sequence 0 is the empty sequence. Infoset `k` owns sequences
/// `first_seq[k] .. first_seq[k] + num_actions[k]`. Infosets are listed so
/// that a parent sequence's infoset always comes before its children.
#[derive(Clone, Debug, PartialEq)]
pub struct Treeplex {
    pub player: usize,
    pub infosets: Vec<usize>,
    pub parent_seq: Vec<usize>,
    pub first_seq: Vec<usize>,
    pub num_actions: Vec<usize>,
    /// For each sequence, the (local infoset, action) that ends it.
    pub seq_owner: Vec<Option<(usize, usize)>>,
    /// Sequences that are the last sequence of this player before some terminal.
    pub terminal_relevant: Vec<bool>,
    /// Local infosets whose parent sequence is the given sequence.
    pub children: Vec<Vec<usize>>,
}

impl Treeplex {
    pub fn num_sequences(&self) -> usize {
        self.seq_owner.len()
    }

    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }

    pub fn seq(&self, local_infoset: usize, action: usize) -> usize {
        self.first_seq[local_infoset] + action
    }

    /// Number of pure plans (one action per infoset), saturating.
    pub fn num_plans(&self) -> u128 {
        self.num_actions
            .iter()
            .fold(1u128, |acc, &k| acc.saturating_mul(k as u128))
    }
}

/// A structural problem found in a tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// An extensive-form game with utilities in the unit interval.
#[derive(Clone, Debug)]
pub struct GameTree {
    pub(crate) num_players: usize,
    pub(crate) nodes: Vec<Node>,
    pub(crate) infosets: Vec<Infoset>,
    pub(crate) terminals: Vec<NodeId>,
    /// `[terminal * num_players + player]`.
    pub(crate) utilities: Vec<f64>,
    pub(crate) chance_reach: Vec<f64>,
    /// `[terminal * num_players + player]` -> last sequence of that player.
    pub(crate) terminal_seq: Vec<usize>,
    pub(crate) treeplexes: Vec<Treeplex>,
    pub(crate) normalization: Normalization,
    pub(crate) violations: Vec<Violation>,
}

impl GameTree {
    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_terminals(&self) -> usize {
        self.terminals.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    pub fn terminal_node(&self, z: usize) -> NodeId {
        self.terminals[z]
    }

    pub fn utility(&self, z: usize, player: usize) -> f64 {
        self.utilities[z * self.num_players + player]
    }

    /// Utility of `player` at every terminal.
    pub fn utility_vector(&self, player: usize) -> Vec<f64> {
        (0..self.num_terminals()).map(|z| self.utility(z, player)).collect()
    }

    /// Sum of all players' utilities at every terminal.
    pub fn welfare_vector(&self) -> Vec<f64> {
        (0..self.num_terminals())
            .map(|z| (0..self.num_players).map(|i| self.utility(z, i)).sum())
            .collect()
    }

    pub fn chance_reach(&self, z: usize) -> f64 {
        self.chance_reach[z]
    }

    pub fn chance_reach_vector(&self) -> &[f64] {
        &self.chance_reach
    }

    pub fn terminal_seq(&self, z: usize, player: usize) -> usize {
        self.terminal_seq[z * self.num_players + player]
    }

    pub fn treeplex(&self, player: usize) -> &Treeplex {
        &self.treeplexes[player]
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Max minus min over every utility entry.
    pub fn reward_range(&self) -> f64 {
        let lo = self.utilities.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.utilities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    /// Problems detected while building the tree. Empty for a valid game.
    pub fn validate(&self) -> Vec<Violation> {
        self.violations.clone()
    }

    /// Whether every player has exactly one infoset (a normal-form game).
    pub fn is_normal_form(&self) -> bool {
        self.treeplexes.iter().all(|t| t.num_infosets() == 1)
            && (0..self.num_terminals())
                .all(|z| (0..self.num_players).all(|i| self.terminal_seq(z, i) != 0))
    }

    /// The infoset id for a (player, key) pair, if present.
    pub fn find_infoset(&self, player: usize, key: &str) -> Option<usize> {
        self.infosets
            .iter()
            .position(|s| s.player == player && s.key == key)
    }
}

/// Node description used by [`TreeBuilder`].
#[derive(Clone, Debug)]
pub enum RawNode {
    Chance { labels: Vec<String>, probs: Vec<f64> },
    Decision { player: usize, infoset: String, actions: Vec<String> },
    Terminal { utilities: Vec<f64> },
}

/// Builds trees node by node in preorder.
///
/// Each pushed node names its parent; children are attached in push order,
/// which must follow the parent's action order.
#[derive(Clone, Debug)]
pub struct TreeBuilder {
    num_players: usize,
    raw: Vec<RawNode>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
}

impl TreeBuilder {
    pub fn new(num_players: usize) -> Self {
        TreeBuilder { num_players, raw: Vec::new(), parent: Vec::new(), children: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn push(&mut self, parent: Option<NodeId>, node: RawNode) -> NodeId {
        let id = self.raw.len();
        self.raw.push(node);
        self.parent.push(parent);
        self.children.push(Vec::new());
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        id
    }

    pub fn chance(&mut self, parent: Option<NodeId>, outcomes: &[(&str, f64)]) -> NodeId {
        self.push(
            parent,
            RawNode::Chance {
                labels: outcomes.iter().map(|(l, _)| l.to_string()).collect(),
                probs: outcomes.iter().map(|&(_, p)| p).collect(),
            },
        )
    }

    pub fn decision(&mut self, parent: Option<NodeId>, player: usize, infoset: impl Into<String>, actions: &[&str]) -> NodeId {
        self.push(
            parent,
            RawNode::Decision {
                player,
                infoset: infoset.into(),
                actions: actions.iter().map(|a| a.to_string()).collect(),
            },
        )
    }

    pub fn terminal(&mut self, parent: Option<NodeId>, utilities: &[f64]) -> NodeId {
        self.push(parent, RawNode::Terminal { utilities: utilities.to_vec() })
    }

    /// Normalizes raw payoffs with a fitted shared scale and builds the tree.
    pub fn finish_normalized(self) -> GameTree {
        let norm = Normalization::fit(self.raw.iter().flat_map(|n| match n {
            RawNode::Terminal { utilities } => utilities.as_slice(),
            _ => &[],
        }));
        self.finish(norm)
    }

    /// Builds the tree, mapping raw payoffs through `norm`.
    pub fn finish(self, norm: Normalization) -> GameTree {
        build(self, norm)
    }
}

fn build(b: TreeBuilder, norm: Normalization) -> GameTree {
    let n = b.num_players;
    let mut violations = Vec::new();
    let mut nodes: Vec<Node> = Vec::with_capacity(b.raw.len());
    let mut infosets: Vec<Infoset> = Vec::new();
    let mut infoset_ids: HashMap<(usize, String), usize> = HashMap::new();
    let mut terminals = Vec::new();
    let mut utilities = Vec::new();
    let mut chance_reach = Vec::new();
    let mut terminal_seq = Vec::new();

    // Per player: local infoset data, filled during traversal.
    let mut tp: Vec<Treeplex> = (0..n)
        .map(|p| Treeplex {
            player: p,
            infosets: Vec::new(),
            parent_seq: Vec::new(),
            first_seq: Vec::new(),
            num_actions: Vec::new(),
            seq_owner: vec![None],
            terminal_relevant: vec![false],
            children: vec![Vec::new()],
        })
        .collect();

    if b.raw.is_empty() {
        violations.push(Violation { location: "root".into(), message: "empty tree".into() });
        return GameTree {
            num_players: n,
            nodes,
            infosets,
            terminals,
            utilities,
            chance_reach,
            terminal_seq,
            treeplexes: tp,
            normalization: norm,
            violations,
        };
    }
    let root = (0..b.raw.len()).find(|&i| b.parent[i].is_none()).unwrap_or(0);

    // Iterative preorder traversal: (raw id, new parent, parent action, reach, per-player seq).
    struct Frame {
        raw: usize,
        parent: Option<NodeId>,
        action: usize,
        reach: f64,
        seqs: Vec<usize>,
    }
    let mut stack = vec![Frame { raw: root, parent: None, action: 0, reach: 1.0, seqs: vec![0; n] }];
    while let Some(f) = stack.pop() {
        let id = nodes.len();
        if let Some(p) = f.parent {
            nodes[p].children.push(id);
        }
        let kids = &b.children[f.raw];
        let mut child_seqs: Vec<Vec<usize>> = Vec::new();
        let mut child_reach: Vec<f64> = Vec::new();
        let (kind, labels) = match &b.raw[f.raw] {
            RawNode::Chance { labels, probs } => {
                let loc = format!("chance node {id}");
                if probs.len() != kids.len() {
                    violations.push(Violation {
                        location: loc.clone(),
                        message: format!("{} probabilities for {} children", probs.len(), kids.len()),
                    });
                }
                if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                    violations.push(Violation { location: loc.clone(), message: "negative or non-finite chance probability".into() });
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    violations.push(Violation { location: loc, message: format!("chance law not normalized (sums to {s})") });
                }
                for (k, _) in kids.iter().enumerate() {
                    child_reach.push(f.reach * probs.get(k).copied().unwrap_or(0.0));
                    child_seqs.push(f.seqs.clone());
                }
                (NodeKind::Chance { probs: probs.clone() }, labels.clone())
            }
            RawNode::Decision { player, infoset, actions } => {
                let player = *player;
                if player >= n {
                    violations.push(Violation {
                        location: format!("decision node {id}"),
                        message: format!("unknown player {player}"),
                    });
                    // Treat as a terminal-less dead end; keep structure.
                    for _ in kids {
                        child_reach.push(f.reach);
                        child_seqs.push(f.seqs.clone());
                    }
                    (NodeKind::Chance { probs: vec![1.0 / kids.len().max(1) as f64; kids.len()] }, actions.clone())
                } else {
                    if actions.len() != kids.len() {
                        violations.push(Violation {
                            location: format!("decision node {id}"),
                            message: format!("{} actions for {} children", actions.len(), kids.len()),
                        });
                    }
                    let key = (player, infoset.clone());
                    let gid = match infoset_ids.get(&key) {
                        Some(&g) => {
                            let info = &mut infosets[g];
                            let t = &tp[player];
                            if info.actions.len() != actions.len() {
                                violations.push(Violation {
                                    location: format!("infoset '{}' of player {}", infoset, player),
                                    message: format!(
                                        "nodes disagree on action count ({} vs {})",
                                        info.actions.len(),
                                        actions.len()
                                    ),
                                });
                            }
                            if t.parent_seq[info.local] != f.seqs[player] {
                                violations.push(Violation {
                                    location: format!("infoset '{}' of player {}", infoset, player),
                                    message: "perfect recall violated: nodes have different sequences".into(),
                                });
                            }
                            info.nodes.push(id);
                            g
                        }
                        None => {
                            let g = infosets.len();
                            let t = &mut tp[player];
                            let local = t.infosets.len();
                            let first = t.seq_owner.len();
                            t.infosets.push(g);
                            t.parent_seq.push(f.seqs[player]);
                            t.first_seq.push(first);
                            t.num_actions.push(actions.len());
                            t.children[f.seqs[player]].push(local);
                            for a in 0..actions.len() {
                                t.seq_owner.push(Some((local, a)));
                                t.terminal_relevant.push(false);
                                t.children.push(Vec::new());
                            }
                            infosets.push(Infoset {
                                player,
                                key: infoset.clone(),
                                actions: actions.clone(),
                                nodes: vec![id],
                                local,
                            });
                            infoset_ids.insert(key, g);
                            g
                        }
                    };
                    let t = &tp[player];
                    let local = infosets[gid].local;
                    let na = t.num_actions[local];
                    for k in 0..kids.len() {
                        let mut s = f.seqs.clone();
                        s[player] = t.first_seq[local] + k.min(na.saturating_sub(1));
                        child_seqs.push(s);
                        child_reach.push(f.reach);
                    }
                    (NodeKind::Decision { player, infoset: gid }, actions.clone())
                }
            }
            RawNode::Terminal { utilities: u } => {
                let z = terminals.len();
                terminals.push(id);
                if u.len() != n {
                    violations.push(Violation {
                        location: format!("terminal {z}"),
                        message: format!("{} utilities for {} players", u.len(), n),
                    });
                }
                for i in 0..n {
                    let v = norm.apply(u.get(i).copied().unwrap_or(0.0));
                    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                        violations.push(Violation {
                            location: format!("terminal {z}"),
                            message: format!("utility {v} of player {i} outside [0,1]"),
                        });
                    }
                    utilities.push(v);
                    terminal_seq.push(f.seqs[i]);
                    tp[i].terminal_relevant[f.seqs[i]] = true;
                }
                chance_reach.push(f.reach);
                if !kids.is_empty() {
                    violations.push(Violation { location: format!("terminal {z}"), message: "terminal has children".into() });
                }
                (NodeKind::Terminal { index: z }, Vec::new())
            }
        };
        if !matches!(kind, NodeKind::Terminal { .. }) && kids.is_empty() {
            violations.push(Violation { location: format!("node {id}"), message: "non-terminal without children".into() });
        }
        nodes.push(Node { kind, parent: f.parent, parent_action: f.action, children: Vec::new(), labels });
        // Push children in reverse so they pop in action order.
        for (k, &c) in kids.iter().enumerate().rev() {
            stack.push(Frame {
                raw: c,
                parent: Some(id),
                action: k,
                reach: child_reach[k],
                seqs: child_seqs[k].clone(),
            });
        }
    }

    GameTree {
        num_players: n,
        nodes,
        infosets,
        terminals,
        utilities,
        chance_reach,
        terminal_seq,
        treeplexes: tp,
        normalization: norm,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GameTree {
        let mut b = TreeBuilder::new(2);
        let r = b.decision(None, 0, "a", &["L", "R"]);
        let l = b.decision(Some(r), 1, "b", &["l", "r"]);
        b.terminal(Some(l), &[1.0, 0.0]);
        b.terminal(Some(l), &[0.0, 1.0]);
        b.terminal(Some(r), &[0.5, 0.5]);
        b.finish(Normalization::identity())
    }

    #[test]
    fn preorder_layout() {
        let g = tiny();
        assert!(g.validate().is_empty());
        assert_eq!(g.num_terminals(), 3);
        assert_eq!(g.treeplex(0).num_sequences(), 3);
        assert_eq!(g.terminal_seq(2, 0), 2);
        assert_eq!(g.terminal_seq(2, 1), 0);
        assert!(g.treeplex(1).terminal_relevant[0]);
        assert_eq!(g.treeplex(1).parent_seq, vec![0]);
    }

    #[test]
    fn fit_normalization() {
        let n = Normalization::fit(&[-1.0, 1.0, 0.0]);
        assert_eq!(n.apply(-1.0), 0.0);
        assert_eq!(n.apply(1.0), 1.0);
        assert_eq!(n.raw(0.5), 0.0);
    }

    #[test]
    fn perfect_recall_violation_detected() {
        let mut b = TreeBuilder::new(1);
        let r = b.decision(None, 0, "a", &["L", "R"]);
        let x = b.decision(Some(r), 0, "b", &["l", "r"]);
        b.terminal(Some(x), &[0.0]);
        b.terminal(Some(x), &[0.0]);
        let y = b.decision(Some(r), 0, "b", &["l", "r"]);
        b.terminal(Some(y), &[0.0]);
        b.terminal(Some(y), &[0.0]);
        let g = b.finish(Normalization::identity());
        assert_eq!(g.validate().len(), 1);
        assert!(g.validate()[0].message.contains("perfect recall"));
    }
}
