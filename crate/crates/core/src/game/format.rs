//! JSON game file format. The schema is described in `docs/game-format.md`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tree::{GameTree, NodeKind, Normalization, RawNode, TreeBuilder};
use super::GameError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffScale {
    /// Utilities are already in [0,1].
    #[default]
    Normalized,
    /// Utilities are raw payoffs; a shared affine map into [0,1] is fitted
    /// unless `normalization` is given.
    Raw,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: usize,
    #[serde(default)]
    pub payoffs: PayoffScale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    pub nodes: Vec<FileNode>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FileNode {
    Chance {
        id: usize,
        probs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        labels: Vec<String>,
        children: Vec<usize>,
    },
    Decision {
        id: usize,
        player: usize,
        infoset: String,
        actions: Vec<String>,
        children: Vec<usize>,
    },
    Terminal {
        id: usize,
        utilities: Vec<f64>,
    },
}

impl FileNode {
    fn id(&self) -> usize {
        match self {
            FileNode::Chance { id, .. } | FileNode::Decision { id, .. } | FileNode::Terminal { id, .. } => *id,
        }
    }

    fn children(&self) -> &[usize] {
        match self {
            FileNode::Chance { children, .. } | FileNode::Decision { children, .. } => children,
            FileNode::Terminal { .. } => &[],
        }
    }
}

/// Converts a tree to its file representation (normalized utilities).
pub fn to_file(game: &GameTree) -> GameFile {
    let infosets = game.infosets();
    let nodes = game
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, nd)| match &nd.kind {
            NodeKind::Chance { probs } => FileNode::Chance {
                id,
                probs: probs.clone(),
                labels: nd.labels.clone(),
                children: nd.children.clone(),
            },
            NodeKind::Decision { player, infoset } => FileNode::Decision {
                id,
                player: *player,
                infoset: infosets[*infoset].key.clone(),
                actions: nd.labels.clone(),
                children: nd.children.clone(),
            },
            NodeKind::Terminal { index } => FileNode::Terminal {
                id,
                utilities: (0..game.num_players()).map(|i| game.utility(*index, i)).collect(),
            },
        })
        .collect();
    GameFile {
        players: game.num_players(),
        payoffs: PayoffScale::Normalized,
        normalization: Some(game.normalization()),
        nodes,
    }
}

pub fn to_json(game: &GameTree) -> String {
    serde_json::to_string_pretty(&to_file(game)).expect("game serializes")
}

/// Builds a tree from a file description without validating it.
pub fn from_file_unchecked(file: &GameFile) -> Result<GameTree, GameError> {
    let mut by_id: HashMap<usize, usize> = HashMap::new();
    for (pos, n) in file.nodes.iter().enumerate() {
        if by_id.insert(n.id(), pos).is_some() {
            return Err(GameError::Parse(format!("duplicate node id {}", n.id())));
        }
    }
    let mut is_child = vec![false; file.nodes.len()];
    for n in &file.nodes {
        for c in n.children() {
            let &pos = by_id
                .get(c)
                .ok_or_else(|| GameError::Parse(format!("node {} lists unknown child {}", n.id(), c)))?;
            if is_child[pos] {
                return Err(GameError::Parse(format!("node {c} has more than one parent")));
            }
            is_child[pos] = true;
        }
    }
    let roots: Vec<usize> = (0..file.nodes.len()).filter(|&p| !is_child[p]).collect();
    if roots.len() != 1 {
        return Err(GameError::Parse(format!("expected exactly one root, found {}", roots.len())));
    }

    let mut b = TreeBuilder::new(file.players);
    let mut stack = vec![(roots[0], None)];
    let mut visited = 0usize;
    while let Some((pos, parent)) = stack.pop() {
        visited += 1;
        if visited > file.nodes.len() {
            return Err(GameError::Parse("cycle in node graph".into()));
        }
        let raw = match &file.nodes[pos] {
            FileNode::Chance { probs, labels, children, .. } => RawNode::Chance {
                labels: if labels.is_empty() {
                    (0..children.len()).map(|k| k.to_string()).collect()
                } else {
                    labels.clone()
                },
                probs: probs.clone(),
            },
            FileNode::Decision { player, infoset, actions, .. } => RawNode::Decision {
                player: *player,
                infoset: infoset.clone(),
                actions: actions.clone(),
            },
            FileNode::Terminal { utilities, .. } => RawNode::Terminal { utilities: utilities.clone() },
        };
        let id = b.push(parent, raw);
        for c in file.nodes[pos].children().iter().rev() {
            stack.push((by_id[c], Some(id)));
        }
    }
    if visited != file.nodes.len() {
        return Err(GameError::Parse("unreachable nodes present".into()));
    }
    // The stack pops children in order, but pushes happen parent-first, so
    // each child's parent is already present.
    Ok(match (file.payoffs, file.normalization) {
        (PayoffScale::Normalized, norm) => {
            let g = b.finish(Normalization::identity());
            with_normalization(g, norm.unwrap_or_else(Normalization::identity))
        }
        (PayoffScale::Raw, Some(norm)) => b.finish(norm),
        (PayoffScale::Raw, None) => b.finish_normalized(),
    })
}

fn with_normalization(mut g: GameTree, norm: Normalization) -> GameTree {
    g.normalization = norm;
    g
}

/// Parses and validates a JSON game file.
pub fn from_json(text: &str) -> Result<GameTree, GameError> {
    let file: GameFile = serde_json::from_str(text).map_err(|e| GameError::Parse(e.to_string()))?;
    let g = from_file_unchecked(&file)?;
    let v = g.validate();
    if !v.is_empty() {
        return Err(GameError::Invalid(v));
    }
    Ok(g)
}
