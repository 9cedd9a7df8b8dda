//! Extensive-form games with perfect recall, sequence-form strategies,
//! expected utilities, best responses and sampled playouts.

pub mod best_response;
pub mod eval;
pub mod format;
pub mod sample;
pub mod strategy;
pub mod tree;

pub use best_response::{best_response, is_nash, max_deviation_benefit, treeplex_best_response};
pub use eval::{expected_utility, expected_value, reach_products, sequence_utility, terminal_distribution};
pub use sample::sample_playout;
pub use strategy::{enumerate_plans, SeqStrategy};
pub use tree::{GameTree, Infoset, Node, NodeId, NodeKind, Normalization, RawNode, TreeBuilder, Treeplex, Violation};

/// A profile in which every strategy is pure.
pub type PureProfile = Vec<SeqStrategy>;

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("unknown player {0}")]
    UnknownPlayer(usize),
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("invalid game: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("game file: {0}")]
    Parse(String),
}
