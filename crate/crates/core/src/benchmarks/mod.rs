//! Game generators.

mod battleship;
mod kuhn;
mod rideshare;
mod sheriff;
mod simple;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use battleship::{battleship, BattleshipParams};
pub use kuhn::kuhn3;
pub use rideshare::{neighbors as rideshare_neighbors, ridesharing, EDGES as RIDESHARE_EDGES, REWARDS as RIDESHARE_REWARDS};
pub use sheriff::{sheriff, SheriffParams};
pub use simple::{constant_profile, coordination, lower_bound, matching, normal_form, stag_hunt, stag_hunt_target, HARE, STAG};

use crate::game::{is_nash, GameTree, PureProfile};

#[derive(Debug, thiserror::Error)]
pub enum BenchmarkError {
    #[error("unknown game tag '{0}'")]
    UnknownTag(String),
    #[error("bad parameter for {game}: {reason}")]
    BadParameter { game: &'static str, reason: String },
    #[error("{0} has no canonical pure target; compute one with the equilibrium solver")]
    NoCanonicalTarget(String),
}

/// A named game instance with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchmarkSpec {
    StagHunt,
    LowerBound { n: usize },
    Coordination,
    Matching,
    Kuhn3,
    Sheriff(SheriffParams),
    Battleship(BattleshipParams),
    Ridesharing { horizon: usize },
}

impl BenchmarkSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkSpec::StagHunt => "stag_hunt",
            BenchmarkSpec::LowerBound { .. } => "lower_bound",
            BenchmarkSpec::Coordination => "coordination",
            BenchmarkSpec::Matching => "matching",
            BenchmarkSpec::Kuhn3 => "kuhn3",
            BenchmarkSpec::Sheriff(_) => "sheriff",
            BenchmarkSpec::Battleship(_) => "battleship",
            BenchmarkSpec::Ridesharing { .. } => "ridesharing",
        }
    }

    /// What an equilibrium-selecting mediator optimizes in this game.
    pub fn default_objective(&self) -> Objective {
        match self {
            BenchmarkSpec::Kuhn3 => Objective::PlayerUtility(0),
            BenchmarkSpec::Matching => Objective::NegativeWelfare,
            _ => Objective::Welfare,
        }
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchmarkSpec::LowerBound { n } => write!(f, "lower_bound({n})"),
            BenchmarkSpec::Ridesharing { horizon } if *horizon != 2 => write!(f, "ridesharing({horizon})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for BenchmarkSpec {
    type Err = BenchmarkError;

    /// Parses tags such as `stag_hunt`, `lower_bound(3)` or `ridesharing(2)`.
    fn from_str(tag: &str) -> Result<Self, Self::Err> {
        let tag = tag.trim();
        let (name, arg) = match tag.find('(') {
            Some(p) if tag.ends_with(')') => (&tag[..p], Some(&tag[p + 1..tag.len() - 1])),
            _ => (tag, None),
        };
        let num = |game: &'static str, default: Option<usize>| -> Result<usize, BenchmarkError> {
            match arg {
                Some(a) => a.trim().parse().map_err(|_| BenchmarkError::BadParameter { game, reason: format!("'{a}' is not an integer") }),
                None => default.ok_or(BenchmarkError::BadParameter { game, reason: "missing parameter".into() }),
            }
        };
        let spec = match name {
            "stag_hunt" | "stag_hunt_efg" => BenchmarkSpec::StagHunt,
            "lower_bound" => BenchmarkSpec::LowerBound { n: num("lower_bound", None)? },
            "coordination" => BenchmarkSpec::Coordination,
            "matching" => BenchmarkSpec::Matching,
            "kuhn3" | "kuhn" => BenchmarkSpec::Kuhn3,
            "sheriff" => BenchmarkSpec::Sheriff(SheriffParams::default()),
            "battleship" => BenchmarkSpec::Battleship(BattleshipParams::default()),
            "ridesharing" => BenchmarkSpec::Ridesharing { horizon: num("ridesharing", Some(2))? },
            _ => return Err(BenchmarkError::UnknownTag(tag.to_string())),
        };
        if arg.is_some() && !matches!(spec, BenchmarkSpec::LowerBound { .. } | BenchmarkSpec::Ridesharing { .. }) {
            return Err(BenchmarkError::BadParameter { game: spec.name(), reason: "takes no parameter".into() });
        }
        Ok(spec)
    }
}

/// Builds the game for a spec.
pub fn build(spec: &BenchmarkSpec) -> Result<GameTree, BenchmarkError> {
    Ok(match spec {
        BenchmarkSpec::StagHunt => stag_hunt(),
        BenchmarkSpec::LowerBound { n } => {
            if *n < 2 {
                return Err(BenchmarkError::BadParameter { game: "lower_bound", reason: format!("n = {n} < 2") });
            }
            lower_bound(*n)
        }
        BenchmarkSpec::Coordination => coordination(),
        BenchmarkSpec::Matching => matching(),
        BenchmarkSpec::Kuhn3 => kuhn3(),
        BenchmarkSpec::Sheriff(p) => {
            if p.rounds == 0 {
                return Err(BenchmarkError::BadParameter { game: "sheriff", reason: "rounds must be positive".into() });
            }
            sheriff(*p)
        }
        BenchmarkSpec::Battleship(p) => {
            let cells = p.rows * p.cols;
            if cells == 0 || p.shots == 0 || p.shots > cells || cells > 9 {
                return Err(BenchmarkError::BadParameter {
                    game: "battleship",
                    reason: "need 1 <= shots <= rows*cols <= 9".into(),
                });
            }
            battleship(*p)
        }
        BenchmarkSpec::Ridesharing { horizon } => {
            if *horizon == 0 || *horizon > 4 {
                return Err(BenchmarkError::BadParameter { game: "ridesharing", reason: "horizon must be in 1..=4".into() });
            }
            ridesharing(*horizon)
        }
    })
}

/// The documented pure target equilibrium of a spec, checked for the Nash property.
pub fn target_equilibrium(spec: &BenchmarkSpec, game: &GameTree) -> Result<PureProfile, BenchmarkError> {
    let d = match spec {
        BenchmarkSpec::StagHunt | BenchmarkSpec::LowerBound { .. } | BenchmarkSpec::Coordination => constant_profile(game, STAG),
        other => return Err(BenchmarkError::NoCanonicalTarget(other.to_string())),
    };
    debug_assert!(is_nash(game, &d, 1e-9));
    Ok(d)
}

/// A mediator objective over terminals, scaled into [0,1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Average normalized utility across players.
    Welfare,
    /// One minus average normalized utility.
    NegativeWelfare,
    /// One player's normalized utility.
    PlayerUtility(usize),
}

impl Objective {
    /// Per-terminal objective values in [0,1].
    pub fn values(&self, game: &GameTree) -> Vec<f64> {
        let n = game.num_players() as f64;
        match *self {
            Objective::Welfare => game.welfare_vector().iter().map(|w| w / n).collect(),
            Objective::NegativeWelfare => game.welfare_vector().iter().map(|w| 1.0 - w / n).collect(),
            Objective::PlayerUtility(i) => game.utility_vector(i),
        }
    }

    /// Converts an objective value to the natural reporting quantity in
    /// normalized units: total welfare for the welfare objectives, the
    /// player's utility otherwise.
    pub fn to_normalized(&self, value: f64, num_players: usize) -> f64 {
        let n = num_players as f64;
        match self {
            Objective::Welfare => value * n,
            Objective::NegativeWelfare => (1.0 - value) * n,
            Objective::PlayerUtility(_) => value,
        }
    }

    /// Same quantity in raw payoff units.
    pub fn to_raw(&self, value: f64, game: &GameTree) -> f64 {
        let norm = game.normalization();
        let n = game.num_players() as f64;
        match self {
            Objective::Welfare | Objective::NegativeWelfare => {
                self.to_normalized(value, game.num_players()) * norm.scale + n * norm.offset
            }
            Objective::PlayerUtility(_) => norm.raw(value),
        }
    }
}
