//! Experiment configuration files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::benchmarks::{BenchmarkSpec, Objective};
use crate::learners::LearnerKind;

/// A benchmark named by tag (`"lower_bound(3)"`) or as a table with
/// parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameRef {
    Tag(String),
    Spec(BenchmarkSpec),
}

impl GameRef {
    pub fn spec(&self) -> Result<BenchmarkSpec, HarnessError> {
        match self {
            GameRef::Tag(t) => t.parse().map_err(|e| HarnessError::config("game", e)),
            GameRef::Spec(s) => Ok(s.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    None,
    Nf,
    FullFeedback,
    Trajectory,
    ComputeThenSteer,
    Online,
    NfOnline,
}

impl Algorithm {
    /// Whether the target is an optimal equilibrium computed by the solver.
    pub fn needs_solver(self) -> bool {
        matches!(self, Algorithm::ComputeThenSteer | Algorithm::Online | Algorithm::NfOnline)
    }
}

/// Where the target equilibrium of the fixed-target algorithms comes from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSource {
    /// The benchmark's documented pure equilibrium.
    #[default]
    Benchmark,
    /// One action per local infoset for each player.
    Profile(Vec<Vec<usize>>),
}

/// Payment scheme used inside the fixed game by `compute_then_steer`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteerMode {
    #[default]
    Trajectory,
    FullFeedback,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaConfig {
    /// Hyperparameters from the algorithm's guarantee. With `clamp`, a
    /// horizon too short for the precondition lowers `alpha` to its limit
    /// instead of failing.
    Schedule {
        #[serde(default)]
        clamp: bool,
    },
    /// `min(cap, base * recent gap)`; `cap` defaults to the reward range.
    Dynamic {
        #[serde(default = "default_base")]
        base: f64,
        #[serde(default)]
        cap: Option<f64>,
        #[serde(default = "default_window")]
        window: usize,
    },
    Fixed {
        value: f64,
    },
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig::Schedule { clamp: false }
    }
}

fn default_base() -> f64 {
    0.1
}

fn default_window() -> usize {
    50
}

fn default_burn_in() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Steer toward an uncertified solution anyway.
    #[serde(default)]
    pub force: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { budget: default_budget(), tolerance: default_tolerance(), force: false }
    }
}

fn default_budget() -> usize {
    200_000
}

fn default_tolerance() -> f64 {
    1e-4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameRef,
    pub algorithm: Algorithm,
    /// Number of rounds.
    #[serde(rename = "T")]
    pub rounds: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub seed: u64,
    /// Directory receiving the CSV files and the summary.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Mediator objective; the benchmark's default when absent.
    #[serde(default)]
    pub objective: Option<Objective>,
    #[serde(default)]
    pub target: TargetSource,
    #[serde(default)]
    pub learner: LearnerKind,
    /// Trajectory cap as a multiple of the reward range.
    #[serde(default, rename = "P_mult")]
    pub p_mult: Option<f64>,
    /// Explicit trajectory cap.
    #[serde(default, rename = "P")]
    pub p: Option<f64>,
    #[serde(default)]
    pub alpha: AlphaConfig,
    /// Lagrange multiplier of the online algorithms when `alpha` is fixed.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub steer: SteerMode,
    #[serde(default)]
    pub solver: SolverConfig,
}

pub const SEED_VAR: &str = "STEER_SEED";
pub const OUTPUT_VAR: &str = "STEER_OUTPUT_DIR";

/// Parses and validates a TOML configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Parse(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Checks everything that does not need the game to be built.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.game.spec()?;
        if self.rounds == 0 {
            return Err(HarnessError::config("T", "must be positive"));
        }
        if self.burn_in >= self.rounds {
            return Err(HarnessError::config("burn_in", format!("{} must be below T = {}", self.burn_in, self.rounds)));
        }
        if self.p.is_some() && self.p_mult.is_some() {
            return Err(HarnessError::config("P", "give either P or P_mult, not both"));
        }
        if let Some(p) = self.p.or(self.p_mult) {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(HarnessError::config(if self.p.is_some() { "P" } else { "P_mult" }, format!("{p} is below 1")));
            }
        }
        match self.alpha {
            AlphaConfig::Fixed { value } if !(0.0..=1.0).contains(&value) => {
                return Err(HarnessError::config("alpha.value", format!("{value} not in [0, 1]")))
            }
            AlphaConfig::Dynamic { base, cap, window } => {
                if !(base >= 0.0 && base.is_finite()) {
                    return Err(HarnessError::config("alpha.base", format!("{base} is negative")));
                }
                if cap.is_some_and(|c| !(c >= 0.0 && c.is_finite())) {
                    return Err(HarnessError::config("alpha.cap", "must be nonnegative"));
                }
                if window == 0 {
                    return Err(HarnessError::config("alpha.window", "must be positive"));
                }
                if matches!(self.algorithm, Algorithm::Online | Algorithm::NfOnline) {
                    return Err(HarnessError::config("alpha.mode", "online algorithms take a schedule or a fixed alpha"));
                }
            }
            _ => {}
        }
        if matches!(self.alpha, AlphaConfig::Fixed { .. })
            && matches!(self.algorithm, Algorithm::Online | Algorithm::NfOnline)
            && self.lambda.is_none()
        {
            return Err(HarnessError::config("lambda", "required with a fixed alpha for online algorithms"));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(HarnessError::config("lambda", format!("{l} must be positive")));
            }
        }
        if self.algorithm == Algorithm::NfOnline && !matches!(self.learner, LearnerKind::Exp3 { .. }) {
            return Err(HarnessError::config("learner.kind", "nf_online runs exp3 learners"));
        }
        if self.solver.budget == 0 {
            return Err(HarnessError::config("solver.budget", "must be positive"));
        }
        Ok(())
    }

    /// Applies the seed and output-directory environment overrides.
    pub fn apply_env(&mut self) -> Result<(), HarnessError> {
        if let Ok(v) = std::env::var(SEED_VAR) {
            self.seed = v.trim().parse().map_err(|_| HarnessError::config(SEED_VAR, format!("'{v}' is not an integer")))?;
        }
        if let Ok(v) = std::env::var(OUTPUT_VAR) {
            self.output = Some(PathBuf::from(v));
        }
        Ok(())
    }

    /// A copy with `key` (a dotted path such as `alpha.base`) set to `value`,
    /// written in TOML syntax.
    pub fn with_override(&self, key: &str, value: &str) -> Result<ExperimentConfig, HarnessError> {
        let mut root = toml::Table::try_from(self).map_err(|e| HarnessError::Parse(e.to_string()))?;
        let parsed: toml::Value = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| HarnessError::config(key, "empty key"))?;
        let mut table = &mut root;
        for p in parts {
            let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry.as_table_mut().ok_or_else(|| HarnessError::config(key, format!("'{p}' is not a table")))?;
        }
        if last == "mode" {
            // Fields of the previous mode do not carry over.
            table.clear();
        }
        table.insert(last.to_string(), parsed);
        if key == "P_mult" {
            root.remove("P");
        } else if key == "P" {
            root.remove("P_mult");
        }
        let cfg: ExperimentConfig = root.try_into().map_err(|e: toml::de::Error| HarnessError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
