//! Running one configured experiment and its paired baseline.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::{AlphaConfig, Algorithm, ExperimentConfig, SteerMode, TargetSource};
use super::HarnessError;
use crate::benchmarks::{build, target_equilibrium, BenchmarkSpec, Objective};
use crate::game::{expected_value, GameTree, SeqStrategy};
use crate::learners::{Learner, LearnerKind, RegretBound};
use crate::mediator::{augment, fix_mediator, nf_online_steer, online_steer, solve_optimal_bce, AugmentedGame, BceOptions, BceSolution};
use crate::steering::{
    bounds, clamped_schedule, run, schedule, AlphaMode, Bounds, Hyperparams, RunOptions, ScheduleInput, Scheme,
    SteeringError, SteeringMetrics, Theorem,
};

/// Relative tolerance of the convergence round.
pub const CONVERGENCE_TOLERANCE: f64 = 0.01;

/// A solved mediator strategy and the augmented game it lives in.
#[derive(Debug)]
pub struct Solved {
    pub aug: AugmentedGame,
    pub solution: BceSolution,
    pub solve_secs: f64,
}

/// Everything about an experiment that does not depend on the steering
/// hyperparameters, so sweeps can share it.
pub struct Prepared {
    pub spec: BenchmarkSpec,
    pub game: GameTree,
    pub objective: Objective,
    /// Per-terminal objective values of the base game.
    pub values: Vec<f64>,
    pub solved: Option<Solved>,
}

/// Builds the game and, when the algorithm needs one, solves for the
/// optimal equilibrium.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    let spec = cfg.game.spec()?;
    let game = build(&spec).map_err(|e| HarnessError::config("game", e))?;
    let objective = cfg.objective.unwrap_or_else(|| spec.default_objective());
    if let Objective::PlayerUtility(i) = objective {
        if i >= game.num_players() {
            return Err(HarnessError::config("objective", format!("no player {i}")));
        }
    }
    let values = objective.values(&game);
    let solved = if cfg.algorithm.needs_solver() {
        let t = Instant::now();
        let aug = augment(&game)?;
        let opts = BceOptions { budget: cfg.solver.budget, tolerance: cfg.solver.tolerance, ..Default::default() };
        let solution = solve_optimal_bce(&aug, &values, &opts)?;
        Some(Solved { aug, solution, solve_secs: t.elapsed().as_secs_f64() })
    } else {
        None
    };
    Ok(Prepared { spec, game, objective, values, solved })
}

/// Hyperparameters actually used by a run.
#[derive(Clone, Debug, Serialize)]
pub struct HyperSummary {
    /// `schedule`, `dynamic` or `fixed`.
    pub mode: &'static str,
    pub theorem: Option<Theorem>,
    /// Initial alpha; the per-round values are in the CSV.
    pub alpha: f64,
    pub cap: f64,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    /// Whether alpha was lowered to meet the theorem's precondition.
    pub clamped: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub game: String,
    pub num_players: usize,
    /// Terminals of the game the players actually face.
    pub num_terminals: usize,
    pub hyperparameters: HyperSummary,
    pub final_directness_gap: f64,
    /// Time-averaged expected payment per player.
    pub average_payments: Vec<f64>,
    pub average_realized_payments: Vec<f64>,
    pub max_average_payment: f64,
    /// Time-averaged expected total normalized welfare.
    pub average_welfare: f64,
    pub baseline_average_welfare: f64,
    /// Welfare averaged over the last fifth of the rounds.
    pub final_welfare: f64,
    pub baseline_final_welfare: f64,
    pub average_objective: f64,
    pub baseline_average_objective: f64,
    pub final_objective: f64,
    pub baseline_final_objective: f64,
    /// Objective of the target: the optimal equilibrium value, or the
    /// fixed target's value.
    pub reference_objective: f64,
    /// `reference_objective` minus the average objective, for the
    /// optimal-equilibrium algorithms.
    pub optimality_gap: Option<f64>,
    /// First round (1-based) from which the objective stays within 1% of
    /// `reference_objective`.
    pub convergence_round: Option<usize>,
    pub baseline_convergence_round: Option<usize>,
    /// Regret of each player including payments, divided by `P + 1`.
    pub regrets: Vec<f64>,
    pub bounds: Option<Bounds>,
    pub solver: Option<BceSolution>,
    pub solve_secs: Option<f64>,
    pub seed: u64,
    pub wall_clock_secs: f64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub steered: SteeringMetrics,
    pub baseline: SteeringMetrics,
}

impl RunOutput {
    /// Writes `steered.csv`, `baseline.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        self.steered.write_csv(fs::File::create(dir.join("steered.csv"))?)?;
        self.baseline.write_csv(fs::File::create(dir.join("baseline.csv"))?)?;
        let json = serde_json::to_string_pretty(&self.summary).map_err(|e| HarnessError::Io(e.into()))?;
        fs::write(dir.join("summary.json"), json)?;
        Ok(())
    }
}

/// First 1-based round from which every value stays within `rel_tol` of
/// `reference` (absolute when the reference is 0).
pub fn convergence_round(series: &[f64], reference: f64, rel_tol: f64) -> Option<usize> {
    let tol = if reference == 0.0 { rel_tol } else { rel_tol * reference.abs() };
    let last_bad = series.iter().rposition(|v| (v - reference).abs() > tol);
    match last_bad {
        None if series.is_empty() => None,
        None => Some(1),
        Some(t) if t + 1 == series.len() => None,
        Some(t) => Some(t + 2),
    }
}

fn tail_mean(xs: &[f64], fraction: f64) -> f64 {
    let start = ((1.0 - fraction) * xs.len() as f64).floor() as usize;
    let tail = &xs[start.min(xs.len())..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// Runs the experiment described by `cfg`, writing outputs when
/// `cfg.output` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let prepared = prepare(cfg)?;
    run_prepared(cfg, &prepared)
}

/// Same as [`run_experiment`] with the game and solve already done.
pub fn run_prepared(cfg: &ExperimentConfig, prep: &Prepared) -> Result<RunOutput, HarnessError> {
    let started = Instant::now();
    let out = match cfg.algorithm {
        Algorithm::None | Algorithm::Nf | Algorithm::FullFeedback | Algorithm::Trajectory => fixed_target(cfg, prep)?,
        Algorithm::ComputeThenSteer => computed_target(cfg, prep)?,
        Algorithm::Online => online(cfg, prep)?,
        Algorithm::NfOnline => nf_online(cfg, prep)?,
    };
    let Partial { steered, baseline, hyper, bounds, reference, num_terminals } = out;
    let n = steered.num_players;
    let solved = prep.solved.as_ref();
    let summary = RunSummary {
        config: cfg.clone(),
        game: prep.spec.to_string(),
        num_players: n,
        num_terminals,
        hyperparameters: hyper,
        final_directness_gap: steered.final_gap(),
        average_payments: (0..n).map(|i| steered.average_expected_payment(i)).collect(),
        average_realized_payments: (0..n).map(|i| steered.average_realized_payment(i)).collect(),
        max_average_payment: steered.max_average_payment(),
        average_welfare: steered.average_welfare(),
        baseline_average_welfare: baseline.average_welfare(),
        final_welfare: steered.tail_welfare(0.2),
        baseline_final_welfare: baseline.tail_welfare(0.2),
        average_objective: steered.average_objective(),
        baseline_average_objective: baseline.average_objective(),
        final_objective: tail_mean(&steered.objective, 0.2),
        baseline_final_objective: tail_mean(&baseline.objective, 0.2),
        reference_objective: reference,
        optimality_gap: steered.optimality_gap(),
        convergence_round: convergence_round(&steered.objective, reference, CONVERGENCE_TOLERANCE),
        baseline_convergence_round: convergence_round(&baseline.objective, reference, CONVERGENCE_TOLERANCE),
        regrets: steered.regrets.clone(),
        bounds,
        solver: solved.map(|s| s.solution.clone()),
        solve_secs: solved.map(|s| s.solve_secs),
        seed: cfg.seed,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    let output = RunOutput { summary, steered, baseline };
    if let Some(dir) = &cfg.output {
        output.write(dir)?;
    }
    Ok(output)
}

struct Partial {
    steered: SteeringMetrics,
    baseline: SteeringMetrics,
    hyper: HyperSummary,
    bounds: Option<Bounds>,
    reference: f64,
    num_terminals: usize,
}

fn solved(prep: &Prepared) -> &Solved {
    prep.solved.as_ref().expect("prepared with a solve")
}

fn certified(cfg: &ExperimentConfig, s: &Solved) -> Result<(), HarnessError> {
    if !s.solution.certified && !cfg.solver.force {
        return Err(HarnessError::NotCertified {
            benefit: s.solution.max_benefit(),
            iterations: s.solution.iterations,
        });
    }
    Ok(())
}

fn resolve_target(cfg: &ExperimentConfig, prep: &Prepared) -> Result<Vec<SeqStrategy>, HarnessError> {
    let game = &prep.game;
    match &cfg.target {
        TargetSource::Benchmark => target_equilibrium(&prep.spec, game).map_err(|e| HarnessError::config("target", e)),
        TargetSource::Profile(plans) => {
            if plans.len() != game.num_players() {
                return Err(HarnessError::config("target.profile", format!("{} plans for {} players", plans.len(), game.num_players())));
            }
            plans
                .iter()
                .enumerate()
                .map(|(i, plan)| {
                    let tp = game.treeplex(i);
                    if plan.len() != tp.num_infosets() || plan.iter().zip(&tp.num_actions).any(|(&a, &k)| a >= k) {
                        return Err(HarnessError::config("target.profile", format!("bad plan for player {i}")));
                    }
                    Ok(SeqStrategy::pure(tp, plan))
                })
                .collect()
        }
    }
}

fn regret_fn(kind: &LearnerKind, game: &GameTree, players: std::ops::Range<usize>) -> Vec<RegretBound> {
    players.map(|p| kind.regret_bound(game.treeplex(p))).collect()
}

fn max_regret(bounds: &[RegretBound], t: f64) -> f64 {
    bounds.iter().map(|b| b.at(t)).fold(0.0, f64::max)
}

/// Schedule or fixed/dynamic hyperparameters for a steering scheme.
fn hyperparameters(
    cfg: &ExperimentConfig,
    theorem: Theorem,
    input: &ScheduleInput,
    range: f64,
) -> Result<(Hyperparams, AlphaMode, HyperSummary), HarnessError> {
    let explicit_cap = cfg.p.or(cfg.p_mult.map(|m| m * range));
    let limit = theorem.alpha_limit(input);
    let (hyper, mode, name, clamped) = match cfg.alpha {
        AlphaConfig::Schedule { clamp } => {
            let exact = schedule(theorem, input, cfg.rounds);
            let clamped = matches!(exact, Err(SteeringError::HorizonTooShort { .. }));
            let h = match exact {
                Err(e @ SteeringError::HorizonTooShort { .. }) if !clamp => return Err(HarnessError::config("alpha", e)),
                Err(SteeringError::HorizonTooShort { .. }) => clamped_schedule(theorem, input, cfg.rounds)?,
                other => other?,
            };
            (h, AlphaMode::Fixed { alpha: h.alpha }, "schedule", clamped)
        }
        AlphaConfig::Fixed { value } => {
            if value > limit {
                return Err(HarnessError::config(
                    "alpha.value",
                    format!("{value} exceeds the {} precondition alpha <= {limit}", theorem.name()),
                ));
            }
            let cap = explicit_cap.unwrap_or(match theorem {
                Theorem::NormalForm => 1.0 + value,
                _ => 3.0,
            });
            let mut h = Hyperparams::fixed(value, cap, cfg.rounds);
            h.lambda = cfg.lambda;
            (h, AlphaMode::Fixed { alpha: value }, "fixed", false)
        }
        AlphaConfig::Dynamic { base, cap, window } => {
            let alpha_cap = cap.unwrap_or(range);
            let p = match (theorem, explicit_cap) {
                (Theorem::Trajectory, None) => {
                    return Err(HarnessError::config("P_mult", "dynamic trajectory steering needs P or P_mult"))
                }
                (_, Some(p)) => p,
                (Theorem::NormalForm, None) => 1.0 + alpha_cap,
                (_, None) => 3.0,
            };
            let h = Hyperparams::fixed(base * 2.0, p, cfg.rounds);
            (h, AlphaMode::Dynamic { base, cap: alpha_cap, window }, "dynamic", false)
        }
    };
    let hyper = Hyperparams { cap: if theorem == Theorem::Trajectory { explicit_cap.unwrap_or(hyper.cap) } else { hyper.cap }, ..hyper };
    let summary = HyperSummary {
        mode: name,
        theorem: (name == "schedule").then_some(theorem),
        alpha: match mode {
            AlphaMode::Fixed { alpha } => alpha,
            AlphaMode::Dynamic { base, cap, .. } => (2.0 * base).min(cap),
        },
        cap: hyper.cap,
        epsilon: hyper.epsilon.is_finite().then_some(hyper.epsilon),
        lambda: hyper.lambda,
        clamped,
    };
    Ok((hyper, mode, summary))
}

fn build_learners(
    kind: &LearnerKind,
    game: &GameTree,
    players: std::ops::Range<usize>,
    range: f64,
) -> Result<Vec<Box<dyn Learner>>, HarnessError> {
    players.map(|p| kind.build(game.treeplex(p), range).map_err(HarnessError::from)).collect()
}

/// Steers `game` toward `target` and, when `paired`, runs the same learners
/// without payments.
#[allow(clippy::too_many_arguments)]
fn steer_pair(
    cfg: &ExperimentConfig,
    game: &GameTree,
    target: &[SeqStrategy],
    objective: Vec<f64>,
    scheme: Scheme,
    theorem: Theorem,
    nash_tolerance: f64,
    paired: bool,
) -> Result<(SteeringMetrics, Option<SteeringMetrics>, HyperSummary, Option<Bounds>), HarnessError> {
    let n = game.num_players();
    let regrets = regret_fn(&cfg.learner, game, 0..n);
    let r = |t: f64| max_regret(&regrets, t);
    let input = ScheduleInput {
        num_players: n,
        num_terminals: game.num_terminals(),
        max_actions: game.infosets().iter().map(|s| s.actions.len()).max().unwrap_or(1),
        player_regret: &r,
        mediator_regret: None,
    };
    let (hyper, mode, summary) = if scheme == Scheme::None {
        let h = Hyperparams::fixed(0.0, 0.0, cfg.rounds);
        let s = HyperSummary { mode: "none", theorem: None, alpha: 0.0, cap: 0.0, epsilon: None, lambda: None, clamped: false };
        (h, AlphaMode::Fixed { alpha: 0.0 }, s)
    } else {
        hyperparameters(cfg, theorem, &input, game.reward_range())?
    };
    let opts = RunOptions {
        scheme,
        alpha: mode,
        cap: hyper.cap,
        rounds: cfg.rounds,
        burn_in: cfg.burn_in,
        seed: cfg.seed,
        objective: Some(objective),
        nash_tolerance,
    };
    let range = 1.0 + opts.payment_cap();
    let mut learners = build_learners(&cfg.learner, game, 0..n, range)?;
    let steered = run(game, target, &mut learners, &opts).map_err(steering_error)?;
    let baseline = if !paired {
        None
    } else if scheme == Scheme::None {
        Some(steered.clone())
    } else {
        let mut learners = build_learners(&cfg.learner, game, 0..n, range)?;
        Some(run(game, target, &mut learners, &RunOptions { scheme: Scheme::None, ..opts })?)
    };
    let b = (summary.mode == "schedule").then(|| bounds(theorem, hyper.epsilon, game.num_terminals(), 1.0));
    Ok((steered, baseline, summary, b))
}

fn steering_error(e: SteeringError) -> HarnessError {
    match e {
        SteeringError::NotNormalForm { .. } => HarnessError::config("algorithm", e),
        SteeringError::TargetNotNash => HarnessError::config("target", e),
        SteeringError::HorizonTooShort { .. } => HarnessError::config("alpha", e),
        other => other.into(),
    }
}

fn fixed_target(cfg: &ExperimentConfig, prep: &Prepared) -> Result<Partial, HarnessError> {
    let target = resolve_target(cfg, prep)?;
    let (scheme, theorem) = match cfg.algorithm {
        Algorithm::Nf => (Scheme::NormalForm, Theorem::NormalForm),
        Algorithm::FullFeedback => (Scheme::FullFeedback, Theorem::FullFeedback),
        Algorithm::Trajectory => (Scheme::Trajectory, Theorem::Trajectory),
        _ => (Scheme::None, Theorem::Trajectory),
    };
    let reference = expected_value(&prep.game, &target, &prep.values);
    let (steered, baseline, hyper, bounds) =
        steer_pair(cfg, &prep.game, &target, prep.values.clone(), scheme, theorem, 1e-9, true)?;
    let baseline = baseline.expect("paired");
    Ok(Partial { steered, baseline, hyper, bounds, reference, num_terminals: prep.game.num_terminals() })
}

fn computed_target(cfg: &ExperimentConfig, prep: &Prepared) -> Result<Partial, HarnessError> {
    let s = solved(prep);
    certified(cfg, s)?;
    let fixed = fix_mediator(&s.aug, &s.solution.mu)?;
    let target: Vec<SeqStrategy> = s.aug.direct_profile().iter().map(|d| s.aug.to_fixed(d)).collect();
    let (scheme, theorem) = match cfg.steer {
        SteerMode::Trajectory => (Scheme::Trajectory, Theorem::Trajectory),
        SteerMode::FullFeedback => (Scheme::FullFeedback, Theorem::FullFeedback),
    };
    let tolerance = 1e-9f64.max(s.solution.max_benefit() + 1e-9);
    let (mut steered, _, hyper, bounds) =
        steer_pair(cfg, &fixed, &target, s.aug.lift(&prep.values), scheme, theorem, tolerance, false)?;
    steered.optimal_value = Some(s.solution.value);
    let range = 1.0 + steered.cap.iter().cloned().fold(0.0, f64::max);
    let baseline = unmediated_baseline(cfg, prep, range)?;
    Ok(Partial { steered, baseline, hyper, bounds, reference: s.solution.value, num_terminals: fixed.num_terminals() })
}

/// Baseline of the optimal-equilibrium algorithms: the same learners
/// playing the base game with neither mediator nor payments. There is no
/// base-game target, so the gap columns are left empty.
fn unmediated_baseline(cfg: &ExperimentConfig, prep: &Prepared, range: f64) -> Result<SteeringMetrics, HarnessError> {
    let game = &prep.game;
    let n = game.num_players();
    let placeholder: Vec<SeqStrategy> = (0..n)
        .map(|i| {
            let tp = game.treeplex(i);
            SeqStrategy::pure(tp, &vec![0; tp.num_infosets()])
        })
        .collect();
    let opts = RunOptions {
        scheme: Scheme::None,
        alpha: AlphaMode::Fixed { alpha: 0.0 },
        cap: 0.0,
        rounds: cfg.rounds,
        burn_in: cfg.burn_in,
        seed: cfg.seed,
        objective: Some(prep.values.clone()),
        nash_tolerance: 1e-9,
    };
    let mut learners = build_learners(&cfg.learner, game, 0..n, range)?;
    let mut m = run(game, &placeholder, &mut learners, &opts)?;
    m.round_gap.clear();
    m.running_gap.clear();
    m.deviation_mass.clear();
    m.optimal_value = prep.solved.as_ref().map(|s| s.solution.value);
    Ok(m)
}

fn online(cfg: &ExperimentConfig, prep: &Prepared) -> Result<Partial, HarnessError> {
    let s = solved(prep);
    let aug = &s.aug;
    let n = aug.num_base_players();
    let regrets = regret_fn(&cfg.learner, &aug.game, 1..n + 1);
    let r = |t: f64| max_regret(&regrets, t);
    let mediator_bound = RegretBound::cfr(aug.game.treeplex(0));
    let r0 = |t: f64| mediator_bound.at(t);
    let input = ScheduleInput {
        num_players: n,
        num_terminals: aug.game.num_terminals(),
        max_actions: aug.base.infosets().iter().map(|s| s.actions.len()).max().unwrap_or(1),
        player_regret: &r,
        mediator_regret: Some(&r0),
    };
    let (hyper, mode, summary) = hyperparameters(cfg, Theorem::Online, &input, aug.game.reward_range())?;
    let AlphaMode::Fixed { alpha } = mode else { unreachable!("validated") };
    let lambda = hyper.lambda.unwrap_or(1.0).max(1.0);
    let range = 4.0;
    let mut learners = build_learners(&cfg.learner, &aug.game, 1..n + 1, range)?;
    let mut steered = online_steer(aug, &prep.values, lambda, alpha, cfg.rounds, &mut learners)?;
    steered.optimal_value = Some(s.solution.value);
    let baseline = unmediated_baseline(cfg, prep, range)?;
    let b = (summary.mode == "schedule")
        .then(|| bounds(Theorem::Online, hyper.epsilon, aug.game.num_terminals(), s.solution.lambda));
    Ok(Partial {
        steered,
        baseline,
        hyper: HyperSummary { lambda: Some(lambda), ..summary },
        bounds: b,
        reference: s.solution.value,
        num_terminals: aug.game.num_terminals(),
    })
}

fn nf_online(cfg: &ExperimentConfig, prep: &Prepared) -> Result<Partial, HarnessError> {
    let s = solved(prep);
    let base = &prep.game;
    let n = base.num_players();
    let gamma = match cfg.learner {
        LearnerKind::Exp3 { epsilon } => epsilon,
        _ => return Err(HarnessError::config("learner.kind", "nf_online runs exp3 learners")),
    };
    let actions: Vec<usize> = (0..n).map(|i| base.treeplex(i).num_actions.first().copied().unwrap_or(1)).collect();
    let players: Vec<RegretBound> =
        actions.iter().map(|&k| RegretBound::Exp3 { arms: k.pow(k as u32), gamma }).collect();
    let r = |t: f64| max_regret(&players, t);
    let mediator = RegretBound::Exp3 { arms: actions.iter().product(), gamma };
    let r0 = |t: f64| mediator.at(t);
    let input = ScheduleInput {
        num_players: n,
        num_terminals: s.aug.game.num_terminals(),
        max_actions: actions.iter().copied().max().unwrap_or(1),
        player_regret: &r,
        mediator_regret: Some(&r0),
    };
    let (hyper, mode, summary) = hyperparameters(cfg, Theorem::NormalFormOnline, &input, base.reward_range())?;
    let AlphaMode::Fixed { alpha } = mode else { unreachable!("validated") };
    let lambda = hyper.lambda.unwrap_or(1.0);
    let mut steered = nf_online_steer(base, &prep.values, alpha, lambda, cfg.rounds, gamma, cfg.seed)?;
    steered.optimal_value = Some(s.solution.value);
    let baseline = unmediated_baseline(cfg, prep, 3.0)?;
    let b = (summary.mode == "schedule")
        .then(|| bounds(Theorem::NormalFormOnline, hyper.epsilon, s.aug.game.num_terminals(), s.solution.lambda));
    Ok(Partial {
        steered,
        baseline,
        hyper: HyperSummary { lambda: Some(lambda), ..summary },
        bounds: b,
        reference: s.solution.value,
        num_terminals: s.aug.game.num_terminals(),
    })
}
