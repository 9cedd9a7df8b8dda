use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use steer_core::benchmarks::{build, BenchmarkSpec, Objective};
use steer_core::game::format::to_json;
use steer_core::harness::{parse_config, parse_vary, run_experiment, run_sweep, ExperimentConfig, HarnessError, RunOutput};
use steer_core::mediator::{augment, solve_optimal_bce, BceOptions, MediatorError};

#[derive(Parser)]
#[command(name = "steer", version, about = "Steer no-regret learners toward equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and its unsteered baseline.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config and the environment.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run one experiment per value of a config key, in parallel.
    Sweep {
        config: PathBuf,
        /// `key=v1,v2,...`, e.g. `P_mult=1,2,4,8`.
        #[arg(long)]
        vary: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute an optimal equilibrium and print its certificate as JSON.
    Solve {
        /// Game tag such as `kuhn3` or `lower_bound(3)`.
        game: String,
        /// `welfare`, `negative_welfare` or `player:<i>`.
        #[arg(long)]
        objective: Option<String>,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Print a benchmark game in the JSON game format.
    DumpGame {
        game: String,
        /// Dump the mediator-augmented game instead.
        #[arg(long)]
        augmented: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output } => run(&config, output),
        Command::Sweep { config, vary, output } => sweep(&config, &vary, output),
        Command::Solve { game, objective, budget, tolerance } => solve(&game, objective.as_deref(), budget, tolerance),
        Command::DumpGame { game, augmented } => dump_game(&game, augmented),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::NotCertified { .. } | HarnessError::Mediator(MediatorError::NotCertified { .. }) => 3,
        e if e.is_config() => 2,
        _ => 1,
    }
}

fn load(path: &Path, output: Option<PathBuf>) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::config("config", format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    cfg.apply_env()?;
    if output.is_some() {
        cfg.output = output;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(path: &Path, output: Option<PathBuf>) -> Result<(), HarnessError> {
    let cfg = load(path, output)?;
    let out = run_experiment(&cfg)?;
    if let Some(dir) = &cfg.output {
        eprintln!("wrote {}", dir.display());
    }
    report("", &out);
    Ok(())
}

fn sweep(path: &Path, vary: &str, output: Option<PathBuf>) -> Result<(), HarnessError> {
    let cfg = load(path, output)?;
    let (key, values) = parse_vary(vary)?;
    let runs = run_sweep(&cfg, &key, &values)?;
    let mut rows = Vec::new();
    let mut first_err = None;
    for r in runs {
        match r.output {
            Ok(out) => {
                report(&format!("{key}={} ", r.value), &out);
                rows.push((r.value, out));
            }
            Err(e) => {
                eprintln!("{key}={}: error: {e}", r.value);
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(dir) = &cfg.output {
        write_sweep_table(&dir.join("sweep.csv"), &key, &rows)?;
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn report(prefix: &str, out: &RunOutput) {
    let s = &out.summary;
    println!(
        "{prefix}welfare {:.4} (baseline {:.4}) objective {:.4} / {:.4} gap {:.4} max payment {:.4} converged {}",
        s.average_welfare,
        s.baseline_average_welfare,
        s.average_objective,
        s.reference_objective,
        s.final_directness_gap,
        s.max_average_payment,
        s.convergence_round.map_or("never".to_string(), |t| t.to_string()),
    );
}

fn write_sweep_table(path: &Path, key: &str, rows: &[(String, RunOutput)]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        key,
        "average_welfare",
        "baseline_average_welfare",
        "average_objective",
        "reference_objective",
        "final_directness_gap",
        "max_average_payment",
        "convergence_round",
        "baseline_convergence_round",
    ])?;
    let opt = |v: Option<usize>| v.map_or(String::new(), |t| t.to_string());
    for (value, out) in rows {
        let s = &out.summary;
        w.write_record([
            value.clone(),
            s.average_welfare.to_string(),
            s.baseline_average_welfare.to_string(),
            s.average_objective.to_string(),
            s.reference_objective.to_string(),
            s.final_directness_gap.to_string(),
            s.max_average_payment.to_string(),
            opt(s.convergence_round),
            opt(s.baseline_convergence_round),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_objective(text: &str) -> Result<Objective, HarnessError> {
    match text.trim() {
        "welfare" => Ok(Objective::Welfare),
        "negative_welfare" => Ok(Objective::NegativeWelfare),
        other => other
            .strip_prefix("player:")
            .and_then(|i| i.parse().ok())
            .map(Objective::PlayerUtility)
            .ok_or_else(|| HarnessError::config("--objective", format!("'{other}' is not welfare, negative_welfare or player:<i>"))),
    }
}

fn spec(tag: &str) -> Result<BenchmarkSpec, HarnessError> {
    tag.parse().map_err(|e| HarnessError::config("game", e))
}

fn solve(tag: &str, objective: Option<&str>, budget: usize, tolerance: f64) -> Result<(), HarnessError> {
    let spec = spec(tag)?;
    let game = build(&spec).map_err(|e| HarnessError::config("game", e))?;
    let objective = match objective {
        Some(o) => parse_objective(o)?,
        None => spec.default_objective(),
    };
    if let Objective::PlayerUtility(i) = objective {
        if i >= game.num_players() {
            return Err(HarnessError::config("--objective", format!("no player {i}")));
        }
    }
    if budget == 0 || !(tolerance > 0.0) {
        return Err(HarnessError::config("solve", "budget and tolerance must be positive"));
    }
    let aug = augment(&game)?;
    let opts = BceOptions { budget, tolerance, ..Default::default() };
    let started = std::time::Instant::now();
    let sol = solve_optimal_bce(&aug, &objective.values(&game), &opts)?;
    let cert = json!({
        "game": spec.to_string(),
        "objective": objective,
        "augmented_terminals": aug.game.num_terminals(),
        "value": sol.value,
        "value_normalized": objective.to_normalized(sol.value, game.num_players()),
        "value_raw": objective.to_raw(sol.value, &game),
        "max_benefit": sol.max_benefit(),
        "tolerance": tolerance,
        "solution": sol,
        "solve_secs": started.elapsed().as_secs_f64(),
    });
    println!("{}", serde_json::to_string_pretty(&cert).expect("certificate serializes"));
    if sol.certified {
        Ok(())
    } else {
        Err(HarnessError::NotCertified { benefit: sol.max_benefit(), iterations: sol.iterations })
    }
}

fn dump_game(tag: &str, augmented: bool) -> Result<(), HarnessError> {
    let game = build(&spec(tag)?).map_err(|e| HarnessError::config("game", e))?;
    if augmented {
        println!("{}", to_json(&augment(&game)?.game));
    } else {
        println!("{}", to_json(&game));
    }
    Ok(())
}
