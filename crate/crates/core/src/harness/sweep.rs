//! Parallel sweeps over one configuration key.

use rayon::prelude::*;

use super::experiment::{prepare, run_prepared, Prepared, RunOutput};
use super::{ExperimentConfig, HarnessError};

/// Keys whose value changes the game or the solve, so each run needs its
/// own preparation.
const PREPARATION_KEYS: [&str; 4] = ["game", "objective", "algorithm", "solver"];

pub struct SweepRun {
    pub value: String,
    pub output: Result<RunOutput, HarnessError>,
}

/// Splits `key=v1,v2,...`.
pub fn parse_vary(spec: &str) -> Result<(String, Vec<String>), HarnessError> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| HarnessError::config("--vary", format!("'{spec}' is not key=v1,v2,...")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if key.trim().is_empty() || values.is_empty() {
        return Err(HarnessError::config("--vary", format!("'{spec}' is not key=v1,v2,...")));
    }
    Ok((key.trim().to_string(), values))
}

/// Runs `cfg` once per value of `key`, in parallel. Outputs go to
/// `<output>/<key>=<value>` when `cfg.output` is set.
pub fn run_sweep(cfg: &ExperimentConfig, key: &str, values: &[String]) -> Result<Vec<SweepRun>, HarnessError> {
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut c = cfg.with_override(key, v)?;
        if let Some(dir) = &cfg.output {
            c.output = Some(dir.join(format!("{key}={v}")));
        }
        configs.push(c);
    }
    let root = key.split('.').next().unwrap_or(key);
    let shared: Option<Prepared> = if PREPARATION_KEYS.contains(&root) { None } else { Some(prepare(cfg)?) };
    Ok(configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(c, v)| {
            let output = match &shared {
                Some(p) => run_prepared(c, p),
                None => prepare(c).and_then(|p| run_prepared(c, &p)),
            };
            SweepRun { value: v.clone(), output }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_config;

    #[test]
    fn vary_syntax() {
        assert_eq!(parse_vary("P_mult=1,2, 4").unwrap(), ("P_mult".to_string(), vec!["1".into(), "2".into(), "4".into()]));
        assert!(parse_vary("P_mult").is_err());
        assert!(parse_vary("=1").is_err());
        assert!(parse_vary("P_mult=").is_err());
    }

    #[test]
    fn sweep_matches_single_runs() {
        let cfg = parse_config("game = \"stag_hunt\"\nalgorithm = \"trajectory\"\nT = 200\nP_mult = 1\n[alpha]\nmode = \"dynamic\"\n")
            .unwrap();
        let values: Vec<String> = ["1", "2", "4", "8"].map(String::from).into();
        let runs = run_sweep(&cfg, "P_mult", &values).unwrap();
        assert_eq!(runs.len(), 4);
        for r in &runs {
            let single = crate::harness::run_experiment(&cfg.with_override("P_mult", &r.value).unwrap()).unwrap();
            let out = r.output.as_ref().unwrap();
            assert_eq!(out.steered.objective, single.steered.objective);
            assert_eq!(out.summary.hyperparameters.cap, r.value.parse::<f64>().unwrap());
        }
        assert!(run_sweep(&cfg, "P_mult", &["0".to_string()]).is_err());
    }
}
