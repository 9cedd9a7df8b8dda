//! Per-round measurements of a steering run.

use std::io::Write;

use serde::Serialize;

use super::SteeringError;

/// `|| (1/T) sum_t x_hat_t - d_hat ||_1` over terminal reach-product vectors.
pub fn directness_gap(history: &[Vec<f64>], target: &[f64]) -> Result<f64, SteeringError> {
    if history.is_empty() {
        return Err(SteeringError::BadParameter("directness gap of an empty history".into()));
    }
    let mut avg = vec![0.0; target.len()];
    for x in history {
        if x.len() != target.len() {
            return Err(SteeringError::Dimension { expected: target.len(), got: x.len() });
        }
        for (a, v) in avg.iter_mut().zip(x) {
            *a += v;
        }
    }
    let t = history.len() as f64;
    Ok(avg.iter().zip(target).map(|(a, d)| (a / t - d).abs()).sum())
}

/// `min(cap, base * recent_gap)`.
pub fn dynamic_alpha(recent_gap: f64, base: f64, cap: f64) -> f64 {
    (base * recent_gap).min(cap)
}

/// Time series recorded by the steering loops. Per-player series are laid
/// out as `[round * num_players + player]`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SteeringMetrics {
    pub num_players: usize,
    pub realized_payments: Vec<f64>,
    pub expected_payments: Vec<f64>,
    /// Expected total normalized welfare of the round's profile.
    pub welfare: Vec<f64>,
    /// Expected mediator objective, when one was supplied.
    pub objective: Vec<f64>,
    /// `|| x_hat_t - d_hat ||_1` of the round alone.
    pub round_gap: Vec<f64>,
    /// Directness gap of the average up to and including the round.
    pub running_gap: Vec<f64>,
    pub alpha: Vec<f64>,
    pub cap: Vec<f64>,
    /// Probability of reaching a terminal where the player was not direct.
    pub deviation_mass: Vec<f64>,
    /// Final regret of each player including payments, divided by `P + 1`.
    pub regrets: Vec<f64>,
    /// Best achievable objective, when known.
    pub optimal_value: Option<f64>,
    gap_sum: f64,
}

impl SteeringMetrics {
    pub fn new(num_players: usize) -> Self {
        SteeringMetrics { num_players, ..Default::default() }
    }

    pub fn rounds(&self) -> usize {
        self.welfare.len()
    }

    /// Appends a round. The directness gap of an average is the average of
    /// the per-round gaps because the target vector is 0/1 and reach
    /// products lie in [0,1].
    #[allow(clippy::too_many_arguments)]
    pub fn push_round(
        &mut self,
        realized: &[f64],
        expected: &[f64],
        welfare: f64,
        objective: Option<f64>,
        round_gap: f64,
        alpha: f64,
        cap: f64,
        deviation_mass: &[f64],
    ) {
        self.realized_payments.extend_from_slice(realized);
        self.expected_payments.extend_from_slice(expected);
        self.welfare.push(welfare);
        if let Some(o) = objective {
            self.objective.push(o);
        }
        self.round_gap.push(round_gap);
        self.gap_sum += round_gap;
        self.running_gap.push(self.gap_sum / self.round_gap.len() as f64);
        self.alpha.push(alpha);
        self.cap.push(cap);
        self.deviation_mass.extend_from_slice(deviation_mass);
    }

    pub fn final_gap(&self) -> f64 {
        self.running_gap.last().copied().unwrap_or(f64::NAN)
    }

    fn player_average(&self, series: &[f64], player: usize, from: usize) -> f64 {
        let n = self.num_players;
        let rows = self.rounds().saturating_sub(from);
        if rows == 0 {
            return f64::NAN;
        }
        (from..self.rounds()).map(|t| series[t * n + player]).sum::<f64>() / rows as f64
    }

    pub fn average_realized_payment(&self, player: usize) -> f64 {
        self.player_average(&self.realized_payments, player, 0)
    }

    pub fn average_expected_payment(&self, player: usize) -> f64 {
        self.player_average(&self.expected_payments, player, 0)
    }

    /// Largest time-averaged expected payment over players.
    pub fn max_average_payment(&self) -> f64 {
        (0..self.num_players).map(|i| self.average_expected_payment(i)).fold(0.0, f64::max)
    }

    pub fn average_welfare(&self) -> f64 {
        mean(&self.welfare)
    }

    pub fn average_objective(&self) -> f64 {
        mean(&self.objective)
    }

    /// `optimal_value` minus the average objective.
    pub fn optimality_gap(&self) -> Option<f64> {
        self.optimal_value.map(|v| v - self.average_objective())
    }

    /// Welfare averaged over the last `fraction` of the rounds.
    pub fn tail_welfare(&self, fraction: f64) -> f64 {
        let start = ((1.0 - fraction) * self.rounds() as f64).floor() as usize;
        mean(&self.welfare[start.min(self.welfare.len())..])
    }

    /// Directness gap over the rounds in `[start, end)`.
    pub fn window_gap(&self, start: usize, end: usize) -> f64 {
        mean(&self.round_gap[start..end])
    }

    /// Column names of [`write_csv`](Self::write_csv).
    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["round", "welfare", "objective", "directness_gap", "alpha", "P"].map(String::from).into();
        for i in 0..self.num_players {
            h.push(format!("payment_{i}"));
        }
        for i in 0..self.num_players {
            h.push(format!("expected_payment_{i}"));
        }
        h
    }

    /// One row per round; `round` is 1-based, `directness_gap` is the
    /// running gap, `objective` is empty when none was recorded.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let n = self.num_players;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for t in 0..self.rounds() {
            let mut row = vec![
                (t + 1).to_string(),
                self.welfare[t].to_string(),
                self.objective.get(t).map(f64::to_string).unwrap_or_default(),
                self.running_gap.get(t).map(f64::to_string).unwrap_or_default(),
                self.alpha[t].to_string(),
                self.cap[t].to_string(),
            ];
            row.extend(self.realized_payments[t * n..(t + 1) * n].iter().map(f64::to_string));
            row.extend(self.expected_payments[t * n..(t + 1) * n].iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}
