//! Hyperparameter schedules and the guarantees that come with them.

use serde::{Deserialize, Serialize};

use super::SteeringError;

/// Which guarantee a schedule is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Normal-form payments against a fixed target.
    NormalForm,
    /// Full-feedback payments against a fixed target.
    FullFeedback,
    /// Trajectory payments against a fixed target.
    Trajectory,
    /// Online optimal-equilibrium steering with full feedback.
    Online,
    /// Online steering in normal form with bandit feedback on both sides.
    NormalFormOnline,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub alpha: f64,
    /// Per-round payment cap `P`.
    pub cap: f64,
    pub epsilon: f64,
    /// Lagrange multiplier, online schedules only.
    pub lambda: Option<f64>,
    pub horizon: usize,
}

impl Hyperparams {
    pub fn fixed(alpha: f64, cap: f64, horizon: usize) -> Self {
        Hyperparams { alpha, cap, epsilon: f64::NAN, lambda: None, horizon }
    }
}

/// Game and learner quantities a schedule depends on.
pub struct ScheduleInput<'a> {
    pub num_players: usize,
    pub num_terminals: usize,
    /// Largest action count at any decision point, used by the normal-form
    /// online schedule.
    pub max_actions: usize,
    /// Regret bound `R(T)` of the players, largest over players.
    pub player_regret: &'a dyn Fn(f64) -> f64,
    /// Regret bound `R_0(T)` of the mediator, online schedules only.
    pub mediator_regret: Option<&'a dyn Fn(f64) -> f64>,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::NormalForm => "normal_form",
            Theorem::FullFeedback => "full_feedback",
            Theorem::Trajectory => "trajectory",
            Theorem::Online => "online",
            Theorem::NormalFormOnline => "normal_form_online",
        }
    }

    fn epsilon(self, input: &ScheduleInput, t: f64) -> Result<f64, SteeringError> {
        let n = input.num_players as f64;
        let r = (input.player_regret)(t);
        Ok(match self {
            Theorem::NormalForm | Theorem::FullFeedback => 4.0 * n * r / t,
            Theorem::Trajectory => r / t,
            Theorem::Online | Theorem::NormalFormOnline => {
                let r0 = input
                    .mediator_regret
                    .ok_or_else(|| SteeringError::BadParameter("online schedule needs a mediator regret bound".into()))?;
                (r0(t) + 4.0 * n * r) / t
            }
        })
    }

    fn params(self, input: &ScheduleInput, eps: f64) -> (f64, f64, Option<f64>) {
        let z = input.num_terminals as f64;
        let n = input.num_players as f64;
        let b = input.max_actions as f64;
        match self {
            Theorem::NormalForm => {
                let a = eps.sqrt();
                (a, 1.0 + a, None)
            }
            Theorem::FullFeedback => (eps.sqrt(), 3.0, None),
            Theorem::Trajectory => (4.0 * z.sqrt() * eps.powf(0.25), 2.0 * z.sqrt() * eps.powf(-0.25), None),
            Theorem::Online => (eps.powf(2.0 / 3.0) * z.powf(-1.0 / 3.0), 3.0, Some(z.powf(2.0 / 3.0) * eps.powf(-1.0 / 3.0))),
            Theorem::NormalFormOnline => (
                (z * b).powf(1.0 / 3.0) * n.powf(-2.0 / 3.0) * eps.powf(2.0 / 3.0),
                2.0,
                Some((z * n * b).powf(1.0 / 3.0) * eps.powf(-1.0 / 3.0)),
            ),
        }
    }

    /// Largest admissible `alpha`.
    pub fn alpha_limit(self, input: &ScheduleInput) -> f64 {
        match self {
            Theorem::NormalForm | Theorem::Trajectory => 1.0,
            Theorem::FullFeedback | Theorem::Online => 1.0 / input.num_terminals as f64,
            Theorem::NormalFormOnline => 1.0 / (2.0 * input.num_players as f64),
        }
    }

    fn admissible(self, input: &ScheduleInput, t: f64) -> bool {
        match self.epsilon(input, t) {
            Ok(eps) => {
                let (alpha, _, _) = self.params(input, eps);
                alpha.is_finite() && alpha <= self.alpha_limit(input)
            }
            Err(_) => false,
        }
    }
}

/// Hyperparameters for `horizon` rounds under `theorem`.
pub fn schedule(theorem: Theorem, input: &ScheduleInput, horizon: usize) -> Result<Hyperparams, SteeringError> {
    if horizon == 0 || input.num_players == 0 || input.num_terminals == 0 {
        return Err(SteeringError::BadParameter("schedule needs a positive horizon, players and terminals".into()));
    }
    let t = horizon as f64;
    let epsilon = theorem.epsilon(input, t)?;
    let (alpha, cap, lambda) = theorem.params(input, epsilon);
    if !(alpha.is_finite() && alpha <= theorem.alpha_limit(input)) {
        return Err(SteeringError::HorizonTooShort { theorem: theorem.name(), horizon, minimal: minimal_horizon(theorem, input) });
    }
    Ok(Hyperparams { alpha, cap, epsilon, lambda, horizon })
}

/// Like [`schedule`], but an `alpha` above the precondition is lowered to
/// the largest admissible value instead of rejected. The guarantee of the
/// theorem no longer applies to the result.
pub fn clamped_schedule(theorem: Theorem, input: &ScheduleInput, horizon: usize) -> Result<Hyperparams, SteeringError> {
    match schedule(theorem, input, horizon) {
        Err(SteeringError::HorizonTooShort { .. }) => {
            let epsilon = theorem.epsilon(input, horizon as f64)?;
            let (_, cap, lambda) = theorem.params(input, epsilon);
            Ok(Hyperparams { alpha: theorem.alpha_limit(input), cap, epsilon, lambda, horizon })
        }
        other => other,
    }
}

/// Smallest horizon satisfying the precondition of `theorem`, assuming the
/// average regret bound decreases with the horizon.
pub fn minimal_horizon(theorem: Theorem, input: &ScheduleInput) -> Option<usize> {
    const LIMIT: u64 = 1 << 50;
    let mut hi: u64 = 1;
    while !theorem.admissible(input, hi as f64) {
        hi *= 2;
        if hi > LIMIT {
            return None;
        }
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Some(hi as usize);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if theorem.admissible(input, mid as f64) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi as usize)
}

/// Guaranteed bounds on time-averaged quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub payment: f64,
    pub gap: f64,
    /// Optimality-gap bound, online schedules only.
    pub optimality: Option<f64>,
}

/// Bounds promised by `theorem` for a schedule with the given `epsilon`.
/// `lambda_star` is only used by the online theorems.
pub fn bounds(theorem: Theorem, epsilon: f64, num_terminals: usize, lambda_star: f64) -> Bounds {
    let z = num_terminals as f64;
    match theorem {
        Theorem::NormalForm => Bounds { payment: 2.0 * epsilon.sqrt(), gap: 2.0 * epsilon.sqrt(), optimality: None },
        Theorem::FullFeedback => {
            let b = 3.0 * z * epsilon.sqrt();
            Bounds { payment: b, gap: b, optimality: None }
        }
        Theorem::Trajectory => Bounds {
            payment: 8.0 * z.sqrt() * epsilon.powf(0.25),
            gap: 2.0 * epsilon.sqrt(),
            optimality: None,
        },
        Theorem::Online | Theorem::NormalFormOnline => {
            let c = if theorem == Theorem::Online { 7.0 } else { 10.0 };
            let b = c * lambda_star * z.powf(4.0 / 3.0) * epsilon.powf(1.0 / 3.0);
            Bounds { payment: b, gap: b, optimality: Some(b) }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input<'a>(n: usize, z: usize, r: &'a dyn Fn(f64) -> f64) -> ScheduleInput<'a> {
        ScheduleInput { num_players: n, num_terminals: z, max_actions: 2, player_regret: r, mediator_regret: None }
    }

    #[test]
    fn normal_form_square_root() {
        // 4 * 2 * R / T = 0.0064 with R = 8, T = 10^4.
        let r = |_t: f64| 8.0;
        let h = schedule(Theorem::NormalForm, &input(2, 4, &r), 10_000).unwrap();
        assert!((h.epsilon - 0.0064).abs() < 1e-15);
        assert!((h.alpha - 0.08).abs() < 1e-12);
        assert!((h.cap - 1.08).abs() < 1e-12);
    }

    #[test]
    fn trajectory_formulas() {
        let r = |t: f64| 1e-4 * t;
        let h = schedule(Theorem::Trajectory, &input(2, 5, &r), 1000).unwrap();
        assert!((h.alpha - 4.0 * 5f64.sqrt() * 0.1).abs() < 1e-9);
        assert!((h.alpha - 0.894).abs() < 1e-3);
        assert!((h.cap - 44.72).abs() < 1e-2);
    }

    #[test]
    fn full_feedback_precondition() {
        // alpha = sqrt(eps) = 0.3 > 1/5.
        let r = |t: f64| 0.09 * t / 8.0;
        let err = schedule(Theorem::FullFeedback, &input(2, 5, &r), 100).unwrap_err();
        assert!(err.to_string().contains("horizon too short"), "{err}");
        match err {
            SteeringError::HorizonTooShort { minimal, .. } => assert_eq!(minimal, None),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn clamping_only_lowers_alpha() {
        let r = |t: f64| 2f64.sqrt() * t.sqrt();
        let inp = input(2, 5, &r);
        let h = clamped_schedule(Theorem::FullFeedback, &inp, 10_000).unwrap();
        assert_eq!(h.alpha, 0.2);
        assert!((h.epsilon - 8.0 * 2f64.sqrt() / 100.0).abs() < 1e-12);
        let long = minimal_horizon(Theorem::FullFeedback, &inp).unwrap();
        assert_eq!(clamped_schedule(Theorem::FullFeedback, &inp, long).unwrap(), schedule(Theorem::FullFeedback, &inp, long).unwrap());
    }

    #[test]
    fn minimal_horizon_is_tight() {
        let r = |t: f64| 2f64.sqrt() * t.sqrt();
        let inp = input(2, 5, &r);
        let err = schedule(Theorem::FullFeedback, &inp, 10_000).unwrap_err();
        let SteeringError::HorizonTooShort { minimal: Some(t), .. } = err else { panic!("{err}") };
        assert!(schedule(Theorem::FullFeedback, &inp, t).is_ok());
        assert!(schedule(Theorem::FullFeedback, &inp, t - 1).is_err());
        let h = schedule(Theorem::FullFeedback, &inp, t).unwrap();
        assert!(h.alpha <= 0.2);
    }

    #[test]
    fn online_needs_mediator_bound() {
        let r = |t: f64| t.sqrt();
        assert!(matches!(schedule(Theorem::Online, &input(2, 5, &r), 10), Err(SteeringError::BadParameter(_))));
        let r0 = |t: f64| t.sqrt();
        let inp = ScheduleInput { mediator_regret: Some(&r0), ..input(2, 5, &r) };
        let h = schedule(Theorem::Online, &inp, 1 << 30).unwrap();
        let eps = 9.0 / (1u64 << 15) as f64;
        assert!((h.epsilon - eps).abs() < 1e-12);
        assert!((h.lambda.unwrap() - 5f64.powf(2.0 / 3.0) * eps.powf(-1.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn bound_values() {
        let b = bounds(Theorem::Trajectory, 1e-4, 5, 0.0);
        assert!((b.payment - 8.0 * 5f64.sqrt() * 0.1).abs() < 1e-12);
        assert!((b.gap - 0.02).abs() < 1e-12);
        let o = bounds(Theorem::Online, 1e-3, 8, 2.0);
        assert!((o.gap - 7.0 * 2.0 * 16.0 * 0.1).abs() < 1e-9);
    }
}
