//! The steering loop shared by every fixed-target scheme.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::payments::{direct_indicator, ff_payment_vector, nf_payment_vector, target_indicator};
use super::{Hyperparams, SteeringError, SteeringMetrics};
use crate::game::{
    is_nash, reach_products, sample_playout, sequence_utility, terminal_distribution, GameTree, SeqStrategy,
};
use crate::learners::{Feedback, Learner, RegretRecord};
use crate::rng::stream;

/// Which payment function the mediator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// No payments; used for baselines.
    None,
    NormalForm,
    FullFeedback,
    Trajectory,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::NormalForm => "normal_form",
            Scheme::FullFeedback => "full_feedback",
            Scheme::Trajectory => "trajectory",
        }
    }
}

/// How the directness bonus is chosen each round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaMode {
    Fixed { alpha: f64 },
    /// `min(cap, base * gap)` where `gap` is the directness gap over the
    /// last `window` rounds.
    Dynamic { base: f64, cap: f64, window: usize },
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub scheme: Scheme,
    pub alpha: AlphaMode,
    /// Payment cap `P` of the trajectory scheme; the other schemes have a
    /// fixed cap.
    pub cap: f64,
    pub rounds: usize,
    /// Rounds at the start with no payments at all.
    pub burn_in: usize,
    pub seed: u64,
    /// Per-terminal mediator objective recorded each round.
    pub objective: Option<Vec<f64>>,
    /// Largest deviation benefit tolerated when checking that the target
    /// is an equilibrium.
    pub nash_tolerance: f64,
}

impl RunOptions {
    pub fn new(scheme: Scheme, hyper: &Hyperparams) -> Self {
        RunOptions {
            scheme,
            alpha: AlphaMode::Fixed { alpha: hyper.alpha },
            cap: hyper.cap,
            rounds: hyper.horizon,
            burn_in: 0,
            seed: 0,
            objective: None,
            nash_tolerance: 1e-9,
        }
    }

    fn max_alpha(&self) -> f64 {
        match self.alpha {
            AlphaMode::Fixed { alpha } => alpha,
            AlphaMode::Dynamic { cap, .. } => cap,
        }
    }

    /// Largest payment any player can receive in one round.
    pub fn payment_cap(&self) -> f64 {
        match self.scheme {
            Scheme::None => 0.0,
            Scheme::NormalForm => 1.0 + self.max_alpha(),
            Scheme::FullFeedback => 3.0,
            Scheme::Trajectory => self.cap,
        }
    }

    fn validate(&self, game: &GameTree) -> Result<(), SteeringError> {
        let bad = |m: String| Err(SteeringError::BadParameter(m));
        match self.alpha {
            AlphaMode::Fixed { alpha } if !(alpha >= 0.0 && alpha.is_finite()) => return bad(format!("alpha {alpha}")),
            AlphaMode::Dynamic { base, cap, window } if !(base >= 0.0 && cap >= 0.0 && window > 0) => {
                return bad(format!("dynamic alpha base {base}, cap {cap}, window {window}"))
            }
            _ => {}
        }
        if self.scheme == Scheme::Trajectory && !(self.cap >= 1.0 && self.cap.is_finite()) {
            return bad(format!("trajectory payments need P >= 1, got {}", self.cap));
        }
        if let Some(o) = &self.objective {
            if o.len() != game.num_terminals() {
                return Err(SteeringError::Dimension { expected: game.num_terminals(), got: o.len() });
            }
        }
        Ok(())
    }
}

/// Runs `learners` (one per player, in player order) for `opts.rounds`
/// rounds while paying them toward the pure `target`.
pub fn run(
    game: &GameTree,
    target: &[SeqStrategy],
    learners: &mut [Box<dyn Learner>],
    opts: &RunOptions,
) -> Result<SteeringMetrics, SteeringError> {
    let n = game.num_players();
    if learners.len() != n || target.len() != n {
        return Err(SteeringError::Dimension { expected: n, got: learners.len().min(target.len()) });
    }
    for (i, l) in learners.iter().enumerate() {
        if l.player() != i {
            return Err(SteeringError::BadParameter(format!("learner {i} plays for player {}", l.player())));
        }
    }
    opts.validate(game)?;
    match opts.scheme {
        Scheme::NormalForm => {
            for i in 0..n {
                let k = game.treeplex(i).num_infosets();
                if k != 1 {
                    return Err(SteeringError::NotNormalForm { player: i, infosets: k });
                }
            }
        }
        Scheme::FullFeedback if !is_nash(game, target, opts.nash_tolerance) => return Err(SteeringError::TargetNotNash),
        _ => {}
    }

    let all: Vec<usize> = (0..n).collect();
    let utilities: Vec<Vec<f64>> = (0..n).map(|i| game.utility_vector(i)).collect();
    let welfare = game.welfare_vector();
    let d_hat = target_indicator(game, target);
    let direct: Vec<Vec<f64>> = (0..n).map(|i| direct_indicator(game, target, i)).collect();
    let needs_sample = opts.scheme == Scheme::Trajectory || learners.iter().any(|l| l.feedback() == Feedback::Bandit);
    let mut player_rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream(opts.seed, &format!("player{i}"))).collect();
    let mut chance_rng = stream(opts.seed, "chance");
    let cap_total = opts.payment_cap();
    let mut records: Vec<RegretRecord> =
        (0..n).map(|i| RegretRecord::new(game.treeplex(i).num_sequences(), cap_total)).collect();
    let mut metrics = SteeringMetrics::new(n);

    for t in 0..opts.rounds {
        let x: Vec<SeqStrategy> = learners.iter().map(|l| l.strategy().clone()).collect();
        let paying = t >= opts.burn_in && opts.scheme != Scheme::None;
        let alpha = if !paying {
            0.0
        } else {
            match opts.alpha {
                AlphaMode::Fixed { alpha } => alpha,
                AlphaMode::Dynamic { base, cap, window } => {
                    let from = metrics.rounds().saturating_sub(window);
                    let recent = if metrics.rounds() == 0 { 2.0 } else { metrics.window_gap(from, metrics.rounds()) };
                    super::dynamic_alpha(recent, base, cap)
                }
            }
        };
        let cap = match (paying, opts.scheme) {
            (false, _) | (_, Scheme::None) => 0.0,
            (_, Scheme::NormalForm) => 1.0 + alpha,
            (_, Scheme::FullFeedback) => 3.0,
            (_, Scheme::Trajectory) => opts.cap,
        };

        let x_hat = reach_products(game, &x, &all)?;
        let round_gap: f64 = x_hat.iter().zip(&d_hat).map(|(a, b)| (a - b).abs()).sum();
        let dist = terminal_distribution(game, &x)?;
        let round_welfare: f64 = dist.iter().zip(&welfare).map(|(p, w)| p * w).sum();
        let round_objective = opts.objective.as_ref().map(|o| dist.iter().zip(o).map(|(p, v)| p * v).sum());
        let deviation: Vec<f64> = (0..n)
            .map(|i| dist.iter().zip(&direct[i]).filter(|(_, &d)| d == 0.0).map(|(p, _)| p).sum())
            .collect();

        // Per-player payment: a sequence-space vector, or a terminal vector
        // for the trajectory scheme.
        let mut seq_pay: Vec<Option<Vec<f64>>> = vec![None; n];
        let mut term_pay: Vec<Option<Vec<f64>>> = vec![None; n];
        if paying {
            for i in 0..n {
                match opts.scheme {
                    Scheme::NormalForm => seq_pay[i] = Some(nf_payment_vector(game, target, &x, i, alpha)?),
                    Scheme::FullFeedback => seq_pay[i] = Some(ff_payment_vector(game, target, &x, i, alpha)),
                    Scheme::Trajectory => {
                        let q = d_hat.iter().zip(&direct[i]).map(|(&h, &di)| alpha * h + opts.cap * di * (1.0 - h));
                        term_pay[i] = Some(q.collect());
                    }
                    Scheme::None => {}
                }
            }
        }

        let sampled = if needs_sample {
            let pure: Vec<SeqStrategy> = learners
                .iter_mut()
                .zip(player_rngs.iter_mut())
                .map(|(l, rng)| {
                    let plan = l.sample_plan(rng);
                    SeqStrategy::pure(l.treeplex(), &plan)
                })
                .collect();
            let z = sample_playout(game, &pure, &mut chance_rng);
            Some((pure, z))
        } else {
            None
        };

        let mut realized = vec![0.0; n];
        let mut expected = vec![0.0; n];
        for i in 0..n {
            let bandit = learners[i].feedback() == Feedback::Bandit;
            let total: Vec<f64> = match &term_pay[i] {
                Some(q) => {
                    expected[i] = dist.iter().zip(q).map(|(p, v)| p * v).sum();
                    if let Some((_, z)) = &sampled {
                        realized[i] = q[*z];
                    }
                    let augmented: Vec<f64> = utilities[i].iter().zip(q).map(|(u, v)| u + v).collect();
                    sequence_utility(game, &x, i, &augmented)
                }
                None => {
                    let mut base = sequence_utility(game, &x, i, &utilities[i]);
                    if let Some(g) = &seq_pay[i] {
                        expected[i] = dot(g, &x[i]);
                        realized[i] = match (&sampled, bandit) {
                            (Some((pure, _)), true) => dot(g, &pure[i]),
                            _ => expected[i],
                        };
                        for (b, p) in base.iter_mut().zip(g) {
                            *b += p;
                        }
                    }
                    base
                }
            };
            records[i].push(&total, &x[i]);
            if bandit {
                let (_, z) = sampled.as_ref().expect("sampled for bandit learners");
                let payoff = utilities[i][*z] + realized[i];
                learners[i].observe_payoff(game.terminal_seq(*z, i), payoff)?;
            } else {
                learners[i].observe(&total)?;
            }
        }

        metrics.push_round(&realized, &expected, round_welfare, round_objective, round_gap, alpha, cap, &deviation);
    }

    metrics.regrets = records
        .iter()
        .enumerate()
        .map(|(i, r)| r.regret(game.treeplex(i)).unwrap_or(0.0))
        .collect();
    Ok(metrics)
}

/// Full-feedback steering with a fixed schedule.
pub fn run_full_feedback_steer(
    game: &GameTree,
    target: &[SeqStrategy],
    learners: &mut [Box<dyn Learner>],
    hyper: &Hyperparams,
) -> Result<SteeringMetrics, SteeringError> {
    run(game, target, learners, &RunOptions::new(Scheme::FullFeedback, hyper))
}

/// Trajectory steering with a fixed schedule.
pub fn run_trajectory_steer(
    game: &GameTree,
    target: &[SeqStrategy],
    learners: &mut [Box<dyn Learner>],
    hyper: &Hyperparams,
    seed: u64,
) -> Result<SteeringMetrics, SteeringError> {
    run(game, target, learners, &RunOptions { seed, ..RunOptions::new(Scheme::Trajectory, hyper) })
}

/// Normal-form steering with a fixed schedule.
pub fn run_normal_form_steer(
    game: &GameTree,
    target: &[SeqStrategy],
    learners: &mut [Box<dyn Learner>],
    hyper: &Hyperparams,
) -> Result<SteeringMetrics, SteeringError> {
    run(game, target, learners, &RunOptions::new(Scheme::NormalForm, hyper))
}

pub(crate) fn dot(g: &[f64], x: &SeqStrategy) -> f64 {
    g.iter().zip(&x.mass).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{constant_profile, coordination, stag_hunt, stag_hunt_target, HARE};
    use crate::game::Treeplex;
    use crate::learners::{LearnerError, LearnerKind};

    /// Plays a fixed strategy forever.
    struct Fixed {
        tp: Treeplex,
        x: SeqStrategy,
        rounds: usize,
    }

    impl Learner for Fixed {
        fn player(&self) -> usize {
            self.tp.player
        }
        fn treeplex(&self) -> &Treeplex {
            &self.tp
        }
        fn feedback(&self) -> Feedback {
            Feedback::Full
        }
        fn strategy(&self) -> &SeqStrategy {
            &self.x
        }
        fn average(&self) -> SeqStrategy {
            self.x.clone()
        }
        fn rounds(&self) -> usize {
            self.rounds
        }
        fn observe(&mut self, _utility: &[f64]) -> Result<(), LearnerError> {
            self.rounds += 1;
            Ok(())
        }
    }

    fn fixed(game: &GameTree, profile: &[SeqStrategy]) -> Vec<Box<dyn Learner>> {
        profile
            .iter()
            .enumerate()
            .map(|(i, x)| Box::new(Fixed { tp: game.treeplex(i).clone(), x: x.clone(), rounds: 0 }) as Box<dyn Learner>)
            .collect()
    }

    #[test]
    fn direct_players_get_the_bonus() {
        let g = stag_hunt();
        let d = stag_hunt_target(&g);
        let hyper = Hyperparams::fixed(0.1, 3.0, 50);
        let m = run_full_feedback_steer(&g, &d, &mut fixed(&g, &d), &hyper).unwrap();
        assert_eq!(m.final_gap(), 0.0);
        for i in 0..2 {
            let ones = d[i].dot_relevant(&d[i], g.treeplex(i));
            assert!((m.average_expected_payment(i) - 0.1 * ones).abs() < 1e-12);
        }
        let m = run_trajectory_steer(&g, &d, &mut fixed(&g, &d), &Hyperparams::fixed(0.2, 2.0, 50), 1).unwrap();
        assert!(m.realized_payments.iter().all(|&p| p == 0.2));
    }

    #[test]
    fn burn_in_pays_nothing() {
        let g = stag_hunt();
        let d = stag_hunt_target(&g);
        let mut learners: Vec<Box<dyn Learner>> =
            (0..2).map(|i| LearnerKind::default().build(g.treeplex(i), 5.0).unwrap()).collect();
        let opts = RunOptions {
            burn_in: 10,
            alpha: AlphaMode::Dynamic { base: 0.1, cap: 1.0, window: 50 },
            ..RunOptions::new(Scheme::Trajectory, &Hyperparams::fixed(0.0, 4.0, 30))
        };
        let m = run(&g, &d, &mut learners, &opts).unwrap();
        assert!(m.realized_payments[..20].iter().all(|&p| p == 0.0));
        assert!(m.expected_payments[..20].iter().all(|&p| p == 0.0));
        assert!(m.alpha[10] > 0.0);
        assert_eq!(m.cap[10], 4.0);
    }

    #[test]
    fn zero_alpha_metrics_are_well_formed() {
        let g = stag_hunt();
        let d = stag_hunt_target(&g);
        let mut learners: Vec<Box<dyn Learner>> =
            (0..2).map(|i| LearnerKind::default().build(g.treeplex(i), 4.0).unwrap()).collect();
        let m = run_full_feedback_steer(&g, &d, &mut learners, &Hyperparams::fixed(0.0, 3.0, 200)).unwrap();
        assert_eq!(m.rounds(), 200);
        assert_eq!(m.realized_payments.len(), 400);
        assert!(m.running_gap.iter().all(|g| (0.0..=4.0 + 1e-12).contains(g)));
        assert!(m.expected_payments.iter().all(|&p| p >= -1e-12));
        assert_eq!(m.regrets.len(), 2);
    }

    #[test]
    fn rejects_bad_configurations() {
        let g = stag_hunt();
        let bad = constant_profile(&g, HARE);
        let hyper = Hyperparams::fixed(0.1, 3.0, 5);
        let mut l = fixed(&g, &bad);
        assert!(run_full_feedback_steer(&g, &stag_hunt_target(&g)[..1], &mut l, &hyper).is_err());
        let mixed = vec![bad[0].clone(), SeqStrategy::pure(g.treeplex(1), &[1])];
        assert!(matches!(run_full_feedback_steer(&g, &mixed, &mut l, &hyper), Err(SteeringError::TargetNotNash)));
        let d = stag_hunt_target(&g);
        let low = Hyperparams::fixed(0.1, 0.5, 5);
        assert!(matches!(run_trajectory_steer(&g, &d, &mut l, &low, 0), Err(SteeringError::BadParameter(_))));
    }

    #[test]
    fn bandit_learners_are_reproducible() {
        let g = coordination();
        let d = constant_profile(&g, 1);
        let go = || {
            let mut learners: Vec<Box<dyn Learner>> =
                (0..2).map(|i| LearnerKind::exp3().build(g.treeplex(i), 2.2).unwrap()).collect();
            let hyper = Hyperparams::fixed(0.1, 1.1, 300);
            let opts = RunOptions { seed: 9, ..RunOptions::new(Scheme::NormalForm, &hyper) };
            run(&g, &d, &mut learners, &opts).unwrap()
        };
        let (a, b) = (go(), go());
        assert_eq!(a.realized_payments, b.realized_payments);
        assert_eq!(a.welfare, b.welfare);
    }
}
