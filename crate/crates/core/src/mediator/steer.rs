//! Steering toward an optimal equilibrium, either computed up front or
//! learned alongside the players.

use rand::Rng;

use super::{fix_mediator, AugmentedGame, BceSolution, LagrangianGame, MediatorError};
use crate::game::eval::dot;
use crate::game::{
    expected_value, reach_products, sequence_utility, terminal_distribution, GameTree, Normalization, RawNode,
    SeqStrategy, TreeBuilder, Treeplex,
};
use crate::learners::{Averaging, CfrPlus, Exp3, Learner, LearnerKind, PayoffTable, RegretRecord};
use crate::rng::stream;
use crate::steering::{ff_payment_vector, run, RunOptions, SteeringMetrics};

/// Holds `solution.mu` fixed and steers learners of kind `kind` to the
/// direct profile of the fixed game. Refuses an uncertified solution unless
/// `force` is set.
pub fn compute_then_steer(
    aug: &AugmentedGame,
    base_objective: &[f64],
    solution: &BceSolution,
    kind: &LearnerKind,
    opts: &RunOptions,
    force: bool,
) -> Result<SteeringMetrics, MediatorError> {
    if !solution.certified && !force {
        return Err(MediatorError::NotCertified { benefit: solution.max_benefit(), iterations: solution.iterations });
    }
    let fixed = fix_mediator(aug, &solution.mu)?;
    let target: Vec<SeqStrategy> = aug.direct_profile().iter().map(|d| aug.to_fixed(d)).collect();
    let range = 1.0 + opts.payment_cap();
    let mut learners = (0..fixed.num_players())
        .map(|i| kind.build(fixed.treeplex(i), range))
        .collect::<Result<Vec<_>, _>>()?;
    let mut opts = opts.clone();
    opts.objective = Some(aug.lift(base_objective));
    opts.nash_tolerance = opts.nash_tolerance.max(solution.max_benefit() + 1e-9);
    let mut metrics = run(&fixed, &target, &mut learners, &opts)?;
    metrics.optimal_value = Some(solution.value);
    Ok(metrics)
}

/// The mediator learns its strategy with CFR+ on the Lagrangian while paying
/// the full-feedback payments of the current augmented game. `learners`
/// play augmented players `1..=n` in order.
pub fn online_steer(
    aug: &AugmentedGame,
    base_objective: &[f64],
    lambda: f64,
    alpha: f64,
    rounds: usize,
    learners: &mut [Box<dyn Learner>],
) -> Result<SteeringMetrics, MediatorError> {
    let game = &aug.game;
    let n = aug.num_base_players();
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(MediatorError::BadParameter(format!("lambda {lambda} must be at least 1")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(MediatorError::BadParameter(format!("alpha {alpha} not in [0, 1]")));
    }
    if learners.len() != n || learners.iter().enumerate().any(|(i, l)| l.player() != i + 1) {
        return Err(MediatorError::BadParameter(format!("need one learner for each of players 1..={n}")));
    }
    if base_objective.len() != aug.base.num_terminals() {
        return Err(MediatorError::BadParameter("objective length differs from the base terminal count".into()));
    }
    let lag = LagrangianGame::new(aug, base_objective, lambda);
    let tp0 = game.treeplex(0);
    let mut mediator = CfrPlus::new(tp0, Averaging::Uniform);
    let direct = aug.direct_profile();
    let players: Vec<usize> = (1..=n).collect();
    let utilities: Vec<Vec<f64>> = (0..=n).map(|p| game.utility_vector(p)).collect();
    let welfare = game.welfare_vector();
    let direct_at: Vec<Vec<f64>> =
        (0..n).map(|i| (0..game.num_terminals()).map(|z| direct[i].mass[game.terminal_seq(z, i + 1)]).collect()).collect();
    let cap = 3.0;
    let mut records: Vec<RegretRecord> =
        (1..=n).map(|p| RegretRecord::new(game.treeplex(p).num_sequences(), cap + 1.0)).collect();
    let mut metrics = SteeringMetrics::new(n);

    for _ in 0..rounds {
        let mu = mediator.strategy().clone();
        let x: Vec<SeqStrategy> = learners.iter().map(|l| l.strategy().clone()).collect();
        let mut full = vec![mu.clone()];
        full.extend(x.iter().cloned());
        let mut target = vec![mu];
        target.extend(direct.iter().cloned());

        let x_hat = reach_products(game, &full, &players)?;
        let d_hat = reach_products(game, &target, &players)?;
        let round_gap: f64 = x_hat.iter().zip(&d_hat).map(|(a, b)| (a - b).abs()).sum();
        let dist = terminal_distribution(game, &full)?;
        let round_welfare: f64 = dist.iter().zip(&welfare).map(|(p, w)| p * w).sum();
        let round_objective: f64 = dist.iter().zip(&lag.objective).map(|(p, v)| p * v).sum();
        let deviation: Vec<f64> = direct_at
            .iter()
            .map(|di| dist.iter().zip(di).filter(|(_, &d)| d == 0.0).map(|(p, _)| p).sum())
            .collect();

        let mut expected = vec![0.0; n];
        for i in 0..n {
            let p = i + 1;
            let pay = ff_payment_vector(game, &target, &full, p, alpha);
            expected[i] = dot(&pay, &x[i]);
            let mut total = sequence_utility(game, &full, p, &utilities[p]);
            for (t, v) in total.iter_mut().zip(&pay) {
                *t += v;
            }
            records[i].push(&total, &x[i]);
            learners[i].observe(&total)?;
        }
        let g0 = lag.mediator_gradient(&x, 1.0 / lambda, tp0.num_sequences());
        mediator.step(&g0)?;
        metrics.push_round(&expected, &expected, round_welfare, Some(round_objective), round_gap, alpha, cap, &deviation);
    }
    metrics.regrets =
        records.iter().enumerate().map(|(i, r)| r.regret(game.treeplex(i + 1)).unwrap_or(0.0)).collect();
    Ok(metrics)
}

/// Which branch a round of [`nf_online_steer`] took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NfBranch {
    Explore,
    Exploit,
}

/// Payment to `player` for the played profile `played`.
///
/// Exploring: `1 - u_i(a) + [a_i = r_i]` with `recommended` the uniformly
/// drawn recommendation. Exploiting: the sandbox payment
/// `u_i(a_i, d_-i) - u_i(a) - min_b [u_i(b, d_-i) - u_i(b, a_-i)]` with
/// `recommended` the mediator's profile `d`.
pub fn nf_online_payment(
    table: &PayoffTable,
    branch: NfBranch,
    recommended: &[usize],
    played: &[usize],
    player: usize,
) -> f64 {
    let u = |p: &[usize]| table.payoff(p, player);
    match branch {
        NfBranch::Explore => 1.0 - u(played) + if played[player] == recommended[player] { 1.0 } else { 0.0 },
        NfBranch::Exploit => {
            let with = |base: &[usize], b: usize| {
                let mut p = base.to_vec();
                p[player] = b;
                u(&p)
            };
            let floor = (0..table.actions()[player])
                .map(|b| with(recommended, b) - with(played, b))
                .fold(f64::INFINITY, f64::min);
            with(recommended, played[player]) - u(played) - floor
        }
    }
}

/// One pure plan per recommendation: a chance root over the `k`
/// recommendations, each followed by a `k`-way decision.
fn plan_treeplex(k: usize) -> Treeplex {
    let mut b = TreeBuilder::new(1);
    let probs = vec![1.0 / k as f64; k];
    let root = b.push(None, RawNode::Chance { labels: (0..k).map(|r| format!("r{r}")).collect(), probs });
    let labels: Vec<String> = (0..k).map(|a| a.to_string()).collect();
    let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
    for r in 0..k {
        let node = b.decision(Some(root), 0, format!("r{r}"), &labels);
        for _ in 0..k {
            b.terminal(Some(node), &[0.0]);
        }
    }
    b.finish(Normalization::identity()).treeplex(0).clone()
}

fn arm_treeplex(k: usize) -> Treeplex {
    let mut b = TreeBuilder::new(1);
    let actions: Vec<String> = (0..k).map(|a| a.to_string()).collect();
    let root = b.push(None, RawNode::Decision { player: 0, infoset: "m".into(), actions });
    for _ in 0..k {
        b.terminal(Some(root), &[0.0]);
    }
    b.finish(Normalization::identity()).treeplex(0).clone()
}

/// Bandit online steering in a normal-form game. The mediator runs EXP3
/// over recommendation profiles and each player runs EXP3 over maps from
/// recommendations to actions, both with exploration `gamma`.
///
/// Per-round metrics are exact expectations over every random draw;
/// `objective` is `u_0` against the mediator's current profile
/// distribution.
#[allow(clippy::too_many_arguments)]
pub fn nf_online_steer(
    base: &GameTree,
    base_objective: &[f64],
    alpha: f64,
    lambda: f64,
    rounds: usize,
    gamma: f64,
    seed: u64,
) -> Result<SteeringMetrics, MediatorError> {
    let n = base.num_players();
    for i in 0..n {
        let k = base.treeplex(i).num_infosets();
        if k != 1 {
            return Err(MediatorError::NotNormalForm { player: i, infosets: k });
        }
    }
    if !(0.0..=1.0).contains(&alpha) || !(lambda > 0.0 && lambda.is_finite()) {
        return Err(MediatorError::BadParameter(format!("alpha {alpha}, lambda {lambda}")));
    }
    if base_objective.len() != base.num_terminals() {
        return Err(MediatorError::BadParameter("objective length differs from the terminal count".into()));
    }
    let table = PayoffTable::from_game(base, None).map_err(crate::steering::SteeringError::from)?;
    let actions = table.actions().to_vec();
    let profiles: Vec<Vec<usize>> = (0..table.num_profiles()).map(|k| table.profile(k)).collect();
    let pure = |p: &[usize]| -> Vec<SeqStrategy> {
        (0..n).map(|i| SeqStrategy::pure(base.treeplex(i), &[p[i]])).collect()
    };
    let objective: Vec<f64> = profiles.iter().map(|p| expected_value(base, &pure(p), base_objective)).collect();
    let welfare: Vec<f64> = profiles.iter().map(|p| (0..n).map(|i| table.payoff(p, i)).sum()).collect();

    let shift = n as f64;
    let mut mediator = Exp3::new(&arm_treeplex(profiles.len()), gamma, 1.0 / lambda + 2.0 * shift)?;
    let mut players: Vec<Exp3> =
        actions.iter().map(|&k| Exp3::new(&plan_treeplex(k), gamma, 3.0)).collect::<Result<_, _>>()?;
    let mut mediator_rng = stream(seed, "mediator");
    let mut player_rngs: Vec<_> = (0..n).map(|i| stream(seed, &format!("player{i}"))).collect();
    let mut metrics = SteeringMetrics::new(n);

    for _ in 0..rounds {
        // cond[i][r][a]: probability that player i plays a when told r.
        let cond: Vec<Vec<Vec<f64>>> = players
            .iter()
            .zip(&actions)
            .map(|(l, &k)| {
                let mut c = vec![vec![0.0; k]; k];
                for (plan, &p) in l.plans().iter().zip(l.probabilities()) {
                    for (r, &a) in plan.iter().enumerate() {
                        c[r][a] += p;
                    }
                }
                c
            })
            .collect();
        let joint = |rec: &[usize], a: &[usize]| -> f64 { (0..n).map(|i| cond[i][rec[i]][a[i]]).product() };
        let med_probs = mediator.probabilities().to_vec();
        let uniform = 1.0 / profiles.len() as f64;

        let mut round_gap = 0.0;
        let mut round_objective = 0.0;
        let mut round_welfare = 0.0;
        let mut expected = vec![0.0; n];
        let mut deviation = vec![0.0; n];
        for (r, rec) in profiles.iter().enumerate() {
            for (k, a) in profiles.iter().enumerate() {
                let p = joint(rec, a);
                round_gap += (p - if r == k { 1.0 } else { 0.0 }).abs();
                let explore = alpha * uniform * p;
                let exploit = (1.0 - alpha) * med_probs[r] * p;
                round_objective += med_probs[r] * p * objective[k];
                round_welfare += med_probs[r] * p * welfare[k];
                for i in 0..n {
                    if explore > 0.0 {
                        expected[i] += explore * nf_online_payment(&table, NfBranch::Explore, rec, a, i);
                    }
                    if exploit > 0.0 {
                        expected[i] += exploit * nf_online_payment(&table, NfBranch::Exploit, rec, a, i);
                    }
                }
            }
            for i in 0..n {
                deviation[i] += med_probs[r] * (1.0 - cond[i][rec[i]][rec[i]]);
            }
        }

        let arm = mediator.sample_arm(&mut mediator_rng);
        let d = &profiles[arm];
        let branch = if mediator_rng.gen::<f64>() < alpha { NfBranch::Explore } else { NfBranch::Exploit };
        let rec: Vec<usize> = match branch {
            NfBranch::Explore => actions.iter().map(|&k| mediator_rng.gen_range(0..k)).collect(),
            NfBranch::Exploit => d.clone(),
        };
        let played: Vec<usize> = players
            .iter_mut()
            .zip(player_rngs.iter_mut())
            .enumerate()
            .map(|(i, (l, rng))| {
                let plan = l.sample_arm(rng);
                l.plans()[plan][rec[i]]
            })
            .collect();
        let mut realized = vec![0.0; n];
        for i in 0..n {
            realized[i] = nf_online_payment(&table, branch, &rec, &played, i);
            players[i].step(table.payoff(&played, i) + realized[i])?;
        }
        let reward = match branch {
            NfBranch::Explore => 0.0,
            NfBranch::Exploit => {
                let dev: f64 = (0..n)
                    .map(|i| {
                        let mut p = d.clone();
                        p[i] = played[i];
                        table.payoff(&p, i) - table.payoff(d, i)
                    })
                    .sum();
                objective[arm] / lambda - dev
            }
        };
        mediator.step(reward + shift)?;
        metrics.push_round(&realized, &expected, round_welfare, Some(round_objective), round_gap, alpha, 2.0, &deviation);
    }
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{kuhn3, matching, stag_hunt, Objective};
    use crate::learners::{Feedback, LearnerError};
    use crate::mediator::{augment, solve_optimal_bce, BceOptions};
    use crate::steering::{AlphaMode, Scheme};

    struct Fixed {
        tp: Treeplex,
        x: SeqStrategy,
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
            0
        }
        fn observe(&mut self, _: &[f64]) -> Result<(), LearnerError> {
            Ok(())
        }
    }

    fn welfare(g: &GameTree) -> Vec<f64> {
        Objective::Welfare.values(g)
    }

    #[test]
    fn direct_learners_have_no_optimality_gap() {
        let g = stag_hunt();
        let aug = augment(&g).unwrap();
        let obj = welfare(&g);
        let sol = solve_optimal_bce(&aug, &obj, &BceOptions::default()).unwrap();
        assert!(sol.certified);
        let fixed = fix_mediator(&aug, &sol.mu).unwrap();
        let opts = RunOptions {
            scheme: Scheme::Trajectory,
            alpha: AlphaMode::Fixed { alpha: 0.1 },
            cap: 4.0,
            rounds: 30,
            burn_in: 10,
            seed: 1,
            objective: None,
            nash_tolerance: 1e-9,
        };
        let m = compute_then_steer(&aug, &obj, &sol, &LearnerKind::default(), &opts, false).unwrap();
        assert_eq!(m.rounds(), 30);
        assert!(m.realized_payments[..20].iter().all(|&p| p == 0.0));
        assert_eq!(m.optimal_value, Some(sol.value));

        let mut direct: Vec<Box<dyn Learner>> = aug
            .direct_profile()
            .iter()
            .map(|d| {
                let x = aug.to_fixed(d);
                Box::new(Fixed { tp: fixed.treeplex(x.player).clone(), x }) as Box<dyn Learner>
            })
            .collect();
        let target: Vec<SeqStrategy> = aug.direct_profile().iter().map(|d| aug.to_fixed(d)).collect();
        let o = RunOptions { objective: Some(aug.lift(&obj)), ..opts };
        let mut m = run(&fixed, &target, &mut direct, &o).unwrap();
        m.optimal_value = Some(sol.value);
        for v in &m.objective {
            assert!((v - sol.value).abs() < 1e-9);
        }
        assert!(m.optimality_gap().unwrap().abs() < 1e-9);
    }

    #[test]
    fn uncertified_solutions_are_refused() {
        let g = stag_hunt();
        let aug = augment(&g).unwrap();
        let obj = welfare(&g);
        let mut sol = solve_optimal_bce(&aug, &obj, &BceOptions::default()).unwrap();
        sol.certified = false;
        let opts = RunOptions::new(Scheme::FullFeedback, &crate::steering::Hyperparams::fixed(0.05, 3.0, 10));
        let err = compute_then_steer(&aug, &obj, &sol, &LearnerKind::default(), &opts, false).unwrap_err();
        assert!(matches!(err, MediatorError::NotCertified { .. }));
        assert!(compute_then_steer(&aug, &obj, &sol, &LearnerKind::default(), &opts, true).is_ok());
    }

    #[test]
    fn online_mediator_finds_optimum_against_direct_players() {
        let g = stag_hunt();
        let aug = augment(&g).unwrap();
        let obj = welfare(&g);
        let best = solve_optimal_bce(&aug, &obj, &BceOptions::default()).unwrap();
        let mut direct: Vec<Box<dyn Learner>> = aug
            .direct_profile()
            .into_iter()
            .map(|x| Box::new(Fixed { tp: aug.game.treeplex(x.player).clone(), x }) as Box<dyn Learner>)
            .collect();
        let m = online_steer(&aug, &obj, 16.0, 0.0, 4000, &mut direct).unwrap();
        let tail = &m.objective[3000..];
        let avg = tail.iter().sum::<f64>() / tail.len() as f64;
        assert!((avg - best.value).abs() < 1e-2, "{avg} vs {}", best.value);
        assert!(m.round_gap.iter().all(|&g| g < 1e-12));
        assert!(m.expected_payments.iter().all(|&p| p.abs() < 1e-9));
    }

    #[test]
    fn online_rejects_bad_parameters() {
        let g = stag_hunt();
        let aug = augment(&g).unwrap();
        let obj = welfare(&g);
        let mut none: Vec<Box<dyn Learner>> = Vec::new();
        assert!(online_steer(&aug, &obj, 0.5, 0.0, 1, &mut none).is_err());
        assert!(online_steer(&aug, &obj, 2.0, 0.0, 1, &mut none).is_err());
    }

    #[test]
    fn nf_payment_examples() {
        let g = matching();
        let t = PayoffTable::from_game(&g, None).unwrap();
        // Matching on A: both get utility 1.
        assert_eq!(nf_online_payment(&t, NfBranch::Explore, &[0, 1], &[0, 0], 0), 1.0);
        assert_eq!(nf_online_payment(&t, NfBranch::Explore, &[1, 1], &[0, 0], 0), 0.0);
        for d in [[0, 0], [0, 1], [1, 1]] {
            for i in 0..2 {
                assert!(nf_online_payment(&t, NfBranch::Exploit, &d, &d, i).abs() < 1e-12);
            }
        }
        for d in 0..4 {
            for a in 0..4 {
                let (d, a) = (t.profile(d), t.profile(a));
                for i in 0..2 {
                    assert!(nf_online_payment(&t, NfBranch::Exploit, &d, &a, i) >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn nf_online_runs_and_rejects_trees() {
        let g = matching();
        let obj = Objective::NegativeWelfare.values(&g);
        let m = nf_online_steer(&g, &obj, 0.1, 2.0, 200, 0.1, 3).unwrap();
        assert_eq!(m.rounds(), 200);
        assert!(m.expected_payments.iter().all(|&p| (-1e-12..=2.0 + 1e-12).contains(&p)));
        assert!(m.round_gap.iter().all(|&g| (0.0..=32.0).contains(&g)));
        let again = nf_online_steer(&g, &obj, 0.1, 2.0, 200, 0.1, 3).unwrap();
        assert_eq!(m.realized_payments, again.realized_payments);
        let k = kuhn3();
        let ko = welfare(&k);
        assert!(matches!(nf_online_steer(&k, &ko, 0.1, 2.0, 10, 0.1, 0), Err(MediatorError::NotNormalForm { .. })));
    }
}
