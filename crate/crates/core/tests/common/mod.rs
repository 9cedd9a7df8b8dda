#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use steer_core::benchmarks::build;
use steer_core::game::{enumerate_plans, GameTree, NodeKind, SeqStrategy};

pub const TAGS: [&str; 8] =
    ["stag_hunt", "lower_bound(3)", "coordination", "matching", "kuhn3", "sheriff", "ridesharing(2)", "battleship"];

pub fn game(tag: &str) -> GameTree {
    build(&tag.parse().unwrap()).unwrap()
}

pub fn all_games() -> Vec<(&'static str, GameTree)> {
    TAGS.iter().map(|&t| (t, game(t))).collect()
}

/// Every player's plans, when each player has at most `limit`.
pub fn plan_lists(game: &GameTree, limit: usize) -> Option<Vec<Vec<Vec<usize>>>> {
    (0..game.num_players()).map(|i| enumerate_plans(game.treeplex(i), limit)).collect()
}

/// Terminal distribution of a pure plan profile, found by walking the tree.
pub fn pure_outcome(game: &GameTree, plans: &[&[usize]]) -> Vec<f64> {
    let mut out = vec![0.0; game.num_terminals()];
    let mut stack = vec![(0usize, 1.0f64)];
    while let Some((id, p)) = stack.pop() {
        let node = game.node(id);
        match &node.kind {
            NodeKind::Terminal { index } => out[*index] += p,
            NodeKind::Chance { probs } => {
                for (c, q) in node.children.iter().zip(probs) {
                    stack.push((*c, p * q));
                }
            }
            NodeKind::Decision { player, infoset } => {
                let local = game.infosets()[*infoset].local;
                stack.push((node.children[plans[*player][local]], p));
            }
        }
    }
    out
}

/// Whether `plan` takes player `player`'s actions along the path to terminal `z`.
pub fn consistent(game: &GameTree, player: usize, plan: &[usize], z: usize) -> bool {
    let mut id = game.terminal_node(z);
    while let Some(parent) = game.node(id).parent {
        if let NodeKind::Decision { player: p, infoset } = game.node(parent).kind {
            if p == player && plan[game.infosets()[infoset].local] != game.node(id).parent_action {
                return false;
            }
        }
        id = parent;
    }
    true
}

/// A mixed strategy given as weights on a few plans.
#[derive(Clone, Debug)]
pub struct Mixture {
    pub plans: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl Mixture {
    pub fn random<R: Rng>(all: &[Vec<usize>], support: usize, rng: &mut R) -> Self {
        let plans: Vec<Vec<usize>> = all.choose_multiple(rng, support.min(all.len())).cloned().collect();
        let raw: Vec<f64> = plans.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = raw.iter().sum();
        Mixture { plans, weights: raw.iter().map(|w| w / s).collect() }
    }

    pub fn pure(plan: Vec<usize>) -> Self {
        Mixture { plans: vec![plan], weights: vec![1.0] }
    }

    pub fn to_seq(&self, game: &GameTree, player: usize) -> SeqStrategy {
        let tp = game.treeplex(player);
        let mut mass = vec![0.0; tp.num_sequences()];
        for (plan, w) in self.plans.iter().zip(&self.weights) {
            for (m, v) in mass.iter_mut().zip(SeqStrategy::pure(tp, plan).mass) {
                *m += w * v;
            }
        }
        SeqStrategy { player, mass }
    }

    /// Probability that the player's own actions lead to terminal `z`.
    pub fn reach(&self, game: &GameTree, player: usize, z: usize) -> f64 {
        self.plans.iter().zip(&self.weights).filter(|(p, _)| consistent(game, player, p, z)).map(|(_, w)| w).sum()
    }
}

/// Terminal distribution of a profile of mixtures by enumerating every
/// combination of supported plans.
pub fn brute_distribution(game: &GameTree, profile: &[Mixture]) -> Vec<f64> {
    let mut out = vec![0.0; game.num_terminals()];
    let mut idx = vec![0usize; profile.len()];
    loop {
        let w: f64 = profile.iter().zip(&idx).map(|(m, &k)| m.weights[k]).product();
        let plans: Vec<&[usize]> = profile.iter().zip(&idx).map(|(m, &k)| m.plans[k].as_slice()).collect();
        for (o, p) in out.iter_mut().zip(pure_outcome(game, &plans)) {
            *o += w * p;
        }
        let mut j = 0;
        loop {
            if j == idx.len() {
                return out;
            }
            idx[j] += 1;
            if idx[j] < profile[j].plans.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

pub fn brute_utility(game: &GameTree, profile: &[Mixture], player: usize) -> f64 {
    brute_distribution(game, profile).iter().enumerate().map(|(z, p)| p * game.utility(z, player)).sum()
}

/// Best pure-plan value for `player` against the rest of `profile`.
pub fn brute_best_response(game: &GameTree, profile: &[Mixture], player: usize, plans: &[Vec<usize>]) -> f64 {
    plans
        .iter()
        .map(|p| {
            let mut dev = profile.to_vec();
            dev[player] = Mixture::pure(p.clone());
            brute_utility(game, &dev, player)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `prod_j reach_j(z)` over the players, by path consistency.
pub fn brute_reach_products(game: &GameTree, profile: &[Mixture]) -> Vec<f64> {
    (0..game.num_terminals())
        .map(|z| profile.iter().enumerate().map(|(j, m)| m.reach(game, j, z)).product())
        .collect()
}

pub fn brute_gap(game: &GameTree, history: &[Vec<Mixture>], target: &[Mixture]) -> f64 {
    let d_hat = brute_reach_products(game, target);
    let mut avg = vec![0.0; game.num_terminals()];
    for profile in history {
        for (a, x) in avg.iter_mut().zip(brute_reach_products(game, profile)) {
            *a += x / history.len() as f64;
        }
    }
    avg.iter().zip(&d_hat).map(|(a, d)| (a - d).abs()).sum()
}

pub fn random_profile<R: Rng>(game: &GameTree, rng: &mut R) -> Vec<SeqStrategy> {
    (0..game.num_players()).map(|i| SeqStrategy::random(game.treeplex(i), rng)).collect()
}

pub fn random_pure_profile<R: Rng>(game: &GameTree, rng: &mut R) -> Vec<SeqStrategy> {
    (0..game.num_players()).map(|i| SeqStrategy::random_pure(game.treeplex(i), rng)).collect()
}

pub fn dot(g: &[f64], x: &SeqStrategy) -> f64 {
    g.iter().zip(&x.mass).map(|(a, b)| a * b).sum()
}

/// `max_x d_i . x` over terminal-relevant sequences, the largest value of
/// the directness bonus per unit of `alpha`.
pub fn direct_weight(game: &GameTree, target: &[SeqStrategy], player: usize) -> f64 {
    let tp = game.treeplex(player);
    target[player].mass.iter().zip(&tp.terminal_relevant).filter(|(_, &r)| r).map(|(m, _)| m).sum()
}

/// A profile mixing the target with random strategies, so that nearly
/// direct play is sampled as well as arbitrary play.
pub fn near_target<R: Rng>(game: &GameTree, target: &[SeqStrategy], rng: &mut R) -> Vec<SeqStrategy> {
    let weight: f64 = match rng.gen_range(0..3) {
        0 => 0.0,
        1 => rng.gen(),
        _ => 1.0 - rng.gen::<f64>().powi(4),
    };
    random_profile(game, rng).iter().zip(target).map(|(x, d)| d.mix(x, weight)).collect()
}

/// Checks nonnegativity, caps, own-strategy linearity and expectation
/// consistency of every payment scheme that applies to `game`, on `count`
/// random profiles. `nash` says whether `target` is an equilibrium, which
/// the normal-form dominance check needs.
pub fn payment_suite<R: Rng>(
    game: &GameTree,
    target: &[SeqStrategy],
    nash: bool,
    alpha: f64,
    cap: f64,
    count: usize,
    rng: &mut R,
) -> Result<(), String> {
    use steer_core::game::{expected_utility, sequence_utility, terminal_distribution};
    use steer_core::steering::{ff_payment_vector, nf_payment, traj_payment, traj_payment_vector};
    const TOL: f64 = 1e-9;
    let n = game.num_players();
    let normal_form = game.is_normal_form();
    let q: Vec<Vec<f64>> = (0..n).map(|i| traj_payment_vector(game, target, i, alpha, cap)).collect();
    for (i, qi) in q.iter().enumerate() {
        for (z, &v) in qi.iter().enumerate() {
            if !(-TOL..=cap + TOL).contains(&v) {
                return Err(format!("trajectory payment {v} outside [0, {cap}] at terminal {z}"));
            }
            if (traj_payment(game, target, i, z, alpha, cap) - v).abs() > TOL {
                return Err(format!("trajectory payment at terminal {z} disagrees with its vector"));
            }
        }
    }
    for _ in 0..count {
        let x = near_target(game, target, rng);
        let dist = terminal_distribution(game, &x).unwrap();
        let theta: f64 = rng.gen();
        for i in 0..n {
            let tp = game.treeplex(i);
            let b = SeqStrategy::random(tp, rng);
            let mixed = x[i].mix(&b, theta);
            let linear = |f: &dyn Fn(&SeqStrategy) -> f64, what: &str| -> Result<(), String> {
                let lhs = f(&mixed);
                let rhs = theta * f(&x[i]) + (1.0 - theta) * f(&b);
                if (lhs - rhs).abs() > TOL {
                    return Err(format!("{what} payment to player {i} is not linear: {lhs} vs {rhs}"));
                }
                Ok(())
            };

            let expected: f64 = dist.iter().zip(&q[i]).map(|(p, v)| p * v).sum();
            let coef = sequence_utility(game, &x, i, &q[i]);
            if (dot(&coef, &x[i]) - expected).abs() > TOL {
                return Err(format!("trajectory expectation mismatch for player {i}"));
            }
            if !(-TOL..=cap + TOL).contains(&expected) {
                return Err(format!("expected trajectory payment {expected} outside [0, {cap}]"));
            }
            linear(&|s| dot(&coef, s), "trajectory")?;

            let g = ff_payment_vector(game, target, &x, i, alpha);
            let p = dot(&g, &x[i]);
            let ff_cap = 2.0 + alpha * direct_weight(game, target, i);
            if !(-TOL..=ff_cap + TOL).contains(&p) {
                return Err(format!("full-feedback payment {p} outside [0, {ff_cap}] for player {i}"));
            }
            let (_, worst) = steer_core::game::treeplex_best_response(tp, &g.iter().map(|v| -v).collect::<Vec<_>>());
            if -worst < -TOL {
                return Err(format!("full-feedback payment can be negative for player {i}: {}", -worst));
            }
            linear(&|s| dot(&g, s), "full-feedback")?;

            if normal_form {
                let pay = |s: &SeqStrategy| {
                    let mut y = x.clone();
                    y[i] = s.clone();
                    nf_payment(game, target, &y, i, alpha).unwrap()
                };
                let p = pay(&x[i]);
                if !(-TOL..=1.0 + alpha + TOL).contains(&p) {
                    return Err(format!("normal-form payment {p} outside [0, 1 + alpha] for player {i}"));
                }
                linear(&pay, "normal-form")?;
                if nash {
                    let total = |s: &SeqStrategy| {
                        let mut y = x.clone();
                        y[i] = s.clone();
                        expected_utility(game, &y, i, None).unwrap() + pay(s)
                    };
                    let direct = total(&target[i]);
                    for a in 0..tp.num_actions[0] {
                        let s = SeqStrategy::pure(tp, &[a]);
                        if s != target[i] && direct - total(&s) < alpha - TOL {
                            return Err(format!("direct action of player {i} is not alpha-dominant over {a}"));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Largest `E_t |x_hat_N - d_hat_N|_1 - |Z| delta` over every player subset
/// `N` for one random history of `rounds` profiles.
pub fn obedience_union_slack<R: Rng>(game: &GameTree, target: &[SeqStrategy], rounds: usize, rng: &mut R) -> f64 {
    use steer_core::game::reach_products;
    let n = game.num_players();
    let history: Vec<Vec<SeqStrategy>> = (0..rounds).map(|_| near_target(game, target, rng)).collect();
    let delta: f64 = (0..n)
        .map(|i| {
            let avg: Vec<f64> = (0..target[i].mass.len())
                .map(|s| history.iter().map(|x| x[i].mass[s]).sum::<f64>() / rounds as f64)
                .collect();
            target[i].mass.iter().zip(&avg).map(|(d, x)| d * (d - x)).sum::<f64>()
        })
        .sum();
    let bound = game.num_terminals() as f64 * delta;
    let mut worst = f64::NEG_INFINITY;
    for mask in 0..1usize << n {
        let subset: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        let d_hat = reach_products(game, target, &subset).unwrap();
        let lhs: f64 = history
            .iter()
            .map(|x| {
                let x_hat = reach_products(game, x, &subset).unwrap();
                x_hat.iter().zip(&d_hat).map(|(a, b)| (a - b).abs()).sum::<f64>()
            })
            .sum::<f64>()
            / rounds as f64;
        worst = worst.max(lhs - bound);
    }
    worst
}
