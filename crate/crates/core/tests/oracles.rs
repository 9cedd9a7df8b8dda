//! Sequence-form evaluation against brute-force enumeration of pure plans.

mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use steer_core::game::{best_response, expected_utility, reach_products, terminal_distribution, GameTree};
use steer_core::steering::directness_gap;

fn small_games() -> Vec<(&'static str, GameTree, Vec<Vec<Vec<usize>>>)> {
    all_games().into_iter().filter_map(|(t, g)| plan_lists(&g, 64).map(|p| (t, g, p))).collect()
}

fn mixtures(plans: &[Vec<Vec<usize>>], seed: u64) -> Vec<Mixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    plans.iter().map(|p| Mixture::random(p, 3, &mut rng)).collect()
}

#[test]
fn small_games_cover_the_matrix_games() {
    let tags: Vec<&str> = small_games().iter().map(|g| g.0).collect();
    for t in ["stag_hunt", "lower_bound(3)", "coordination", "matching"] {
        assert!(tags.contains(&t), "{t} missing from {tags:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distribution_and_utility_match_enumeration(seed in any::<u64>()) {
        for (tag, g, plans) in small_games() {
            let mix = mixtures(&plans, seed);
            let profile: Vec<_> = mix.iter().enumerate().map(|(i, m)| m.to_seq(&g, i)).collect();
            let brute = brute_distribution(&g, &mix);
            let dist = terminal_distribution(&g, &profile).unwrap();
            for (a, b) in dist.iter().zip(&brute) {
                prop_assert!((a - b).abs() < 1e-9, "{tag}: {a} vs {b}");
            }
            for i in 0..g.num_players() {
                let u = expected_utility(&g, &profile, i, None).unwrap();
                prop_assert!((u - brute_utility(&g, &mix, i)).abs() < 1e-9, "{tag} player {i}");
            }
        }
    }

    #[test]
    fn best_response_matches_enumeration(seed in any::<u64>()) {
        for (tag, g, plans) in small_games() {
            let mix = mixtures(&plans, seed);
            let profile: Vec<_> = mix.iter().enumerate().map(|(i, m)| m.to_seq(&g, i)).collect();
            for i in 0..g.num_players() {
                let (br, value) = best_response(&g, i, &profile, None).unwrap();
                let brute = brute_best_response(&g, &mix, i, &plans[i]);
                prop_assert!((value - brute).abs() < 1e-9, "{tag} player {i}: {value} vs {brute}");
                let mut dev = profile.clone();
                dev[i] = br;
                prop_assert!((expected_utility(&g, &dev, i, None).unwrap() - brute).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn directness_gap_matches_enumeration(seed in any::<u64>(), rounds in 1usize..6) {
        for (tag, g, plans) in small_games() {
            let all: Vec<usize> = (0..g.num_players()).collect();
            let history: Vec<Vec<Mixture>> = (0..rounds).map(|t| mixtures(&plans, seed ^ (t as u64 + 1))).collect();
            let target: Vec<Mixture> = mixtures(&plans, seed)
                .into_iter()
                .map(|m| Mixture::pure(m.plans[0].clone()))
                .collect();
            let seq = |mix: &[Mixture]| -> Vec<_> { mix.iter().enumerate().map(|(i, m)| m.to_seq(&g, i)).collect() };
            let x_hats: Vec<Vec<f64>> = history.iter().map(|h| reach_products(&g, &seq(h), &all).unwrap()).collect();
            for (h, x) in history.iter().zip(&x_hats) {
                for (a, b) in x.iter().zip(brute_reach_products(&g, h)) {
                    prop_assert!((a - b).abs() < 1e-9, "{tag}");
                }
            }
            let d_hat = reach_products(&g, &seq(&target), &all).unwrap();
            let gap = directness_gap(&x_hats, &d_hat).unwrap();
            let brute = brute_gap(&g, &history, &target);
            prop_assert!((gap - brute).abs() < 1e-9, "{tag}: {gap} vs {brute}");
        }
    }
}
