//! The mediator-augmented game.
//!
//! Player 0 is the mediator. Before each decision of a base player it
//! recommends one of that player's actions; the player observes only the
//! recommendations it has received itself. Once two distinct players have
//! disobeyed, no further recommendations are made. Base player `i` becomes
//! augmented player `i + 1`.

use serde::Serialize;

use super::MediatorError;
use crate::game::{GameError, GameTree, NodeId, NodeKind, RawNode, SeqStrategy, TreeBuilder};

/// Marker in a recommendation history for "no recommendation received".
const NONE_MARK: &str = "-";

/// Where an augmented terminal came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TerminalIdentity {
    /// Base terminal reached.
    pub base: usize,
    /// First disobedience of each deviating player, in order: base player,
    /// base node and the action taken instead of the recommendation.
    pub deviations: Vec<(usize, NodeId, usize)>,
}

#[derive(Clone, Debug)]
pub struct AugmentedGame {
    pub base: GameTree,
    /// Players `1..=n` are the base players, player 0 the mediator.
    pub game: GameTree,
    pub identity: Vec<TerminalIdentity>,
    /// For each augmented infoset, the action recommended to its owner.
    recommended: Vec<Option<usize>>,
}

struct Walk<'a> {
    base: &'a GameTree,
    builder: TreeBuilder,
    identity: Vec<TerminalIdentity>,
    /// Keyed by the augmented infoset key of player infosets.
    recs: std::collections::HashMap<(usize, String), Option<usize>>,
    mediator_nodes: usize,
}

#[derive(Clone)]
struct State {
    /// Per base player, recommendations received so far.
    history: Vec<Vec<String>>,
    deviators: Vec<usize>,
    deviations: Vec<(usize, NodeId, usize)>,
}

impl Walk<'_> {
    fn visit(&mut self, node: NodeId, parent: Option<NodeId>, state: State) {
        let base = self.base;
        let n = &base.nodes()[node];
        match &n.kind {
            NodeKind::Terminal { index } => {
                let z = *index;
                let mut u = vec![0.0];
                u.extend((0..base.num_players()).map(|i| base.utility(z, i)));
                self.builder.push(parent, RawNode::Terminal { utilities: u });
                self.identity.push(TerminalIdentity { base: z, deviations: state.deviations });
            }
            NodeKind::Chance { probs } => {
                let id = self.builder.push(parent, RawNode::Chance { labels: n.labels.clone(), probs: probs.clone() });
                for &c in &n.children {
                    self.visit(c, Some(id), state.clone());
                }
            }
            NodeKind::Decision { player, infoset } => {
                let i = *player;
                let info = &base.infosets()[*infoset];
                if state.deviators.len() >= 2 {
                    let mut next = state.clone();
                    next.history[i].push(NONE_MARK.to_string());
                    let key = player_key(&info.key, &next.history[i]);
                    self.recs.insert((i + 1, key.clone()), None);
                    let id = self.builder.push(
                        parent,
                        RawNode::Decision { player: i + 1, infoset: key, actions: info.actions.clone() },
                    );
                    for &c in &n.children {
                        self.visit(c, Some(id), next.clone());
                    }
                    return;
                }
                let m = self.builder.push(
                    parent,
                    RawNode::Decision {
                        player: 0,
                        infoset: format!("m{}", self.mediator_nodes),
                        actions: info.actions.iter().map(|a| format!("recommend {a}")).collect(),
                    },
                );
                self.mediator_nodes += 1;
                for r in 0..info.actions.len() {
                    let mut seen = state.clone();
                    seen.history[i].push(r.to_string());
                    let key = player_key(&info.key, &seen.history[i]);
                    self.recs.insert((i + 1, key.clone()), Some(r));
                    let id = self.builder.push(
                        Some(m),
                        RawNode::Decision { player: i + 1, infoset: key, actions: info.actions.clone() },
                    );
                    for (a, &c) in n.children.iter().enumerate() {
                        let mut next = seen.clone();
                        if a != r && !next.deviators.contains(&i) {
                            next.deviators.push(i);
                            next.deviations.push((i, node, a));
                        }
                        self.visit(c, Some(id), next);
                    }
                }
            }
        }
    }
}

fn player_key(base_key: &str, history: &[String]) -> String {
    format!("{base_key}|{}", history.join("."))
}

/// Builds the mediator-augmented game of a valid base game.
pub fn augment(base: &GameTree) -> Result<AugmentedGame, MediatorError> {
    let violations = base.validate();
    if !violations.is_empty() {
        return Err(GameError::Invalid(violations).into());
    }
    let n = base.num_players();
    let mut walk = Walk {
        base,
        builder: TreeBuilder::new(n + 1),
        identity: Vec::new(),
        recs: Default::default(),
        mediator_nodes: 0,
    };
    let start = State { history: vec![Vec::new(); n], deviators: Vec::new(), deviations: Vec::new() };
    walk.visit(0, None, start);
    let mut game = walk.builder.finish(crate::game::Normalization::identity());
    game.normalization = base.normalization();
    let violations = game.validate();
    if !violations.is_empty() {
        return Err(GameError::Invalid(violations).into());
    }
    let recommended = game
        .infosets()
        .iter()
        .map(|info| if info.player == 0 { None } else { walk.recs.get(&(info.player, info.key.clone())).copied().flatten() })
        .collect();
    Ok(AugmentedGame { base: base.clone(), game, identity: walk.identity, recommended })
}

impl AugmentedGame {
    pub fn num_base_players(&self) -> usize {
        self.base.num_players()
    }

    /// Action recommended at an augmented infoset, `None` for mediator
    /// infosets and after recommendations have stopped.
    pub fn recommendation(&self, infoset: usize) -> Option<usize> {
        self.recommended[infoset]
    }

    /// Follows every recommendation; plays the first action where none
    /// was given. `player` is the base player index.
    pub fn direct_strategy(&self, player: usize) -> SeqStrategy {
        let tp = self.game.treeplex(player + 1);
        let plan: Vec<usize> = tp.infosets.iter().map(|&g| self.recommended[g].unwrap_or(0)).collect();
        SeqStrategy::pure(tp, &plan)
    }

    /// Direct strategies of all base players, as augmented players `1..=n`.
    pub fn direct_profile(&self) -> Vec<SeqStrategy> {
        (0..self.num_base_players()).map(|i| self.direct_strategy(i)).collect()
    }

    /// Copies a per-base-terminal vector onto augmented terminals.
    pub fn lift(&self, base_values: &[f64]) -> Vec<f64> {
        self.identity.iter().map(|id| base_values[id.base]).collect()
    }

    /// Mediator strategy that recommends by the pure base profile `plan`
    /// (one action per base infoset per player) whenever it recommends.
    pub fn recommend_plan(&self, plans: &[Vec<usize>]) -> SeqStrategy {
        let tp0 = self.game.treeplex(0);
        let plan: Vec<usize> = tp0
            .infosets
            .iter()
            .map(|&g| {
                let node = self.game.infosets()[g].nodes[0];
                let child = self.game.nodes()[node].children[0];
                let NodeKind::Decision { player, infoset } = self.game.nodes()[child].kind else {
                    unreachable!("mediator nodes precede player decisions")
                };
                let base_key = self.game.infosets()[infoset].key.split('|').next().unwrap_or_default();
                let i = player - 1;
                let b = self.base.find_infoset(i, base_key).expect("base infoset");
                plans[i][self.base.infosets()[b].local]
            })
            .collect();
        SeqStrategy::pure(tp0, &plan)
    }

    /// The same strategy as a player of the fixed game.
    pub fn to_fixed(&self, x: &SeqStrategy) -> SeqStrategy {
        SeqStrategy { player: x.player - 1, mass: x.mass.clone() }
    }

    /// The same strategy as a player of the augmented game.
    pub fn to_augmented(&self, x: &SeqStrategy) -> SeqStrategy {
        SeqStrategy { player: x.player + 1, mass: x.mass.clone() }
    }
}

/// The game faced by the base players when the mediator's moves are drawn
/// from `mu`. Terminals, infosets and sequences keep the augmented layout,
/// with every player index shifted down by one.
pub fn fix_mediator(aug: &AugmentedGame, mu: &SeqStrategy) -> Result<GameTree, MediatorError> {
    let g = &aug.game;
    let tp0 = g.treeplex(0);
    if mu.player != 0 || mu.mass.len() != tp0.num_sequences() {
        return Err(MediatorError::BadStrategy("mediator strategy has the wrong shape".into()));
    }
    mu.check(tp0, 1e-9).map_err(MediatorError::BadStrategy)?;
    let n = aug.num_base_players();
    let mut b = TreeBuilder::new(n);
    let mut map: Vec<NodeId> = vec![0; g.num_nodes()];
    for (id, node) in g.nodes().iter().enumerate() {
        let parent = node.parent.map(|p| map[p]);
        let raw = match &node.kind {
            NodeKind::Chance { probs } => RawNode::Chance { labels: node.labels.clone(), probs: probs.clone() },
            NodeKind::Decision { player: 0, infoset } => {
                let local = g.infosets()[*infoset].local;
                let mut probs = mu.behavior_at(tp0, local);
                let s: f64 = probs.iter().sum();
                probs.iter_mut().for_each(|p| *p = p.max(0.0) / s);
                RawNode::Chance { labels: node.labels.clone(), probs }
            }
            NodeKind::Decision { player, infoset } => {
                let info = &g.infosets()[*infoset];
                RawNode::Decision { player: player - 1, infoset: info.key.clone(), actions: info.actions.clone() }
            }
            NodeKind::Terminal { index } => {
                RawNode::Terminal { utilities: (1..=n).map(|i| g.utility(*index, i)).collect() }
            }
        };
        map[id] = b.push(parent, raw);
    }
    let mut fixed = b.finish(crate::game::Normalization::identity());
    fixed.normalization = aug.base.normalization();
    let violations = fixed.validate();
    if !violations.is_empty() {
        return Err(GameError::Invalid(violations).into());
    }
    Ok(fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{coordination, lower_bound, normal_form, stag_hunt, STAG};
    use crate::game::{expected_utility, is_nash, reach_products};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_decision_gadget() {
        let mut b = TreeBuilder::new(1);
        let r = b.decision(None, 0, "I", &["a", "b", "c"]);
        for k in 0..3 {
            b.terminal(Some(r), &[k as f64 / 2.0]);
        }
        let base = b.finish(crate::game::Normalization::identity());
        let aug = augment(&base).unwrap();
        assert_eq!(aug.game.num_terminals(), 9);
        let d = aug.direct_strategy(0);
        let tp = aug.game.treeplex(1);
        for (k, &g) in tp.infosets.iter().enumerate() {
            let r = aug.recommendation(g).unwrap();
            assert_eq!(d.mass[tp.seq(k, r)], 1.0);
        }
        let mu = SeqStrategy::uniform(aug.game.treeplex(0));
        let fixed = fix_mediator(&aug, &mu).unwrap();
        let NodeKind::Chance { probs } = &fixed.nodes()[0].kind else { panic!() };
        assert_eq!(probs, &vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn sizes_and_utilities_preserved() {
        for base in [stag_hunt(), coordination(), lower_bound(3)] {
            let aug = augment(&base).unwrap();
            let zb = base.num_terminals();
            assert!(aug.game.num_terminals() <= zb * zb * zb);
            for (z, id) in aug.identity.iter().enumerate() {
                assert_eq!(aug.game.utility(z, 0), 0.0);
                for i in 0..base.num_players() {
                    assert_eq!(aug.game.utility(z, i + 1), base.utility(id.base, i));
                }
                assert!(id.deviations.len() <= 2);
            }
            assert!(aug.game.treeplex(0).infosets.iter().all(|&g| aug.game.infosets()[g].nodes.len() == 1));
        }
        assert!(augment(&stag_hunt()).unwrap().game.num_terminals() <= 125);
    }

    #[test]
    fn direct_play_reaches_undeviated_terminals() {
        let base = lower_bound(3);
        let aug = augment(&base).unwrap();
        let mut profile = vec![SeqStrategy::uniform(aug.game.treeplex(0))];
        profile.extend(aug.direct_profile());
        let players: Vec<usize> = (1..=3).collect();
        let reach = reach_products(&aug.game, &profile, &players).unwrap();
        for (z, id) in aug.identity.iter().enumerate() {
            let direct = reach[z] == 1.0;
            assert_eq!(direct, id.deviations.is_empty(), "terminal {z}");
        }
        for x in aug.direct_profile() {
            assert!(x.is_pure(0.0));
            x.check(aug.game.treeplex(x.player), 1e-12).unwrap();
        }
    }

    #[test]
    fn recommending_a_nash_profile() {
        let base = stag_hunt();
        let aug = augment(&base).unwrap();
        let stag: Vec<Vec<usize>> = (0..2).map(|i| vec![STAG; base.treeplex(i).num_infosets()]).collect();
        let mu = aug.recommend_plan(&stag);
        let fixed = fix_mediator(&aug, &mu).unwrap();
        let d: Vec<SeqStrategy> = aug.direct_profile().iter().map(|x| aug.to_fixed(x)).collect();
        assert!(is_nash(&fixed, &d, 1e-12));
        let base_d = crate::benchmarks::stag_hunt_target(&base);
        for i in 0..2 {
            let want = expected_utility(&base, &base_d, i, None).unwrap();
            assert!((expected_utility(&fixed, &d, i, None).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_game_matches_augmented_utilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for base in [stag_hunt(), lower_bound(2)] {
            let aug = augment(&base).unwrap();
            for _ in 0..50 {
                let mu = SeqStrategy::random(aug.game.treeplex(0), &mut rng);
                let fixed = fix_mediator(&aug, &mu).unwrap();
                let xs: Vec<SeqStrategy> =
                    (1..aug.game.num_players()).map(|p| SeqStrategy::random(aug.game.treeplex(p), &mut rng)).collect();
                let mut full = vec![mu.clone()];
                full.extend(xs.iter().cloned());
                let fixed_profile: Vec<SeqStrategy> = xs.iter().map(|x| aug.to_fixed(x)).collect();
                for i in 0..base.num_players() {
                    let a = expected_utility(&aug.game, &full, i + 1, None).unwrap();
                    let b = expected_utility(&fixed, &fixed_profile, i, None).unwrap();
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn recommendations_stop_after_two_deviators() {
        // Three players act in sequence, then player 0 acts again.
        let base = normal_form(&[vec!["a", "b"], vec!["a", "b"], vec!["a", "b"]], |_| vec![0.5; 3]);
        let aug = augment(&base).unwrap();
        let two_deviators = aug.identity.iter().filter(|id| id.deviations.len() == 2).count();
        assert!(two_deviators > 0);
        let unrecommended = aug.game.infosets().iter().enumerate().filter(|(g, info)| info.player != 0 && aug.recommendation(*g).is_none()).count();
        assert!(unrecommended > 0);
    }
}
