use num_rational::BigRational;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Action, Game, Player, State};

/// Shape of the generated games.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub min_states: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub max_successors: usize,
    /// Largest integer weight; probabilities are weights over their sum.
    pub max_weight: u32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_states: 3,
            max_states: 6,
            max_actions: 3,
            max_successors: 3,
            max_weight: 4,
        }
    }
}

/// What kind of game `index` is: odd indices get an injected end component,
/// indices with bit 1 set give every state a first action touching a target.
pub fn flavour(index: u64) -> (bool, bool) {
    (index % 2 == 1, (index >> 1) % 2 == 1)
}

/// Game number `index` of the stream for `seed`.
pub fn random_game(seed: u64, index: u64, config: &GeneratorConfig) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let (inject_ec, forced_reach) = flavour(index);

    let n = rng.random_range(config.min_states..=config.max_states);
    let n_targets = rng.random_range(1..=2.min(n - 1));
    let targets: Vec<usize> = sample(&mut rng, n, n_targets).into_vec();
    let is_target = |s: usize| targets.contains(&s);

    let random_action = |rng: &mut ChaCha8Rng, label: String, extra: Option<usize>| {
        let k = rng.random_range(1..=config.max_successors.min(n));
        let mut succ: Vec<usize> = sample(rng, n, k).into_vec();
        if let Some(t) = extra {
            if !succ.contains(&t) {
                succ[0] = t;
            }
        }
        weighted(rng, label, &succ, config.max_weight)
    };

    let mut states: Vec<State> = (0..n)
        .map(|s| {
            let owner = if rng.random_bool(0.5) { Player::Max } else { Player::Min };
            let k = rng.random_range(1..=config.max_actions);
            let actions = (0..k)
                .map(|a| {
                    let extra = (forced_reach && a == 0 && !is_target(s)).then(|| targets[rng.random_range(0..n_targets)]);
                    random_action(&mut rng, format!("a{a}"), extra)
                })
                .collect();
            let state = State::new(owner, actions);
            if is_target(s) {
                state.target()
            } else {
                state
            }
        })
        .collect();

    if inject_ec {
        let candidates: Vec<usize> = (0..n).filter(|&s| !is_target(s)).collect();
        let size = rng.random_range(1..=candidates.len().min(3));
        let picked: Vec<usize> = sample(&mut rng, candidates.len(), size)
            .into_iter()
            .map(|i| candidates[i])
            .collect();
        // A cycle of deterministic moves through the picked states.
        for (i, &s) in picked.iter().enumerate() {
            let next = picked[(i + 1) % picked.len()];
            let action = Action::to_state("ec", next);
            let actions = &mut states[s].actions;
            if actions.len() < config.max_actions {
                actions.push(action);
            } else {
                let last = actions.len() - 1;
                actions[last] = action;
            }
        }
    }

    Game::new(states).with_initial(0)
}

fn weighted(rng: &mut ChaCha8Rng, label: String, succ: &[usize], max_weight: u32) -> Action {
    let weights: Vec<u32> = succ.iter().map(|_| rng.random_range(1..=max_weight)).collect();
    let total: u32 = weights.iter().sum();
    Action::new(
        label,
        succ.iter()
            .zip(&weights)
            .map(|(&t, &w)| (t, BigRational::new(w.into(), total.into()))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn generated_games_are_valid_and_reproducible() {
        let config = GeneratorConfig::default();
        for i in 0..200 {
            let game = random_game(7, i, &config);
            assert!(validate(&game).is_empty(), "{i}: {:?}", validate(&game));
            assert!((3..=6).contains(&game.len()));
            assert!(game.states.iter().all(|s| (1..=3).contains(&s.actions.len())));
            assert!(!game.targets().is_empty());
            assert_eq!(game, random_game(7, i, &config));
        }
        assert_ne!(random_game(7, 0, &config), random_game(8, 0, &config));
    }
}
