//! Turn-based stochastic games: data model, file format and normalization.
//!
//! A game is a list of states. Every state belongs to one of the two players,
//! may be a target, and offers a non-empty list of actions; every action is a
//! probability distribution over successor states. Probabilities are kept both
//! as exact rationals (for validation and the exact oracle) and as `f64`
//! (for the iterative solvers).

mod parse;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

pub use parse::{parse_model, parse_probability, serialize_model};
pub use validate::validate;

/// Ordered set of state indices.
pub type StateSet = BTreeSet<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Max,
    Min,
}

impl Player {
    pub fn as_str(self) -> &'static str {
        match self {
            Player::Max => "max",
            Player::Min => "min",
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One edge of an action's distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub to: usize,
    pub exact: BigRational,
    /// `exact` rounded to the nearest `f64`.
    pub prob: f64,
}

impl Transition {
    pub fn new(to: usize, exact: BigRational) -> Self {
        let prob = ratio_to_f64(&exact);
        Transition { to, exact, prob }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub label: String,
    pub transitions: Vec<Transition>,
}

impl Action {
    /// Builds an action from `(successor, probability)` pairs. Transitions are
    /// sorted by successor index.
    pub fn new<I>(label: impl Into<String>, transitions: I) -> Self
    where
        I: IntoIterator<Item = (usize, BigRational)>,
    {
        let mut transitions: Vec<Transition> = transitions
            .into_iter()
            .map(|(to, p)| Transition::new(to, p))
            .collect();
        transitions.sort_by_key(|t| t.to);
        Action {
            label: label.into(),
            transitions,
        }
    }

    /// Deterministic move to `to`.
    pub fn to_state(label: impl Into<String>, to: usize) -> Self {
        Action::new(label, [(to, BigRational::one())])
    }

    pub fn successors(&self) -> impl Iterator<Item = usize> + '_ {
        self.transitions.iter().map(|t| t.to)
    }

    /// `Σ δ(s,a,s')·values[s']` in floating point.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.transitions.iter().map(|t| t.prob * values[t.to]).sum()
    }

    pub fn is_self_loop(&self, s: usize) -> bool {
        self.transitions.len() == 1 && self.transitions[0].to == s && self.transitions[0].exact.is_one()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub owner: Player,
    pub target: bool,
    pub actions: Vec<Action>,
}

impl State {
    pub fn new(owner: Player, actions: Vec<Action>) -> Self {
        State {
            owner,
            target: false,
            actions,
        }
    }

    pub fn target(mut self) -> Self {
        self.target = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Game {
    pub states: Vec<State>,
    /// Only used when reporting a single value (e.g. `compare`).
    pub initial: Option<usize>,
}

impl Game {
    pub fn new(states: Vec<State>) -> Self {
        Game {
            states,
            initial: None,
        }
    }

    pub fn with_initial(mut self, initial: usize) -> Self {
        self.initial = Some(initial);
        self
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn owner(&self, s: usize) -> Player {
        self.states[s].owner
    }

    pub fn actions(&self, s: usize) -> &[Action] {
        &self.states[s].actions
    }

    pub fn targets(&self) -> StateSet {
        (0..self.len()).filter(|&s| self.states[s].target).collect()
    }

    /// Successor states over all actions of `s`, deduplicated and sorted.
    pub fn successors(&self, s: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.states[s]
            .actions
            .iter()
            .flat_map(|a| a.successors())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Every target state gets a single probability-1 self-loop. A target
    /// that already has exactly that shape is left untouched, so the
    /// operation is idempotent.
    pub fn normalize(&self) -> Game {
        let mut game = self.clone();
        for (s, state) in game.states.iter_mut().enumerate() {
            if !state.target {
                continue;
            }
            if state.actions.len() == 1 && state.actions[0].is_self_loop(s) {
                continue;
            }
            state.actions = vec![Action::to_state("loop", s)];
        }
        game
    }

    /// Number of memoryless deterministic strategy profiles restricted to
    /// `states`, saturating at `u128::MAX`.
    pub fn profile_count<'a>(&self, states: impl IntoIterator<Item = &'a usize>) -> u128 {
        states.into_iter().fold(1u128, |acc, &s| {
            acc.saturating_mul(self.states[s].actions.len().max(1) as u128)
        })
    }
}

/// Standalone form of [`Game::normalize`].
pub fn normalize(game: &Game) -> Game {
    game.normalize()
}

/// `n/d` as a `BigRational`.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The F / Z / S? split of the state space.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StatePartition {
    pub targets: StateSet,
    pub sinks: StateSet,
    pub unknown: StateSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateClass {
    Target,
    Sink,
    Unknown,
}

impl StatePartition {
    pub fn class_of(&self, s: usize) -> StateClass {
        if self.targets.contains(&s) {
            StateClass::Target
        } else if self.sinks.contains(&s) {
            StateClass::Sink
        } else {
            StateClass::Unknown
        }
    }

    pub fn unknown_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &s in &self.unknown {
            mask[s] = true;
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_with_leaky_target() -> Game {
        Game::new(vec![
            State::new(Player::Max, vec![Action::to_state("go", 1)]),
            State::new(Player::Max, vec![Action::to_state("out", 2)]).target(),
            State::new(Player::Min, vec![Action::to_state("stay", 2)]),
        ])
    }

    #[test]
    fn normalize_makes_targets_absorbing() {
        let game = chain_with_leaky_target().normalize();
        let f = &game.states[1];
        assert_eq!(f.actions.len(), 1);
        assert!(f.actions[0].is_self_loop(1));
        assert_eq!(game.states[0], chain_with_leaky_target().states[0]);
        assert_eq!(game.states[2], chain_with_leaky_target().states[2]);
    }

    #[test]
    fn normalize_is_idempotent() {
        let once = chain_with_leaky_target().normalize();
        assert_eq!(once.normalize(), once);
    }

    #[test]
    fn absorbing_target_keeps_its_label() {
        let game = Game::new(vec![State::new(Player::Max, vec![Action::to_state("a", 0)]).target()]);
        assert_eq!(game.normalize(), game);
    }

    #[test]
    fn float_copy_matches_exact() {
        let t = Transition::new(0, ratio(1, 3));
        assert_eq!(t.prob, 1.0 / 3.0);
    }
}
