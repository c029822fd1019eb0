//! State and single steps of sound value iteration.
//!
//! Per state the iteration tracks `reach` (probability of having reached the
//! target within `k` steps under the current strategies) and `stay`
//! (probability of still being among the unknown states after `k` steps).
//! Bounds `l ≤ V ≤ u` on the values of unknown states turn these into
//! per-state bounds `reach + stay·l ≤ V(s) ≤ reach + stay·u`.
//!
//! The bounds live in [`BoundGroup`]s. Plain SVI uses one group holding every
//! unknown state; the topological variant uses one group per SCC whose bound
//! candidates only range over states reachable from it.

use crate::graph::{reachable_from, sccs, set_to_mask};
use crate::model::{Game, Player, StatePartition};

use super::bes::BestExitSet;
use super::{SolveOptions, Stopping};

/// How an unknown state moved in the last iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Choice {
    /// Optimizer of the k-step objective.
    Optimal(usize),
    /// Best exit of an end component.
    Forced(usize),
    /// The candidate action was rejected and the state kept its values.
    Delay(usize),
}

impl Choice {
    /// The regular action behind the choice (the rejected candidate for a
    /// delay).
    pub fn action(self) -> usize {
        match self {
            Choice::Optimal(a) | Choice::Forced(a) | Choice::Delay(a) => a,
        }
    }

    pub fn is_delay(self) -> bool {
        matches!(self, Choice::Delay(_))
    }

    pub fn is_forced(self) -> bool {
        matches!(self, Choice::Forced(_))
    }
}

/// A bound pair with its decision values, shared by `members`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundGroup {
    pub members: Vec<usize>,
    /// States whose `reach/(1-stay)` ratios enter the bound update.
    pub range: Vec<usize>,
    pub lower: f64,
    pub upper: f64,
    /// `+∞` until some minimizer state produces a crossing point.
    pub decval_lower: f64,
    /// `-∞` until some maximizer state produces a crossing point.
    pub decval_upper: f64,
    pub frozen: bool,
}

impl BoundGroup {
    fn new(members: Vec<usize>, range: Vec<usize>) -> Self {
        BoundGroup {
            members,
            range,
            lower: 0.0,
            upper: 1.0,
            decval_lower: f64::INFINITY,
            decval_upper: f64::NEG_INFINITY,
            frozen: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub k: u64,
    pub reach: Vec<f64>,
    pub stay: Vec<f64>,
    /// Current membership in S?; shrinks when trap components are found.
    pub unknown: Vec<bool>,
    /// In processing order (downstream groups first).
    pub groups: Vec<BoundGroup>,
    pub group_of: Vec<Option<usize>>,
    pub chosen: Vec<Option<Choice>>,
    /// Whether the state played the delay action in the last iteration.
    pub delayed: Vec<bool>,
}

impl IterationState {
    fn with_groups(game: &Game, partition: &StatePartition, groups: Vec<BoundGroup>) -> Self {
        let n = game.len();
        let mut reach = vec![0.0; n];
        let mut stay = vec![0.0; n];
        for &f in &partition.targets {
            reach[f] = 1.0;
        }
        for &s in &partition.unknown {
            stay[s] = 1.0;
        }
        let mut group_of = vec![None; n];
        for (g, group) in groups.iter().enumerate() {
            for &s in &group.members {
                group_of[s] = Some(g);
            }
        }
        IterationState {
            k: 0,
            reach,
            stay,
            unknown: partition.unknown_mask(n),
            groups,
            group_of,
            chosen: vec![None; n],
            delayed: vec![false; n],
        }
    }

    pub fn group(&self, s: usize) -> Option<&BoundGroup> {
        self.group_of[s].map(|g| &self.groups[g])
    }

    /// Lower bound applying to `s` (0 outside S?).
    pub fn lower(&self, s: usize) -> f64 {
        self.group(s).map_or(0.0, |g| g.lower)
    }

    /// Upper bound applying to `s` (0 outside S?, where `stay` is 0 anyway).
    pub fn upper(&self, s: usize) -> f64 {
        self.group(s).map_or(0.0, |g| g.upper)
    }

    pub fn unknown_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.unknown.iter().enumerate().filter(|(_, &u)| u).map(|(s, _)| s)
    }

    /// `reach + stay·u` for every state.
    /// `reach + stay·u`, clamped to 1 against round-off.
    pub fn over_approximation(&self) -> Vec<f64> {
        (0..self.reach.len())
            .map(|s| (self.reach[s] + self.stay[s] * self.upper(s)).min(1.0))
            .collect()
    }

    pub fn under_approximation(&self) -> Vec<f64> {
        (0..self.reach.len())
            .map(|s| (self.reach[s] + self.stay[s] * self.lower(s)).min(1.0))
            .collect()
    }

    /// Moves `states` to the sinks.
    pub fn make_sinks(&mut self, states: impl IntoIterator<Item = usize>) {
        for s in states {
            self.unknown[s] = false;
            self.reach[s] = 0.0;
            self.stay[s] = 0.0;
            self.chosen[s] = None;
            self.delayed[s] = false;
        }
        let unknown = &self.unknown;
        for group in &mut self.groups {
            group.members.retain(|&s| unknown[s]);
            group.range.retain(|&s| unknown[s]);
        }
        for s in 0..self.group_of.len() {
            if !self.unknown[s] {
                self.group_of[s] = None;
            }
        }
    }
}

/// Initial vectors with a single bound shared by all of S?.
pub fn init_iteration(game: &Game, partition: &StatePartition) -> IterationState {
    let unknown: Vec<usize> = partition.unknown.iter().copied().collect();
    let groups = if unknown.is_empty() {
        Vec::new()
    } else {
        vec![BoundGroup::new(unknown.clone(), unknown)]
    };
    IterationState::with_groups(game, partition, groups)
}

/// Initial vectors with one bound per SCC of S?, in reverse topological
/// order. Each SCC's bound ranges over the unknown states reachable from it.
pub fn init_topological(game: &Game, partition: &StatePartition) -> IterationState {
    let n = game.len();
    let unknown = set_to_mask(&partition.unknown, n);
    let decomposition = sccs(game, &partition.unknown);
    let groups = decomposition
        .components
        .into_iter()
        .map(|members| {
            let mut reach = vec![false; n];
            for &s in &members {
                if !reach[s] {
                    for t in reachable_from(game, s) {
                        reach[t] = true;
                    }
                }
            }
            let range = (0..n).filter(|&t| reach[t] && unknown[t]).collect();
            BoundGroup::new(members, range)
        })
        .collect();
    IterationState::with_groups(game, partition, groups)
}

/// Expected `reach + stay·bound` after playing `a` in `s`.
fn score(game: &Game, s: usize, a: usize, it: &IterationState, bound: f64) -> f64 {
    game.actions(s)[a]
        .transitions
        .iter()
        .map(|t| t.prob * (it.reach[t.to] + it.stay[t.to] * bound))
        .sum()
}

/// The action `s` plays next: its best exit when one is forced, otherwise the
/// optimizer of the k-step objective (maximizer against `u`, minimizer
/// against `l`), lowest index on ties.
pub fn candidate_action(game: &Game, s: usize, it: &IterationState, bes: Option<&BestExitSet>) -> Choice {
    if let Some(a) = bes.and_then(|b| b.forced_action(s)) {
        return Choice::Forced(a);
    }
    let owner = game.owner(s);
    let bound = match owner {
        Player::Max => it.upper(s),
        Player::Min => it.lower(s),
    };
    let mut best = 0;
    let mut best_score = score(game, s, 0, it, bound);
    for a in 1..game.actions(s).len() {
        let v = score(game, s, a, it, bound);
        let better = match owner {
            Player::Max => v > best_score,
            Player::Min => v < best_score,
        };
        if better {
            best = a;
            best_score = v;
        }
    }
    Choice::Optimal(best)
}

/// `(Σ δ(s,a,s')·reach_{s'}, Σ δ(s,a,s')·stay_{s'})` over the current vectors.
pub fn bellman_candidate(game: &Game, s: usize, a: usize, it: &IterationState) -> (f64, f64) {
    let action = &game.actions(s)[a];
    (action.expect(&it.reach), action.expect(&it.stay))
}

/// Round-off allowed before a rise of `reach + stay·u` counts. Without it a
/// state sitting exactly at its fixpoint can be delayed forever over one ulp,
/// which also blocks every later bound update.
pub const DELAY_SLACK: f64 = 1e-12;

/// New `(reach, stay)` for `s` after `choice`. With `delay_guard` set, a
/// maximizer state whose candidate would raise `reach + stay·u` keeps its
/// current values and is reported as delayed.
pub fn apply_update(game: &Game, s: usize, it: &IterationState, choice: Choice, delay_guard: bool) -> (f64, f64, Choice) {
    let (reach, stay) = bellman_candidate(game, s, choice.action(), it);
    if delay_guard && game.owner(s) == Player::Max {
        let u = it.upper(s);
        if reach + stay * u > it.reach[s] + it.stay[s] * u + DELAY_SLACK {
            return (it.reach[s], it.stay[s], Choice::Delay(choice.action()));
        }
    }
    (reach, stay, choice)
}

/// Crossing points of the chosen actions against every competitor with a
/// smaller staying probability, folded into the group's decision values.
///
/// `choices` holds the choices made this iteration for (some of) the
/// group's members; the vectors in `it` must still be the ones the choices
/// were computed from. Delayed and forced states are skipped.
pub fn update_decision_values(game: &Game, it: &IterationState, group: usize, choices: &[(usize, Choice)]) -> (f64, f64) {
    let g = &it.groups[group];
    let mut lower = g.decval_lower;
    let mut upper = g.decval_upper;
    for &(s, choice) in choices {
        let Choice::Optimal(alpha) = choice else {
            continue;
        };
        let actions = game.actions(s);
        let (reach_alpha, stay_alpha) = bellman_candidate(game, s, alpha, it);
        for beta in 0..actions.len() {
            if beta == alpha {
                continue;
            }
            let (reach_beta, stay_beta) = bellman_candidate(game, s, beta, it);
            let delta_stay = stay_alpha - stay_beta;
            if delta_stay <= 0.0 {
                continue;
            }
            let crossing = (reach_beta - reach_alpha) / delta_stay;
            match game.owner(s) {
                Player::Max => upper = upper.max(crossing),
                Player::Min => lower = lower.min(crossing),
            }
        }
    }
    (lower, upper)
}

/// New `(l, u)` for a group from the geometric-series ratios of its range,
/// capped by the decision values. Unchanged while some state in the range
/// still has `stay = 1` or (with `block_on_delay`) was delayed.
pub fn update_global_bounds(it: &IterationState, group: usize, block_on_delay: bool) -> (f64, f64) {
    let g = &it.groups[group];
    let blocked = g
        .range
        .iter()
        .any(|&s| it.stay[s] >= 1.0 || (block_on_delay && it.delayed[s]));
    if blocked || g.range.is_empty() {
        return (g.lower, g.upper);
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for &s in &g.range {
        let ratio = it.reach[s] / (1.0 - it.stay[s]);
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    // f64::min/max ignore the infinite sentinels the right way round.
    let upper = g.upper.min(max_ratio.max(g.decval_upper));
    // Ratios of states with equal values may round to either side.
    let lower = g.lower.max(min_ratio.min(g.decval_lower)).min(upper);
    (lower, upper)
}

/// `stay·(u-l) < 2ε` on every unknown state, or the relative variant
/// dividing by `reach + stay·u`.
pub fn check_termination(it: &IterationState, options: &SolveOptions) -> bool {
    let threshold = 2.0 * options.epsilon;
    it.unknown_states().all(|s| {
        let gap = it.stay[s] * (it.upper(s) - it.lower(s));
        let measure = match options.stopping {
            Stopping::Absolute => gap,
            Stopping::Relative => {
                let scale = it.reach[s] + it.stay[s] * it.upper(s);
                if gap == 0.0 {
                    0.0
                } else {
                    gap / scale
                }
            }
        };
        measure < threshold
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::compute_partition;
    use crate::model::{ratio, Action, State};

    /// Maximizer state 0 with a leaky self-loop `a` and a plain exit `b`.
    fn two_actions() -> Game {
        Game::new(vec![
            State::new(
                Player::Max,
                vec![
                    Action::new("a", [(0, ratio(3, 5)), (1, ratio(1, 5)), (2, ratio(1, 5))]),
                    Action::new("b", [(1, ratio(2, 5)), (2, ratio(3, 5))]),
                ],
            ),
            State::new(Player::Max, vec![Action::to_state("loop", 1)]).target(),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]),
        ])
    }

    #[test]
    fn init_vectors() {
        let game = two_actions();
        let it = init_iteration(&game, &compute_partition(&game));
        assert_eq!(it.reach, vec![0.0, 1.0, 0.0]);
        assert_eq!(it.stay, vec![1.0, 0.0, 0.0]);
        assert_eq!((it.lower(0), it.upper(0)), (0.0, 1.0));
        assert_eq!(it.groups[0].decval_upper, f64::NEG_INFINITY);
        assert_eq!(it.groups[0].decval_lower, f64::INFINITY);
    }

    #[test]
    fn single_action_contributes_no_crossing() {
        let game = Game::new(vec![
            State::new(Player::Max, vec![Action::new("a", [(0, ratio(1, 2)), (1, ratio(1, 2))])]),
            State::new(Player::Max, vec![Action::to_state("loop", 1)]).target(),
        ]);
        let it = init_iteration(&game, &compute_partition(&game));
        let dv = update_decision_values(&game, &it, 0, &[(0, Choice::Optimal(0))]);
        assert_eq!(dv, (f64::INFINITY, f64::NEG_INFINITY));
    }

    #[test]
    fn crossing_point_formula() {
        let game = two_actions();
        let mut it = init_iteration(&game, &compute_partition(&game));
        // Successor values chosen so that α = a yields (0.2, 0.6) and β = b
        // yields (0.4, 0.1):  Δ_stay = 0.5, crossing = 0.2 / 0.5 = 0.4.
        it.reach = vec![0.0, 1.0, 0.0];
        it.stay = vec![1.0, 0.0, 0.0];
        let game = Game::new(vec![
            State::new(
                Player::Max,
                vec![
                    Action::new("a", [(0, ratio(3, 5)), (1, ratio(1, 5)), (2, ratio(1, 5))]),
                    Action::new("b", [(0, ratio(1, 10)), (1, ratio(2, 5)), (2, ratio(1, 2))]),
                ],
            ),
            game.states[1].clone(),
            game.states[2].clone(),
        ]);
        assert_eq!(bellman_candidate(&game, 0, 0, &it), (0.2, 0.6));
        let (_, upper) = update_decision_values(&game, &it, 0, &[(0, Choice::Optimal(0))]);
        assert!((upper - 0.4).abs() < 1e-15, "{upper}");
    }

    #[test]
    fn nonpositive_stay_difference_leaves_decision_value() {
        let game = two_actions();
        let it = init_iteration(&game, &compute_partition(&game));
        // b stays less than a, so choosing b gives Δ_stay < 0 against a.
        let dv = update_decision_values(&game, &it, 0, &[(0, Choice::Optimal(1))]);
        assert_eq!(dv.1, f64::NEG_INFINITY);
    }

    #[test]
    fn bounds_stuck_while_some_state_stays() {
        let game = two_actions();
        let it = init_iteration(&game, &compute_partition(&game));
        assert_eq!(update_global_bounds(&it, 0, true), (0.0, 1.0));
    }

    #[test]
    fn termination_edge_cases() {
        let game = two_actions();
        let mut it = init_iteration(&game, &compute_partition(&game));
        let opts = SolveOptions::default();
        assert!(!check_termination(&it, &opts));
        it.groups[0].lower = 0.3;
        it.groups[0].upper = 0.3;
        assert!(check_termination(&it, &opts));
        it.groups[0].lower = 0.0;
        it.groups[0].upper = 1.0;
        it.stay[0] = 0.0;
        assert!(check_termination(&it, &opts));
        let relative = SolveOptions {
            stopping: Stopping::Relative,
            ..opts
        };
        it.reach[0] = 0.0;
        assert!(check_termination(&it, &relative));
    }
}
