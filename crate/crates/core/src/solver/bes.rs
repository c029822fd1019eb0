//! Best exit sets of end components.
//!
//! For an end component `Y` and an over-approximation `f` of the value, the
//! best exits are the maximizer state-action pairs leaving `Y` whose expected
//! `f` is maximal. After removing the states of those pairs, the MECs left
//! inside `Y` are handled recursively, so every end component nested in `Y`
//! ends up with at least one recorded exit. A component without any
//! maximizer exit is a trap: the minimizer can keep play there forever, so
//! its states have value 0.

use std::collections::BTreeSet;

use crate::graph::{mecs_in_view, MecList, SubgameView};
use crate::model::{Game, Player, StateSet};

/// One end component visited by the recursion, with its best exits.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitComponent {
    pub states: Vec<usize>,
    pub exits: Vec<(usize, usize)>,
    pub best_value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BestExitSet {
    /// `(state, action index)` pairs.
    pub pairs: BTreeSet<(usize, usize)>,
    /// States of trap components found during the recursion.
    pub trap_states: StateSet,
    pub components: Vec<ExitComponent>,
}

impl BestExitSet {
    /// The lowest-index best-exit action of `s`, if `s` has one.
    pub fn forced_action(&self, s: usize) -> Option<usize> {
        self.pairs.range((s, 0)..=(s, usize::MAX)).next().map(|&(_, a)| a)
    }

    pub fn contains_state(&self, s: usize) -> bool {
        self.forced_action(s).is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.trap_states.is_empty()
    }
}

/// Runs the best-exit recursion on the end component `component`, adding its
/// results to `out`. Exit tests always refer to the full game.
pub fn best_exit_set(game: &Game, f: &[f64], component: &[usize], out: &mut BestExitSet) {
    let n = game.len();
    let mut inside = vec![false; n];
    for &s in component {
        inside[s] = true;
    }

    let mut best = f64::NEG_INFINITY;
    let mut exits: Vec<(usize, usize, f64)> = Vec::new();
    for &s in component {
        if game.owner(s) != Player::Max {
            continue;
        }
        for (a, action) in game.actions(s).iter().enumerate() {
            if action.successors().all(|t| inside[t]) {
                continue;
            }
            let value = action.expect(f);
            best = best.max(value);
            exits.push((s, a, value));
        }
    }

    if exits.is_empty() {
        out.trap_states.extend(component.iter().copied());
        return;
    }

    let chosen: Vec<(usize, usize)> = exits
        .iter()
        .filter(|&&(_, _, v)| v == best)
        .map(|&(s, a, _)| (s, a))
        .collect();
    for &(s, _) in &chosen {
        inside[s] = false;
    }
    out.pairs.extend(chosen.iter().copied());
    out.components.push(ExitComponent {
        states: component.to_vec(),
        exits: chosen,
        best_value: best,
    });

    let rest = mecs_in_view(game, SubgameView::restrict(game, &inside));
    for mec in rest.iter() {
        best_exit_set(game, f, &mec.states, out);
    }
}

/// Union of the best exit sets of all `mecs` under the valuation `f`.
pub fn compute_bes(game: &Game, mecs: &MecList, f: &[f64]) -> BestExitSet {
    let mut out = BestExitSet::default();
    for mec in mecs.iter() {
        best_exit_set(game, f, &mec.states, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::mec_decomposition;
    use crate::model::{ratio, Action, State};

    #[test]
    fn minimizer_only_component_is_a_trap() {
        // 0 (min) loops or goes to the target; 1 (min) mirrors it.
        let game = Game::new(vec![
            State::new(Player::Min, vec![Action::to_state("stay", 1), Action::to_state("leave", 2)]),
            State::new(Player::Min, vec![Action::to_state("back", 0)]),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]).target(),
        ]);
        let mecs = mec_decomposition(&game, &StateSet::from([0, 1]));
        let bes = compute_bes(&game, &mecs, &[1.0, 1.0, 1.0]);
        assert!(bes.pairs.is_empty());
        assert_eq!(bes.trap_states, StateSet::from([0, 1]));
    }

    #[test]
    fn ties_all_enter() {
        let game = Game::new(vec![
            State::new(
                Player::Max,
                vec![
                    Action::to_state("loop", 0),
                    Action::new("x", [(1, ratio(1, 2)), (2, ratio(1, 2))]),
                    Action::new("y", [(2, ratio(1, 2)), (1, ratio(1, 2))]),
                ],
            ),
            State::new(Player::Max, vec![Action::to_state("loop", 1)]).target(),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]),
        ]);
        let mecs = mec_decomposition(&game, &StateSet::from([0]));
        let bes = compute_bes(&game, &mecs, &[1.0, 1.0, 0.0]);
        assert_eq!(bes.pairs, BTreeSet::from([(0, 1), (0, 2)]));
        assert_eq!(bes.forced_action(0), Some(1));
    }

    #[test]
    fn nested_trap_found_after_removing_exit() {
        // 0 (min) may loop on itself or move to 1; 1 (max) returns to 0 or exits.
        let game = Game::new(vec![
            State::new(Player::Min, vec![Action::to_state("loop", 0), Action::to_state("go", 1)]),
            State::new(
                Player::Max,
                vec![Action::to_state("back", 0), Action::new("exit", [(2, ratio(1, 2)), (3, ratio(1, 2))])],
            ),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]).target(),
            State::new(Player::Max, vec![Action::to_state("loop", 3)]),
        ]);
        let mecs = mec_decomposition(&game, &StateSet::from([0, 1]));
        assert_eq!(mecs.len(), 1);
        let bes = compute_bes(&game, &mecs, &[1.0, 1.0, 1.0, 0.0]);
        assert_eq!(bes.pairs, BTreeSet::from([(1, 1)]));
        assert_eq!(bes.trap_states, StateSet::from([0]));
    }
}
