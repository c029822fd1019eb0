//! Structural analysis of games: the target/sink/unknown partition, strongly
//! connected components, maximal end components and reachability.
//!
//! Every graph notion here is strategy-agnostic: an edge `s → s'` exists when
//! some action of `s` (of either player) reaches `s'` with positive
//! probability.

mod mec;
mod scc;

use std::collections::VecDeque;

use crate::model::{Game, StatePartition, StateSet};

pub use mec::{mec_decomposition, mecs_in_view, Mec, MecList};
pub use scc::{sccs, SccDecomposition};

/// Splits the states into targets, sinks (no path to a target) and the rest.
pub fn compute_partition(game: &Game) -> StatePartition {
    let n = game.len();
    let mut preds = vec![Vec::new(); n];
    for s in 0..n {
        for t in game.successors(s) {
            preds[t].push(s);
        }
    }
    let targets = game.targets();
    let mut can_reach = vec![false; n];
    let mut queue: VecDeque<usize> = targets.iter().copied().collect();
    for &f in &targets {
        can_reach[f] = true;
    }
    while let Some(t) = queue.pop_front() {
        for &p in &preds[t] {
            if !can_reach[p] {
                can_reach[p] = true;
                queue.push_back(p);
            }
        }
    }
    let mut partition = StatePartition {
        targets,
        ..Default::default()
    };
    for s in 0..n {
        if partition.targets.contains(&s) {
            continue;
        }
        if can_reach[s] {
            partition.unknown.insert(s);
        } else {
            partition.sinks.insert(s);
        }
    }
    partition
}

/// Forward-reachable states from `s` under all actions, including `s`.
pub fn reachable_from(game: &Game, s: usize) -> StateSet {
    let mut seen = vec![false; game.len()];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for y in game.successors(x) {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    mask_to_set(&seen)
}

/// A sub-game: a membership mask plus, per member, the action indices that
/// stay inside the members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgameView {
    pub members: Vec<bool>,
    pub enabled: Vec<Vec<usize>>,
}

impl SubgameView {
    /// Restricts `game` to the states in `members`, keeping only actions whose
    /// successors all lie in `members`. States left without actions are
    /// dropped (a single pass; actions into them are not revisited).
    pub fn restrict(game: &Game, members: &[bool]) -> Self {
        let n = game.len();
        let mut view = SubgameView {
            members: members.to_vec(),
            enabled: vec![Vec::new(); n],
        };
        for s in 0..n {
            if !view.members[s] {
                continue;
            }
            view.enabled[s] = game
                .actions(s)
                .iter()
                .enumerate()
                .filter(|(_, a)| a.successors().all(|t| members[t]))
                .map(|(i, _)| i)
                .collect();
        }
        for s in 0..n {
            if view.members[s] && view.enabled[s].is_empty() {
                view.members[s] = false;
            }
        }
        view
    }

    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(s, _)| s)
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }
}

/// The game without the `removed` states and without every action that can
/// reach one of them.
pub fn induced_subgame(game: &Game, removed: &StateSet) -> SubgameView {
    let mut members = vec![true; game.len()];
    for &s in removed {
        members[s] = false;
    }
    SubgameView::restrict(game, &members)
}

pub(crate) fn set_to_mask(set: &StateSet, n: usize) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &s in set {
        mask[s] = true;
    }
    mask
}

pub(crate) fn mask_to_set(mask: &[bool]) -> StateSet {
    mask.iter().enumerate().filter(|(_, &m)| m).map(|(s, _)| s).collect()
}
