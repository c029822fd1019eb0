use super::scc::decompose;
use super::{set_to_mask, SubgameView};
use crate::model::{Game, StateSet};

/// A maximal end component together with the actions that keep play inside
/// it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mec {
    /// Sorted.
    pub states: Vec<usize>,
    /// `(state, retained action indices)` for every state of the MEC.
    pub actions: Vec<(usize, Vec<usize>)>,
}

impl Mec {
    pub fn contains(&self, s: usize) -> bool {
        self.states.binary_search(&s).is_ok()
    }

    pub fn state_set(&self) -> StateSet {
        self.states.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MecList {
    pub mecs: Vec<Mec>,
}

impl MecList {
    pub fn is_empty(&self) -> bool {
        self.mecs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.mecs.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Mec> {
        self.mecs.iter()
    }
}

/// All MECs contained in `restrict_to`.
pub fn mec_decomposition(game: &Game, restrict_to: &StateSet) -> MecList {
    let members = set_to_mask(restrict_to, game.len());
    mecs_in_view(game, SubgameView::restrict(game, &members))
}

/// MECs of a sub-game: alternately split into SCCs, drop actions that leave
/// their SCC and drop states without actions, until nothing changes.
pub fn mecs_in_view(game: &Game, mut view: SubgameView) -> MecList {
    let n = game.len();
    loop {
        let scc = {
            let view = &view;
            decompose(n, &view.members, |s, out| {
                for &a in &view.enabled[s] {
                    out.extend(game.actions(s)[a].successors());
                }
            })
        };
        let mut changed = false;
        for s in 0..n {
            if !view.members[s] {
                continue;
            }
            let home = scc.component_of[s];
            let before = view.enabled[s].len();
            let members = &view.members;
            view.enabled[s].retain(|&a| {
                game.actions(s)[a]
                    .successors()
                    .all(|t| members[t] && scc.component_of[t] == home)
            });
            changed |= view.enabled[s].len() != before;
        }
        for s in 0..n {
            if view.members[s] && view.enabled[s].is_empty() {
                view.members[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut mecs: Vec<Mec> = scc
                .components
                .into_iter()
                .filter(|states| states.iter().all(|&s| view.members[s]))
                .map(|states| Mec {
                    actions: states.iter().map(|&s| (s, view.enabled[s].clone())).collect(),
                    states,
                })
                .collect();
            mecs.sort_by_key(|m| m.states[0]);
            return MecList { mecs };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ratio, Action, Player, State};

    #[test]
    fn trivial_maximizer_ec() {
        // s: a self-loop, b splits between target 1 and sink 2.
        let game = Game::new(vec![
            State::new(
                Player::Max,
                vec![Action::to_state("a", 0), Action::new("b", [(1, ratio(1, 2)), (2, ratio(1, 2))])],
            ),
            State::new(Player::Max, vec![Action::to_state("loop", 1)]).target(),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]),
        ]);
        let mecs = mec_decomposition(&game, &StateSet::from([0]));
        assert_eq!(
            mecs.mecs,
            vec![Mec {
                states: vec![0],
                actions: vec![(0, vec![0])]
            }]
        );
    }

    #[test]
    fn acyclic_game_has_no_mecs() {
        let game = Game::new(vec![
            State::new(Player::Max, vec![Action::to_state("a", 1), Action::to_state("b", 2)]),
            State::new(Player::Min, vec![Action::to_state("a", 2)]),
            State::new(Player::Max, vec![Action::to_state("a", 3)]),
            State::new(Player::Max, vec![Action::to_state("a", 3)]).target(),
        ]);
        assert!(mec_decomposition(&game, &StateSet::from([0, 1, 2])).is_empty());
    }

    #[test]
    fn probabilistic_leak_splits_scc() {
        // 0 <-> 1 deterministic, but 1's only way back is a coin flip that
        // may leave to 2: {0,1} is an SCC of the restricted graph but not an EC.
        let game = Game::new(vec![
            State::new(Player::Max, vec![Action::to_state("a", 1)]),
            State::new(Player::Max, vec![Action::new("a", [(0, ratio(1, 2)), (2, ratio(1, 2))])]),
            State::new(Player::Max, vec![Action::to_state("a", 2)]),
        ]);
        assert!(mec_decomposition(&game, &StateSet::from([0, 1])).is_empty());
        let all = mec_decomposition(&game, &StateSet::from([0, 1, 2]));
        assert_eq!(all.len(), 1);
        assert_eq!(all.mecs[0].states, vec![2]);
    }
}
