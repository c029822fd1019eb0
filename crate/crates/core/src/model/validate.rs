use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Game;

/// Lists every invariant violation of `game`; empty iff the game is valid.
pub fn validate(game: &Game) -> Vec<String> {
    let n = game.len();
    let mut out = Vec::new();
    if n == 0 {
        out.push("game has no states".to_string());
    }
    if let Some(init) = game.initial {
        if init >= n {
            out.push(format!("initial state {init} out of range"));
        }
    }
    for (s, state) in game.states.iter().enumerate() {
        if state.actions.is_empty() {
            out.push(format!("state {s}: no available actions"));
        }
        for action in &state.actions {
            let at = format!("state {s} action {}", action.label);
            if action.transitions.is_empty() {
                out.push(format!("{at}: empty distribution"));
                continue;
            }
            let mut seen = BTreeSet::new();
            let mut sum = BigRational::zero();
            let mut in_range = true;
            for t in &action.transitions {
                if t.to >= n {
                    out.push(format!("{at}: successor {} out of range", t.to));
                }
                if !seen.insert(t.to) {
                    out.push(format!("{at}: duplicate successor {}", t.to));
                }
                if !t.exact.is_positive() || t.exact > BigRational::one() {
                    in_range = false;
                }
                if !float_agrees(t.prob, &t.exact) {
                    out.push(format!("{at}: float probability {} disagrees with exact {}", t.prob, t.exact));
                }
                sum += &t.exact;
            }
            if !in_range {
                out.push(format!("{at}: probability out of range"));
            }
            if !sum.is_one() {
                out.push(format!("{at}: distribution sum is {sum}, expected 1"));
            }
        }
    }
    out
}

/// Within one unit in the last place of `prob`.
fn float_agrees(prob: f64, exact: &BigRational) -> bool {
    let Some(as_ratio) = BigRational::from_float(prob) else {
        return false;
    };
    let ulp = prob.abs().next_up() - prob.abs();
    let Some(ulp) = BigRational::from_float(ulp) else {
        return false;
    };
    (as_ratio - exact).abs() <= ulp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ratio, Action, Game, Player, State, Transition};

    #[test]
    fn empty_action_list() {
        let game = Game::new(vec![
            State::new(Player::Max, vec![Action::to_state("a", 0)]).target(),
            State::new(Player::Max, vec![Action::to_state("a", 0)]),
            State::new(Player::Min, vec![]),
        ]);
        assert_eq!(validate(&game), vec!["state 2: no available actions".to_string()]);
    }

    #[test]
    fn probability_above_one() {
        let game = Game::new(vec![
            State::new(Player::Max, vec![Action::to_state("a", 0)]),
            State::new(Player::Max, vec![Action::new("a", [(0, ratio(6, 5))])]),
        ]);
        let v = validate(&game);
        assert!(v.contains(&"state 1 action a: probability out of range".to_string()), "{v:?}");
    }

    #[test]
    fn stale_float_copy() {
        let mut t = Transition::new(0, ratio(1, 1));
        t.prob = 0.5;
        let game = Game::new(vec![State::new(
            Player::Max,
            vec![Action {
                label: "a".into(),
                transitions: vec![t],
            }],
        )]);
        assert_eq!(validate(&game).len(), 1);
    }
}
