//! Exact values of small games.
//!
//! Memoryless deterministic strategies suffice for reachability, so the value
//! is the max-min over all such profiles of the reachability probability of
//! the induced Markov chain. Each chain is solved by exact Gaussian
//! elimination; no floating point is involved.

use std::collections::VecDeque;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::OracleError;
use crate::graph::compute_partition;
use crate::model::{Game, Player, Transition};

/// Largest number of strategy profiles the oracle will enumerate.
pub const PROFILE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactValues {
    pub values: Vec<BigRational>,
    /// For every state of S?, an action its owner plays in an optimal
    /// profile.
    pub actions: Vec<Option<usize>>,
}

impl ExactValues {
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(crate::model::ratio_to_f64).collect()
    }
}

/// Reachability probabilities of `targets` in the chain whose state `s`
/// moves according to `step(s)`.
fn chain_reach<'a, F>(n: usize, targets: &[bool], step: F) -> Vec<BigRational>
where
    F: Fn(usize) -> &'a [Transition],
{
    let mut preds = vec![Vec::new(); n];
    for s in 0..n {
        for t in step(s) {
            preds[t.to].push(s);
        }
    }
    let mut can_reach = targets.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| targets[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &p in &preds[t] {
            if !can_reach[p] {
                can_reach[p] = true;
                queue.push_back(p);
            }
        }
    }

    let mut values = vec![BigRational::zero(); n];
    let mut index = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for s in 0..n {
        if targets[s] {
            values[s] = BigRational::one();
        } else if can_reach[s] {
            index[s] = unknowns.len();
            unknowns.push(s);
        }
    }

    // (I - P) x = b over the unknowns, b collecting direct target mass.
    let m = unknowns.len();
    let mut rows: Vec<Vec<BigRational>> = unknowns
        .iter()
        .map(|&s| {
            let mut row = vec![BigRational::zero(); m + 1];
            row[index[s]] = BigRational::one();
            for t in step(s) {
                if targets[t.to] {
                    row[m] += &t.exact;
                } else if index[t.to] != usize::MAX {
                    row[index[t.to]] -= &t.exact;
                }
            }
            row
        })
        .collect();
    for (i, x) in gauss(&mut rows).into_iter().enumerate() {
        values[unknowns[i]] = x;
    }
    values
}

/// Solves the augmented system in place. The system must be non-singular.
fn gauss(rows: &mut [Vec<BigRational>]) -> Vec<BigRational> {
    let m = rows.len();
    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !rows[r][col].is_zero())
            .expect("singular reachability system");
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for x in rows[col][col..].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &factor * p;
            }
        }
    }
    rows.iter().map(|row| row[m].clone()).collect()
}

/// Reachability probabilities of the targets in a game where every state has
/// exactly one action.
pub fn mc_reach(chain: &Game) -> Vec<BigRational> {
    let targets: Vec<bool> = chain.states.iter().map(|s| s.target).collect();
    chain_reach(chain.len(), &targets, |s| {
        assert_eq!(chain.actions(s).len(), 1, "state {s} of a chain must have one action");
        &chain.actions(s)[0].transitions
    })
}

/// Decodes profile number `index` into one action per state of `states`.
fn decode(game: &Game, states: &[usize], mut index: usize, profile: &mut [usize]) {
    for &s in states {
        let k = game.actions(s).len();
        profile[s] = index % k;
        index /= k;
    }
}

fn count(game: &Game, states: &[usize]) -> usize {
    states.iter().map(|&s| game.actions(s).len()).product()
}

/// Exact values by enumerating memoryless deterministic profiles over S?,
/// checked against the min-max order.
pub fn exact_value(game: &Game) -> Result<ExactValues, OracleError> {
    let game = game.normalize();
    let partition = compute_partition(&game);
    let profiles = game.profile_count(&partition.unknown);
    if profiles > PROFILE_LIMIT {
        return Err(OracleError::TooLarge {
            profiles,
            limit: PROFILE_LIMIT,
        });
    }
    let n = game.len();
    let targets: Vec<bool> = (0..n).map(|s| game.states[s].target).collect();
    let max_states: Vec<usize> = partition
        .unknown
        .iter()
        .copied()
        .filter(|&s| game.owner(s) == Player::Max)
        .collect();
    let min_states: Vec<usize> = partition
        .unknown
        .iter()
        .copied()
        .filter(|&s| game.owner(s) == Player::Min)
        .collect();
    let n_max = count(&game, &max_states);
    let n_min = count(&game, &min_states);

    let values_of = |sigma: usize, tau: usize| -> Vec<BigRational> {
        let mut profile = vec![0; n];
        decode(&game, &max_states, sigma, &mut profile);
        decode(&game, &min_states, tau, &mut profile);
        chain_reach(n, &targets, |s| &game.actions(s)[profile[s]].transitions)
    };

    // table[σ][τ] = values of the induced chain.
    let table: Vec<Vec<Vec<BigRational>>> = (0..n_max)
        .into_par_iter()
        .map(|sigma| (0..n_min).map(|tau| values_of(sigma, tau)).collect())
        .collect();

    let mut profile = vec![0; n];
    let mut values = vec![BigRational::zero(); n];
    let mut actions = vec![None; n];
    for s in 0..n {
        // max over σ of min over τ, remembering the witnessing σ.
        let (max_min, best_sigma) = (0..n_max)
            .map(|sigma| {
                let inner = (0..n_min).map(|tau| &table[sigma][tau][s]).min().unwrap();
                (inner.clone(), sigma)
            })
            .fold(None::<(BigRational, usize)>, |acc, (v, sigma)| match acc {
                Some((ref best, _)) if *best >= v => acc,
                _ => Some((v, sigma)),
            })
            .unwrap();
        let (min_max, best_tau) = (0..n_min)
            .map(|tau| {
                let outer = (0..n_max).map(|sigma| &table[sigma][tau][s]).max().unwrap();
                (outer.clone(), tau)
            })
            .fold(None::<(BigRational, usize)>, |acc, (v, tau)| match acc {
                Some((ref best, _)) if *best <= v => acc,
                _ => Some((v, tau)),
            })
            .unwrap();
        if max_min != min_max {
            return Err(OracleError::ExchangeViolation { state: s });
        }
        if partition.unknown.contains(&s) {
            match game.owner(s) {
                Player::Max => decode(&game, &max_states, best_sigma, &mut profile),
                Player::Min => decode(&game, &min_states, best_tau, &mut profile),
            }
            actions[s] = Some(profile[s]);
        }
        values[s] = max_min;
    }
    Ok(ExactValues { values, actions })
}

/// Whether `values` is a fixpoint of the Bellman operator, in exact
/// arithmetic.
pub fn is_fixpoint(game: &Game, values: &[BigRational]) -> bool {
    let game = game.normalize();
    (0..game.len()).all(|s| {
        if game.states[s].target {
            return values[s].is_one();
        }
        let sums = game.actions(s).iter().map(|a| {
            a.transitions
                .iter()
                .fold(BigRational::zero(), |acc, t| acc + &t.exact * &values[t.to])
        });
        let best = match game.owner(s) {
            Player::Max => sums.max(),
            Player::Min => sums.min(),
        };
        best.as_ref() == Some(&values[s])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ratio, Action, State};

    #[test]
    fn geometric_chain() {
        let chain = Game::new(vec![
            State::new(
                Player::Max,
                vec![Action::new("a", [(0, ratio(49, 50)), (1, ratio(1, 100)), (2, ratio(1, 100))])],
            ),
            State::new(Player::Max, vec![Action::to_state("loop", 1)]).target(),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]),
        ]);
        assert_eq!(mc_reach(&chain), vec![ratio(1, 2), ratio(1, 1), ratio(0, 1)]);
    }

    #[test]
    fn chain_with_unreachable_cycle_is_zero() {
        let chain = Game::new(vec![
            State::new(Player::Max, vec![Action::to_state("a", 1)]),
            State::new(Player::Max, vec![Action::to_state("a", 0)]),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]).target(),
        ]);
        assert_eq!(mc_reach(&chain)[..2], [ratio(0, 1), ratio(0, 1)]);
    }

    #[test]
    fn guard_refuses_large_games() {
        let actions = |s: usize| (0..10).map(|a| Action::new(format!("a{a}"), [(s, ratio(1, 2)), (7, ratio(1, 2))])).collect();
        let mut states: Vec<State> = (0..7).map(|s| State::new(Player::Max, actions(s))).collect();
        states.push(State::new(Player::Max, vec![Action::to_state("loop", 7)]).target());
        let err = exact_value(&Game::new(states)).unwrap_err();
        assert!(err.to_string().contains("game too large for oracle"), "{err}");
    }
}
