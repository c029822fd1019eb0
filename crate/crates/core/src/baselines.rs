//! Classical value iteration and bounded value iteration (BVI).
//!
//! VI iterates a lower bound from `1` on targets and `0` elsewhere and stops
//! when it no longer moves much, which says nothing about the distance to the
//! value. BVI additionally iterates an upper bound from `1` and, after every
//! step, deflates end components to their best exit so the upper bound is not
//! stuck at a spurious fixpoint.

use crate::graph::{compute_partition, mec_decomposition};
use crate::model::{Game, Player};
use crate::solver::bes::compute_bes;
use crate::solver::trace::{IntervalRecord, Trace};
use crate::solver::{Algorithm, SolveResult, Status};

/// One Bellman step of `values` at `s`, with the optimizing action.
fn bellman(game: &Game, s: usize, values: &[f64]) -> (f64, usize) {
    let owner = game.owner(s);
    let mut best = 0;
    let mut best_value = game.actions(s)[0].expect(values);
    for (a, action) in game.actions(s).iter().enumerate().skip(1) {
        let v = action.expect(values);
        let better = match owner {
            Player::Max => v > best_value,
            Player::Min => v < best_value,
        };
        if better {
            best = a;
            best_value = v;
        }
    }
    (best_value, best)
}

fn labels(game: &Game, chosen: &[Option<usize>]) -> Vec<Option<String>> {
    chosen
        .iter()
        .enumerate()
        .map(|(s, a)| a.map(|a| game.actions(s)[a].label.clone()))
        .collect()
}

/// Plain value iteration from below; stops once no state moves by `threshold`
/// or more in one step.
pub fn run_vi(game: &Game, threshold: f64, max_iterations: u64, trace: bool) -> SolveResult {
    let game = game.normalize();
    let partition = compute_partition(&game);
    let n = game.len();
    let unknown: Vec<usize> = partition.unknown.iter().copied().collect();
    let mut lower = vec![0.0; n];
    for &f in &partition.targets {
        lower[f] = 1.0;
    }
    let mut chosen = vec![None; n];
    let mut records = Vec::new();
    if trace {
        records.push(IntervalRecord {
            k: 0,
            lower: lower.clone(),
            upper: None,
        });
    }

    let mut k = 0;
    let status = loop {
        if k >= max_iterations {
            break Status::MaxIterations;
        }
        let updates: Vec<(usize, f64, usize)> = unknown
            .iter()
            .map(|&s| {
                let (v, a) = bellman(&game, s, &lower);
                (s, v, a)
            })
            .collect();
        let mut change: f64 = 0.0;
        for (s, v, a) in updates {
            change = change.max((v - lower[s]).abs());
            lower[s] = v;
            chosen[s] = Some(a);
        }
        k += 1;
        if trace {
            records.push(IntervalRecord {
                k,
                lower: lower.clone(),
                upper: None,
            });
        }
        if change < threshold {
            break Status::Converged;
        }
    };

    SolveResult {
        algorithm: Algorithm::Vi,
        status,
        iterations: k,
        epsilon: threshold,
        values: lower.clone(),
        lower,
        upper: None,
        actions: labels(&game, &chosen),
        trace: trace.then_some(Trace::Interval(records)),
    }
}

/// Bounded value iteration with deflation; stops once `U - L < 2ε`
/// everywhere and reports the midpoint.
pub fn run_bvi(game: &Game, epsilon: f64, max_iterations: u64, trace: bool) -> SolveResult {
    let game = game.normalize();
    let partition = compute_partition(&game);
    let n = game.len();
    let mut unknown = partition.unknown_mask(n);
    let mut lower = vec![0.0; n];
    let mut upper = vec![1.0; n];
    for &f in &partition.targets {
        lower[f] = 1.0;
    }
    for &z in &partition.sinks {
        upper[z] = 0.0;
    }
    let mut mecs = mec_decomposition(&game, &partition.unknown);
    let mut chosen = vec![None; n];
    let mut records = Vec::new();
    let record = |k, lower: &[f64], upper: &[f64], records: &mut Vec<IntervalRecord>| {
        if trace {
            records.push(IntervalRecord {
                k,
                lower: lower.to_vec(),
                upper: Some(upper.to_vec()),
            });
        }
    };
    record(0, &lower, &upper, &mut records);

    let mut k = 0;
    let status = loop {
        if (0..n).all(|s| upper[s] - lower[s] < 2.0 * epsilon) {
            break Status::Converged;
        }
        if k >= max_iterations {
            break Status::MaxIterations;
        }
        let updates: Vec<(usize, f64, f64, usize)> = (0..n)
            .filter(|&s| unknown[s])
            .map(|s| {
                let (l, a) = bellman(&game, s, &lower);
                let (u, _) = bellman(&game, s, &upper);
                (s, l, u, a)
            })
            .collect();
        for (s, l, u, a) in updates {
            lower[s] = l;
            upper[s] = u;
            chosen[s] = Some(a);
        }

        loop {
            let bes = compute_bes(&game, &mecs, &upper);
            for component in &bes.components {
                for &s in &component.states {
                    upper[s] = upper[s].min(component.best_value);
                }
            }
            if bes.trap_states.is_empty() {
                break;
            }
            for &s in &bes.trap_states {
                unknown[s] = false;
                upper[s] = 0.0;
                lower[s] = 0.0;
                chosen[s] = None;
            }
            let remaining = (0..n).filter(|&s| unknown[s]).collect();
            mecs = mec_decomposition(&game, &remaining);
        }
        k += 1;
        record(k, &lower, &upper, &mut records);
    };

    let values = (0..n).map(|s| (lower[s] + upper[s]) / 2.0).collect();
    SolveResult {
        algorithm: Algorithm::Bvi,
        status,
        iterations: k,
        epsilon,
        values,
        lower,
        upper: Some(upper),
        actions: labels(&game, &chosen),
        trace: trace.then_some(Trace::Interval(records)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ratio, Action, State};

    fn fig3() -> Game {
        Game::new(vec![
            State::new(
                Player::Max,
                vec![Action::to_state("a", 0), Action::new("b", [(1, ratio(1, 2)), (2, ratio(1, 2))])],
            ),
            State::new(Player::Max, vec![Action::to_state("loop", 1)]).target(),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]),
        ])
    }

    #[test]
    fn first_deflation_lowers_to_best_exit() {
        let result = run_bvi(&fig3(), 1e-6, 1, true);
        let records = result.trace.unwrap();
        let after_one = &records.interval().unwrap()[1];
        assert_eq!(after_one.upper.as_ref().unwrap()[0], 0.5);
    }

    #[test]
    fn vi_on_target_only_game_is_exact_at_once() {
        let game = Game::new(vec![State::new(Player::Max, vec![Action::to_state("a", 0)]).target()]);
        let result = run_vi(&game, 1e-6, 100, false);
        assert_eq!(result.values, vec![1.0]);
        assert!(result.iterations <= 1);
    }

    #[test]
    fn vi_without_targets_is_zero() {
        let game = Game::new(vec![
            State::new(Player::Max, vec![Action::to_state("a", 1)]),
            State::new(Player::Max, vec![Action::to_state("a", 0), Action::to_state("b", 2)]),
            State::new(Player::Max, vec![Action::to_state("loop", 2)]),
        ]);
        let result = run_vi(&game, 1e-6, 100, false);
        assert_eq!(result.values, vec![0.0; 3]);
    }
}
