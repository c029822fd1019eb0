//! The small games from the models/ directory, checked against values worked
//! out by hand and against the exact oracle.

use std::collections::BTreeSet;

use num_rational::BigRational;
use svi_core::baselines::{run_bvi, run_vi};
use svi_core::graph::{compute_partition, mec_decomposition, reachable_from, sccs};
use svi_core::model::{parse_model, ratio, Game, StateSet};
use svi_core::oracle::{exact_value, is_fixpoint};
use svi_core::solver::iteration::Choice;
use svi_core::solver::{solve, solve_topological, SolveOptions, Status};

fn load(name: &str) -> Game {
    let path = format!("{}/../../models/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_model(&text).unwrap()
}

fn traced() -> SolveOptions {
    SolveOptions {
        trace: true,
        ..SolveOptions::default()
    }
}

#[test]
fn fig1_partition_and_single_iteration() {
    let game = load("fig1");
    let p = compute_partition(&game);
    assert_eq!(p.targets, StateSet::from([1]));
    assert_eq!(p.sinks, StateSet::from([2]));
    assert_eq!(p.unknown, StateSet::from([0]));

    let result = solve(&game, &traced());
    assert_eq!(result.status, Status::Converged);
    assert_eq!(result.iterations, 1);
    // 0.01 / (1 - 0.98) is not exactly 1/2 in binary floating point.
    assert!((result.values[0] - 0.5).abs() < 1e-12);
    let records = result.trace.as_ref().unwrap().sound().unwrap();
    assert_eq!(records[0].reach, vec![0.0, 1.0, 0.0]);
    assert_eq!(records[0].stay, vec![1.0, 0.0, 0.0]);
    assert!((records[1].reach[0] - 0.01).abs() < 1e-15);
    assert!((records[1].stay[0] - 0.98).abs() < 1e-15);
    assert_eq!(records[1].lower[0], records[1].upper[0]);
    assert!(records.iter().flat_map(|r| &r.choices).flatten().all(|c| !c.is_delay()));
}

#[test]
fn fig1_oracle_is_one_half() {
    let exact = exact_value(&load("fig1")).unwrap();
    assert_eq!(exact.values, vec![ratio(1, 2), ratio(1, 1), ratio(0, 1)]);
    assert!(is_fixpoint(&load("fig1"), &exact.values));
}

#[test]
fn fig1_vi_increases_towards_one_half() {
    let result = run_vi(&load("fig1"), 1e-9, 100_000, true);
    let records = result.trace.unwrap();
    let lower: Vec<f64> = records.interval().unwrap().iter().map(|r| r.lower[0]).collect();
    assert!(lower.windows(2).all(|w| w[0] <= w[1]));
    assert!(lower.iter().all(|&l| l <= 0.5));
    assert!((result.values[0] - 0.5).abs() < 1e-6);
}

#[test]
fn fig2_has_no_unknown_states() {
    let game = load("fig2");
    let p = compute_partition(&game);
    assert_eq!(p.sinks.len(), 3);
    assert!(p.unknown.is_empty());
    let result = solve(&game, &SolveOptions::default());
    assert_eq!(result.iterations, 0);
    assert_eq!(result.values, vec![0.0; 3]);
    assert_eq!(run_vi(&game, 1e-6, 10, false).values, vec![0.0; 3]);
}

#[test]
fn fig3_with_and_without_ec_handling() {
    let game = load("fig3");
    let mecs = mec_decomposition(&game, &StateSet::from([0]));
    assert_eq!(mecs.len(), 1);
    assert_eq!(mecs.mecs[0].actions, vec![(0, vec![0])]);

    let plain = solve(
        &game,
        &SolveOptions {
            ec_handling: false,
            max_iterations: 100,
            ..traced()
        },
    );
    assert_eq!(plain.status, Status::MaxIterations);
    let records = plain.trace.unwrap();
    assert!(records.sound().unwrap().iter().all(|r| r.upper[0] == 1.0));

    let handled = solve(&game, &traced());
    assert_eq!(handled.status, Status::Converged);
    assert!(handled.iterations <= 3);
    assert_eq!(handled.values[0], 0.5);
    assert_eq!(handled.width(0), 0.0);
    let first = &handled.trace.as_ref().unwrap().sound().unwrap()[1];
    assert_eq!(first.bes, BTreeSet::from([(0, 1)]));
    assert_eq!(first.choices[0], Some(Choice::Forced(1)));

    assert_eq!(exact_value(&game).unwrap().values[0], ratio(1, 2));
}

#[test]
fn fig4_first_iteration_and_convergence() {
    let game = load("fig4");
    let all_unknown = StateSet::from([0, 1]);
    assert_eq!(sccs(&game, &all_unknown).components, vec![vec![0, 1]]);
    let mecs = mec_decomposition(&game, &all_unknown);
    assert_eq!(mecs.mecs[0].actions, vec![(0, vec![0]), (1, vec![0])]);

    let result = solve(&game, &traced());
    let records = result.trace.as_ref().unwrap().sound().unwrap();
    let first = &records[1];
    assert!((first.reach[0] - 1.0 / 3.0).abs() < 1e-15);
    assert!((first.stay[0] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(first.bes, BTreeSet::from([(0, 1)]));
    assert_eq!(result.status, Status::Converged);
    assert!(result.iterations <= 1000);
    for s in 0..2 {
        assert!((result.values[s] - 0.5).abs() <= 1e-6, "{}", result.values[s]);
    }
    let exact = exact_value(&game).unwrap();
    assert_eq!(exact.values[..2], [ratio(1, 2), ratio(1, 2)]);
}

#[test]
fn fig4_delay_keeps_s1_values() {
    let result = solve(&load("fig4"), &traced());
    let records = result.trace.as_ref().unwrap().sound().unwrap();
    // s1 exits in step 2 and would be pulled back into the loop in step 3.
    assert!((records[2].reach[1] - 0.4).abs() < 1e-15);
    assert!((records[2].stay[1] - 0.2).abs() < 1e-15);
    assert!(records[3].choices[1].unwrap().is_delay());
    assert_eq!((records[3].reach[1], records[3].stay[1]), (records[2].reach[1], records[2].stay[1]));
}

#[test]
fn fig4_without_delay_guard_oscillates() {
    let options = SolveOptions {
        delay_guard: false,
        max_iterations: 40,
        ..traced()
    };
    let result = solve(&load("fig4"), &options);
    assert_eq!(result.status, Status::MaxIterations);
    let records = result.trace.unwrap();
    let records = records.sound().unwrap();
    for k in 2..records.len() - 2 {
        let pair = |k: usize| (records[k].reach.clone(), records[k].stay.clone());
        assert_eq!(pair(k), pair(k + 2), "no period 2 at k={k}");
        assert_ne!(pair(k), pair(k + 1), "period 1 at k={k}");
    }
    assert!(records.iter().all(|r| r.lower[0] == 0.0 && r.upper[0] == 1.0));
}

#[test]
fn fig5_structure_and_values() {
    let game = load("fig5");
    let p = compute_partition(&game);
    assert_eq!(p.targets, StateSet::from([3]));
    assert_eq!(p.sinks, StateSet::from([4]));
    assert_eq!(p.unknown, StateSet::from([0, 1, 2]));
    assert_eq!(reachable_from(&game, 2), StateSet::from([2, 3]));
    assert_eq!(reachable_from(&game, 0), (0..5).collect());
    let normalized = game.normalize();
    assert_eq!(normalized, game);

    let exact = exact_value(&game).unwrap();
    assert_eq!(exact.values[..3], [ratio(1, 2), ratio(1, 2), BigRational::from_integer(1.into())]);

    for result in [solve(&game, &SolveOptions::default()), solve_topological(&game, &SolveOptions::default())] {
        assert_eq!(result.status, Status::Converged);
        assert!((result.values[0] - 0.5).abs() <= 1e-6);
        assert!((result.values[1] - 0.5).abs() <= 1e-6);
        assert_eq!(result.values[2], 1.0);
    }
}

#[test]
fn fig5_minimizer_tie_picks_first_action() {
    let result = solve(&load("fig5"), &traced());
    let first = &result.trace.as_ref().unwrap().sound().unwrap()[1];
    assert_eq!(first.choices[0], Some(Choice::Optimal(0)));
}

#[test]
fn fig5_topological_sweeps_once() {
    let result = solve_topological(&load("fig5"), &SolveOptions::default());
    assert_eq!(result.iterations, 1);
}

#[test]
fn bvi_iteration_counts() {
    for name in ["fig1", "fig5"] {
        let result = run_bvi(&load(name), 1e-6, 100_000, false);
        assert_eq!(result.status, Status::Converged, "{name}");
        assert!(result.iterations >= 300, "{name}: {}", result.iterations);
        assert!((result.values[0] - 0.5).abs() <= 1e-6);
    }
}
