//! Random-game cross-checking of the solvers against the exact oracle.

mod check;
mod generate;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::graph::{compute_partition, mec_decomposition};
use crate::model::Game;
use crate::solver::SolveResult;

pub use check::{brute_force_ecs, check_game, is_end_component, Check, CheckConfig, GameCheck, Violation, ROUNDING};
pub use generate::{flavour, random_game, GeneratorConfig};

#[derive(Debug, Clone)]
pub struct GameOutcome {
    pub index: u64,
    pub game: Game,
    /// Whether S? contains an end component.
    pub has_ec: bool,
    pub iterations: BTreeMap<&'static str, u64>,
    /// Largest distance to the oracle over all states, per algorithm.
    pub max_error: BTreeMap<&'static str, f64>,
    pub violations: Vec<Violation>,
}

impl GameOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct HarnessReport {
    pub seed: u64,
    pub outcomes: Vec<GameOutcome>,
}

impl HarnessReport {
    pub fn failures(&self) -> impl Iterator<Item = &GameOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    /// Number of violations per check.
    pub fn tally(&self) -> BTreeMap<Check, usize> {
        let mut tally: BTreeMap<Check, usize> = Check::ALL.iter().map(|&c| (c, 0)).collect();
        for o in &self.outcomes {
            for v in &o.violations {
                *tally.get_mut(&v.check).unwrap() += 1;
            }
        }
        tally
    }

    pub fn with_ec(&self) -> usize {
        self.outcomes.iter().filter(|o| o.has_ec).count()
    }

    pub fn max_error(&self, algorithm: &str) -> f64 {
        self.outcomes
            .iter()
            .filter_map(|o| o.max_error.get(algorithm))
            .fold(0.0, |a, &b| a.max(b))
    }
}

fn summarize(index: u64, game: Game, check: GameCheck) -> GameOutcome {
    let partition = compute_partition(&game.normalize());
    let has_ec = !mec_decomposition(&game.normalize(), &partition.unknown).is_empty();
    let results: [&SolveResult; 3] = [&check.svi, &check.topo, &check.bvi];
    let iterations = results.iter().map(|r| (r.algorithm.as_str(), r.iterations)).collect();
    let max_error = match &check.oracle {
        Some(oracle) => {
            let exact = oracle.to_f64();
            results
                .iter()
                .map(|r| {
                    let err = r.values.iter().zip(&exact).map(|(v, e)| (v - e).abs()).fold(0.0, f64::max);
                    (r.algorithm.as_str(), err)
                })
                .collect()
        }
        None => BTreeMap::new(),
    };
    GameOutcome {
        index,
        game,
        has_ec,
        iterations,
        max_error,
        violations: check.violations,
    }
}

/// Generates `n` games from `seed` and checks each of them, in parallel.
/// Outcomes are ordered by game index.
pub fn run_harness(seed: u64, n: u64, generator: &GeneratorConfig, config: &CheckConfig) -> HarnessReport {
    let outcomes = (0..n)
        .into_par_iter()
        .map(|index| {
            let game = random_game(seed, index, generator);
            let check = check_game(&game, config);
            summarize(index, game, check)
        })
        .collect();
    HarnessReport { seed, outcomes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StateSet;

    #[test]
    fn zero_games_pass() {
        let report = run_harness(1, 0, &GeneratorConfig::default(), &CheckConfig::default());
        assert!(report.passed());
        assert!(report.outcomes.is_empty());
    }

    #[test]
    fn brute_force_matches_mec_union() {
        // Every MEC is an EC, and every EC lies inside some MEC.
        let config = GeneratorConfig::default();
        for i in 0..100 {
            let game = random_game(3, i, &config).normalize();
            let all = vec![true; game.len()];
            let ecs = brute_force_ecs(&game, &all);
            let mecs = mec_decomposition(&game, &(0..game.len()).collect::<StateSet>());
            for mec in mecs.iter() {
                assert!(is_end_component(&game, &mec.states), "{i}: {:?}", mec.states);
                assert!(ecs.contains(&mec.states));
            }
            for ec in &ecs {
                assert!(mecs.iter().any(|m| ec.iter().all(|&s| m.contains(s))), "{i}: {ec:?}");
            }
            // Maximality: no EC strictly contains a MEC.
            for mec in mecs.iter() {
                assert!(!ecs.iter().any(|ec| ec.len() > mec.states.len() && mec.states.iter().all(|s| ec.contains(s))));
            }
        }
    }
}
