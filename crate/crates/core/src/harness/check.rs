use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::baselines::run_bvi;
use crate::graph::set_to_mask;
use crate::model::Game;
use crate::oracle::{exact_value, ExactValues};
use crate::solver::trace::IterationRecord;
use crate::solver::{solve, solve_topological, SolveOptions, SolveResult, Status};

/// Slack for comparisons that only round-off can break (the solvers work
/// in `f64`, the oracle exactly).
pub const ROUNDING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    /// A solver did not converge.
    Status,
    /// Final value further than ε from the oracle.
    OracleAgreement,
    /// Certified bounds do not contain the oracle value.
    Sandwich,
    /// `reach`, `stay` out of `[0,1]` or summing above 1.
    Probability,
    /// A bound moved the wrong way or `l > u`.
    BoundMonotone,
    /// `reach + stay·u` grew during an iteration.
    OverApproximation,
    /// A best exit promises less than the value of its state.
    BesSound,
    /// An end component without a best exit.
    BesComplete,
    /// A trap state with positive value.
    Trap,
    /// The topological variant disagrees with the plain one by more than 2ε.
    Topological,
    Oracle,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::Status,
        Check::OracleAgreement,
        Check::Sandwich,
        Check::Probability,
        Check::BoundMonotone,
        Check::OverApproximation,
        Check::BesSound,
        Check::BesComplete,
        Check::Trap,
        Check::Topological,
        Check::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::Status => "status",
            Check::OracleAgreement => "oracle-agreement",
            Check::Sandwich => "sandwich",
            Check::Probability => "probability",
            Check::BoundMonotone => "bound-monotone",
            Check::OverApproximation => "over-approximation-monotone",
            Check::BesSound => "bes-sound",
            Check::BesComplete => "bes-complete",
            Check::Trap => "trap",
            Check::Topological => "topological",
            Check::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: Check,
    pub state: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.check.as_str(), self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub epsilon: f64,
    pub max_iterations: u64,
    pub delay_guard: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            epsilon: 1e-6,
            max_iterations: 20_000,
            delay_guard: true,
        }
    }
}

/// Everything computed for one game.
#[derive(Debug, Clone)]
pub struct GameCheck {
    pub oracle: Option<ExactValues>,
    pub svi: SolveResult,
    pub topo: SolveResult,
    pub bvi: SolveResult,
    pub violations: Vec<Violation>,
}

/// All ECs among the states marked in `within`, by trying every subset.
/// A subset is an EC iff every member keeps an action staying inside it and
/// the members are strongly connected through those actions.
pub fn brute_force_ecs(game: &Game, within: &[bool]) -> Vec<Vec<usize>> {
    let candidates: Vec<usize> = (0..game.len()).filter(|&s| within[s]).collect();
    assert!(candidates.len() <= 20, "brute force over {} states", candidates.len());
    let mut out = Vec::new();
    for mask in 1u32..(1 << candidates.len()) {
        let members: Vec<usize> = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &s)| s)
            .collect();
        if is_end_component(game, &members) {
            out.push(members);
        }
    }
    out
}

pub fn is_end_component(game: &Game, members: &[usize]) -> bool {
    let n = game.len();
    let mut inside = vec![false; n];
    for &s in members {
        inside[s] = true;
    }
    let mut adj = vec![Vec::new(); n];
    for &s in members {
        let staying: Vec<_> = game
            .actions(s)
            .iter()
            .filter(|a| a.successors().all(|t| inside[t]))
            .collect();
        if staying.is_empty() {
            return false;
        }
        adj[s] = staying.iter().flat_map(|a| a.successors()).collect();
    }
    // Strongly connected iff every member reaches every other.
    members.iter().all(|&from| {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        members.iter().all(|&t| seen[t])
    })
}

fn violation(out: &mut Vec<Violation>, check: Check, message: String) {
    out.push(Violation { check, state: None, message });
}

fn at_state(out: &mut Vec<Violation>, check: Check, state: usize, message: String) {
    out.push(Violation {
        check,
        state: Some(state),
        message,
    });
}

/// Runs the oracle, both SVI variants and BVI on `game` and checks every
/// invariant on every recorded iteration.
pub fn check_game(game: &Game, config: &CheckConfig) -> GameCheck {
    let game = game.normalize();
    let options = SolveOptions {
        epsilon: config.epsilon,
        max_iterations: config.max_iterations,
        trace: true,
        delay_guard: config.delay_guard,
        ..SolveOptions::default()
    };
    let svi = solve(&game, &options);
    let topo = solve_topological(&game, &options);
    let bvi = run_bvi(&game, config.epsilon, config.max_iterations, true);
    let mut out = Vec::new();

    let oracle = match exact_value(&game) {
        Ok(v) => Some(v),
        Err(e) => {
            violation(&mut out, Check::Oracle, e.to_string());
            None
        }
    };

    for result in [&svi, &topo, &bvi] {
        if result.status != Status::Converged {
            violation(
                &mut out,
                Check::Status,
                format!("{}: {} after {} iterations", result.algorithm.as_str(), result.status.as_str(), result.iterations),
            );
        }
    }
    for s in 0..game.len() {
        if (topo.values[s] - svi.values[s]).abs() > 2.0 * config.epsilon {
            at_state(
                &mut out,
                Check::Topological, s,
                format!("state {s}: svi {} vs svi-topo {}", svi.values[s], topo.values[s]),
            );
        }
    }

    if let Some(oracle) = &oracle {
        let exact = oracle.to_f64();
        for result in [&svi, &topo, &bvi] {
            let name = result.algorithm.as_str();
            for s in 0..game.len() {
                if (result.values[s] - exact[s]).abs() > config.epsilon {
                    at_state(
                        &mut out,
                        Check::OracleAgreement, s,
                        format!("{name} state {s}: {} vs exact {}", result.values[s], oracle.values[s]),
                    );
                }
            }
        }
        for result in [&svi, &topo] {
            check_sound_trace(&game, result, oracle, &exact, &mut out);
        }
        check_bvi_trace(&bvi, &exact, &mut out);
    }

    GameCheck {
        oracle,
        svi,
        topo,
        bvi,
        violations: out,
    }
}

fn check_sound_trace(game: &Game, result: &SolveResult, oracle: &ExactValues, exact: &[f64], out: &mut Vec<Violation>) {
    let name = result.algorithm.as_str();
    let Some(records) = result.trace.as_ref().and_then(|t| t.sound()) else {
        return;
    };
    let n = game.len();
    let mut ec_cache: Option<(Vec<bool>, Vec<Vec<usize>>)> = None;
    let mut seen_traps = BTreeSet::new();

    for (i, r) in records.iter().enumerate() {
        let k = r.k;
        for s in 0..n {
            let (reach, stay) = (r.reach[s], r.stay[s]);
            if !(0.0..=1.0).contains(&reach) || !(0.0..=1.0).contains(&stay) || reach + stay > 1.0 + ROUNDING {
                at_state(out, Check::Probability, s, format!("{name} k={k} state {s}: reach {reach} stay {stay}"));
            }
            if r.under(s) > exact[s] + ROUNDING || r.over(s) < exact[s] - ROUNDING {
                at_state(
                    out,
                    Check::Sandwich, s,
                    format!("{name} k={k} state {s}: [{}, {}] misses {}", r.under(s), r.over(s), oracle.values[s]),
                );
            }
            if r.unknown[s] && r.lower[s] > r.upper[s] {
                at_state(out, Check::BoundMonotone, s, format!("{name} k={k} state {s}: l {} > u {}", r.lower[s], r.upper[s]));
            }
        }

        for &t in r.traps.difference(&seen_traps) {
            if !oracle.values[t].is_zero() {
                at_state(out, Check::Trap, t, format!("{name} k={k}: trap state {t} has value {}", oracle.values[t]));
            }
        }
        seen_traps.extend(r.traps.iter().copied());

        if i == 0 {
            continue;
        }
        let prev = &records[i - 1];
        for s in 0..n {
            if !r.unknown[s] {
                continue;
            }
            if r.upper[s] > prev.upper[s] || r.lower[s] < prev.lower[s] {
                at_state(
                    out,
                    Check::BoundMonotone, s,
                    format!(
                        "{name} k={k} state {s}: bounds [{}, {}] after [{}, {}]",
                        r.lower[s], r.upper[s], prev.lower[s], prev.upper[s]
                    ),
                );
            }
            let u = prev.upper[s];
            let before = prev.reach[s] + prev.stay[s] * u;
            let after = r.reach[s] + r.stay[s] * u;
            if after > before + ROUNDING {
                at_state(
                    out,
                    Check::OverApproximation, s,
                    format!("{name} k={k} state {s} ({}): reach+stay·u {before} -> {after}", game.owner(s)),
                );
            }
        }

        // The valuation the best exits were chosen under: the previous
        // over-approximation with this step's traps already at 0.
        let f: Vec<f64> = (0..n)
            .map(|s| if r.traps.contains(&s) { 0.0 } else { prev.over(s) })
            .collect();
        check_bes(game, name, r, &f, exact, &mut ec_cache, out);
    }
}

fn check_bes(
    game: &Game,
    name: &str,
    r: &IterationRecord,
    f: &[f64],
    exact: &[f64],
    ec_cache: &mut Option<(Vec<bool>, Vec<Vec<usize>>)>,
    out: &mut Vec<Violation>,
) {
    let k = r.k;
    for &(s, a) in &r.bes {
        let promised = game.actions(s)[a].expect(f);
        if promised < exact[s] - ROUNDING {
            at_state(
                out,
                Check::BesSound, s,
                format!("{name} k={k}: exit ({s}, {}) promises {promised} below value {}", game.actions(s)[a].label, exact[s]),
            );
        }
    }
    // Every EC of this step's S? needs an exit among the pairs.
    if ec_cache.as_ref().is_none_or(|(mask, _)| *mask != r.unknown) {
        *ec_cache = Some((r.unknown.clone(), brute_force_ecs(game, &r.unknown)));
    }
    let ecs = &ec_cache.as_ref().unwrap().1;
    for ec in ecs {
        let inside = set_to_mask(&ec.iter().copied().collect(), game.len());
        let covered = r.bes.iter().any(|&(s, a)| inside[s] && game.actions(s)[a].successors().any(|t| !inside[t]));
        if !covered {
            violation(out, Check::BesComplete, format!("{name} k={k}: end component {ec:?} has no best exit"));
        }
    }
}

fn check_bvi_trace(result: &SolveResult, exact: &[f64], out: &mut Vec<Violation>) {
    let Some(records) = result.trace.as_ref().and_then(|t| t.interval()) else {
        return;
    };
    let mut prev_upper: Option<&Vec<f64>> = None;
    for r in records {
        let upper = r.upper.as_ref().expect("bvi records carry upper bounds");
        for s in 0..exact.len() {
            if r.lower[s] > exact[s] + ROUNDING || upper[s] < exact[s] - ROUNDING {
                at_state(
                    out,
                    Check::Sandwich, s,
                    format!("bvi k={} state {s}: [{}, {}] misses {}", r.k, r.lower[s], upper[s], exact[s]),
                );
            }
            if prev_upper.is_some_and(|p| upper[s] > p[s]) {
                at_state(out, Check::BoundMonotone, s, format!("bvi k={} state {s}: upper bound increased", r.k));
            }
        }
        prev_upper = Some(upper);
    }
}
