//! Sound value iteration with end-component handling.
//!
//! The engine alternates: best exits of the MECs of S? (trap components are
//! moved to the sinks on discovery), strategy choice, Bellman update with the
//! delay guard, decision values, bound update and the termination test.
//!
//! Plain SVI keeps one bound pair for all of S? and updates every state from
//! the previous vectors (Jacobi). The topological variant keeps one bound
//! pair per SCC and sweeps the SCCs in reverse topological order, so an SCC
//! already sees the current step of the SCCs below it. An SCC whose bounds
//! meet is frozen and its values are folded into `reach`.

pub mod bes;
pub mod iteration;
pub mod trace;

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use crate::graph::{compute_partition, mec_decomposition, MecList};
use crate::model::{Game, StatePartition, StateSet};

use bes::{compute_bes, BestExitSet};
use iteration::{
    apply_update, candidate_action, check_termination, init_iteration, init_topological, update_decision_values,
    update_global_bounds, Choice, IterationState,
};
use trace::{IterationRecord, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stopping {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub epsilon: f64,
    pub stopping: Stopping,
    pub ec_handling: bool,
    pub topological: bool,
    pub max_iterations: u64,
    pub trace: bool,
    /// Turning this off removes the delay action while keeping the rest of
    /// the EC handling. Only useful to watch the oscillation it prevents.
    pub delay_guard: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: 1e-6,
            stopping: Stopping::Absolute,
            ec_handling: true,
            topological: false,
            max_iterations: 10_000_000,
            trace: false,
            delay_guard: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "CONVERGED",
            Status::MaxIterations => "MAX_ITERATIONS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Svi,
    SviTopo,
    Bvi,
    Vi,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Svi,
        Algorithm::SviTopo,
        Algorithm::Bvi,
        Algorithm::Vi,
        Algorithm::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Svi => "svi",
            Algorithm::SviTopo => "svi-topo",
            Algorithm::Bvi => "bvi",
            Algorithm::Vi => "vi",
            Algorithm::Oracle => "oracle",
        }
    }

    pub fn parse(name: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.as_str() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub algorithm: Algorithm,
    pub status: Status,
    pub iterations: u64,
    pub epsilon: f64,
    pub values: Vec<f64>,
    pub lower: Vec<f64>,
    /// Absent for plain value iteration.
    pub upper: Option<Vec<f64>>,
    /// Final action label per state of S?.
    pub actions: Vec<Option<String>>,
    pub trace: Option<Trace>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// `upper - lower` at `s`, infinite without upper bounds.
    pub fn width(&self, s: usize) -> f64 {
        self.upper.as_ref().map_or(f64::INFINITY, |u| u[s] - self.lower[s])
    }

    pub fn to_json(&self) -> Value {
        let mut values = Map::new();
        for s in 0..self.values.len() {
            values.insert(
                s.to_string(),
                json!({
                    "value": self.values[s],
                    "lower": self.lower[s],
                    "upper": self.upper.as_ref().map(|u| u[s]),
                    "action": self.actions[s],
                }),
            );
        }
        json!({
            "algorithm": self.algorithm.as_str(),
            "status": self.status.as_str(),
            "iterations": self.iterations,
            "epsilon": self.epsilon,
            "values": values,
        })
    }
}

/// Sound value iteration; dispatches to [`solve_topological`] when
/// `options.topological` is set.
pub fn solve(game: &Game, options: &SolveOptions) -> SolveResult {
    if options.topological {
        return solve_topological(game, options);
    }
    let game = game.normalize();
    let partition = compute_partition(&game);
    let it = init_iteration(&game, &partition);
    Engine::new(&game, partition, it, options).run(Algorithm::Svi)
}

/// Sound value iteration with one bound pair per SCC of S?.
pub fn solve_topological(game: &Game, options: &SolveOptions) -> SolveResult {
    let game = game.normalize();
    let partition = compute_partition(&game);
    let it = init_topological(&game, &partition);
    let options = SolveOptions {
        topological: true,
        ..*options
    };
    Engine::new(&game, partition, it, &options).run(Algorithm::SviTopo)
}

struct Engine<'a> {
    game: &'a Game,
    options: SolveOptions,
    it: IterationState,
    mecs: MecList,
    traps: StateSet,
    records: Vec<IterationRecord>,
}

impl<'a> Engine<'a> {
    fn new(game: &'a Game, partition: StatePartition, it: IterationState, options: &SolveOptions) -> Self {
        let mecs = if options.ec_handling {
            mec_decomposition(game, &partition.unknown)
        } else {
            MecList::default()
        };
        Engine {
            game,
            options: *options,
            it,
            mecs,
            traps: StateSet::new(),
            records: Vec::new(),
        }
    }

    fn run(mut self, algorithm: Algorithm) -> SolveResult {
        if self.options.trace {
            self.records
                .push(IterationRecord::capture(&self.it, BTreeSet::new(), &self.traps));
        }
        let status = loop {
            if check_termination(&self.it, &self.options) {
                break Status::Converged;
            }
            if self.it.k >= self.options.max_iterations {
                break Status::MaxIterations;
            }
            let bes = self.best_exits();
            self.step(bes.as_ref());
            if self.options.trace {
                let pairs = bes.map(|b| b.pairs).unwrap_or_default();
                self.records.push(IterationRecord::capture(&self.it, pairs, &self.traps));
            }
        };
        self.finish(algorithm, status)
    }

    /// Best exits under `f = reach + stay·u`. Trap components are moved to
    /// the sinks, after which the MECs of the smaller S? are recomputed and
    /// the search repeated.
    fn best_exits(&mut self) -> Option<BestExitSet> {
        if !self.options.ec_handling {
            return None;
        }
        loop {
            let f = self.it.over_approximation();
            let bes = compute_bes(self.game, &self.mecs, &f);
            if bes.trap_states.is_empty() {
                return Some(bes);
            }
            self.traps.extend(bes.trap_states.iter().copied());
            self.it.make_sinks(bes.trap_states.iter().copied());
            let unknown: StateSet = self.it.unknown_states().collect();
            self.mecs = mec_decomposition(self.game, &unknown);
        }
    }

    fn step(&mut self, bes: Option<&BestExitSet>) {
        let guard = self.options.ec_handling && self.options.delay_guard;
        for g in 0..self.it.groups.len() {
            if self.it.groups[g].frozen || self.it.groups[g].members.is_empty() {
                continue;
            }
            let members = self.it.groups[g].members.clone();
            let updates: Vec<(usize, f64, f64, Choice)> = members
                .iter()
                .map(|&s| {
                    let candidate = candidate_action(self.game, s, &self.it, bes);
                    let (reach, stay, choice) = apply_update(self.game, s, &self.it, candidate, guard);
                    (s, reach, stay, choice)
                })
                .collect();
            let choices: Vec<(usize, Choice)> = updates.iter().map(|&(s, _, _, c)| (s, c)).collect();
            let (decval_lower, decval_upper) = update_decision_values(self.game, &self.it, g, &choices);

            for &(s, reach, stay, choice) in &updates {
                self.it.reach[s] = reach;
                self.it.stay[s] = stay;
                self.it.chosen[s] = Some(choice);
                self.it.delayed[s] = choice.is_delay();
            }
            let group = &mut self.it.groups[g];
            group.decval_lower = decval_lower;
            group.decval_upper = decval_upper;
            let (lower, upper) = update_global_bounds(&self.it, g, self.options.ec_handling);
            let group = &mut self.it.groups[g];
            group.lower = lower;
            group.upper = upper;

            if self.options.topological && lower == upper {
                group.frozen = true;
                for &s in &group.members {
                    self.it.reach[s] += self.it.stay[s] * lower;
                    self.it.stay[s] = 0.0;
                }
            }
        }
        self.it.k += 1;
    }

    fn finish(self, algorithm: Algorithm, status: Status) -> SolveResult {
        let it = &self.it;
        let n = it.reach.len();
        let lower = it.under_approximation();
        let upper = it.over_approximation();
        let values = (0..n)
            .map(|s| (it.reach[s] + it.stay[s] * (it.lower(s) + it.upper(s)) / 2.0).clamp(lower[s], upper[s]))
            .collect();
        let actions = (0..n)
            .map(|s| it.chosen[s].map(|c| self.game.actions(s)[c.action()].label.clone()))
            .collect();
        SolveResult {
            algorithm,
            status,
            iterations: it.k,
            epsilon: self.options.epsilon,
            values,
            lower,
            upper: Some(upper),
            actions,
            trace: self.options.trace.then_some(Trace::Sound(self.records)),
        }
    }
}
