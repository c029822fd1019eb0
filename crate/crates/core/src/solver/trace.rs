use std::collections::BTreeSet;
use std::fmt::Write;

use super::iteration::{Choice, IterationState};
use crate::model::{Game, StateSet};

/// Snapshot of the sound iteration after step `k` (record 0 is the initial
/// state). Bound and decision-value columns hold the values of the group the
/// state belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: u64,
    pub reach: Vec<f64>,
    pub stay: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub decval_lower: Vec<f64>,
    pub decval_upper: Vec<f64>,
    pub unknown: Vec<bool>,
    pub choices: Vec<Option<Choice>>,
    /// Best exits used to pick the strategies of this step.
    pub bes: BTreeSet<(usize, usize)>,
    /// All states moved to the sinks as trap states so far.
    pub traps: StateSet,
}

impl IterationRecord {
    pub(crate) fn capture(it: &IterationState, bes: BTreeSet<(usize, usize)>, traps: &StateSet) -> Self {
        let n = it.reach.len();
        let per_group = |f: fn(&super::iteration::BoundGroup) -> f64, default: f64| -> Vec<f64> {
            (0..n).map(|s| it.group(s).map_or(default, f)).collect()
        };
        IterationRecord {
            k: it.k,
            reach: it.reach.clone(),
            stay: it.stay.clone(),
            lower: per_group(|g| g.lower, 0.0),
            upper: per_group(|g| g.upper, 0.0),
            decval_lower: per_group(|g| g.decval_lower, f64::INFINITY),
            decval_upper: per_group(|g| g.decval_upper, f64::NEG_INFINITY),
            unknown: it.unknown.clone(),
            choices: it.chosen.clone(),
            bes,
            traps: traps.clone(),
        }
    }

    /// `reach + stay·u` per state.
    pub fn over(&self, s: usize) -> f64 {
        self.reach[s] + self.stay[s] * self.upper[s]
    }

    pub fn under(&self, s: usize) -> f64 {
        self.reach[s] + self.stay[s] * self.lower[s]
    }
}

/// Lower (and, for bounded VI, upper) vectors of a baseline after step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRecord {
    pub k: u64,
    pub lower: Vec<f64>,
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    Sound(Vec<IterationRecord>),
    Interval(Vec<IntervalRecord>),
}

pub const SOUND_HEADER: &str = "k,state,chosen_action_label_or_DELAY,reach,stay,l,u,decval_l,decval_u,bes_member,delayed";
pub const INTERVAL_HEADER: &str = "k,state,lower,upper";

impl Trace {
    pub fn len(&self) -> usize {
        match self {
            Trace::Sound(r) => r.len(),
            Trace::Interval(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sound(&self) -> Option<&[IterationRecord]> {
        match self {
            Trace::Sound(r) => Some(r),
            Trace::Interval(_) => None,
        }
    }

    pub fn interval(&self) -> Option<&[IntervalRecord]> {
        match self {
            Trace::Interval(r) => Some(r),
            Trace::Sound(_) => None,
        }
    }

    /// One row per state and record. Floats use Rust's shortest round-trip
    /// formatting, so equal traces give equal bytes.
    pub fn to_csv(&self, game: &Game) -> String {
        let mut out = String::new();
        match self {
            Trace::Sound(records) => {
                out.push_str(SOUND_HEADER);
                out.push('\n');
                for r in records {
                    for s in 0..r.reach.len() {
                        let chosen = match r.choices[s] {
                            None => String::new(),
                            Some(Choice::Delay(_)) => "DELAY".to_string(),
                            Some(c) => game.actions(s)[c.action()].label.clone(),
                        };
                        let bes_member = r.bes.range((s, 0)..=(s, usize::MAX)).next().is_some();
                        let delayed = r.choices[s].is_some_and(Choice::is_delay);
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{},{},{},{},{}",
                            r.k,
                            s,
                            csv_field(&chosen),
                            r.reach[s],
                            r.stay[s],
                            r.lower[s],
                            r.upper[s],
                            r.decval_lower[s],
                            r.decval_upper[s],
                            bes_member,
                            delayed
                        );
                    }
                }
            }
            Trace::Interval(records) => {
                out.push_str(INTERVAL_HEADER);
                out.push('\n');
                for r in records {
                    for s in 0..r.lower.len() {
                        let upper = r.upper.as_ref().map(|u| u[s].to_string()).unwrap_or_default();
                        let _ = writeln!(out, "{},{},{},{}", r.k, s, r.lower[s], upper);
                    }
                }
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
