//! Reachability values of turn-based stochastic games with guaranteed
//! precision.
//!
//! [`solver`] implements sound value iteration with end-component handling
//! and a topological variant. [`baselines`] holds plain and bounded value
//! iteration for comparison, and [`oracle`] computes exact values of small
//! games by strategy enumeration. [`harness`] cross-checks all of them on
//! random games.

pub mod baselines;
pub mod error;
pub mod graph;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod solver;

pub use error::{ModelError, OracleError};
pub use model::{parse_model, Game};
pub use solver::{solve, solve_topological, Algorithm, SolveOptions, SolveResult, Status, Stopping};
