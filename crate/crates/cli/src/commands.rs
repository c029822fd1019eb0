use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Map, Value};
use svi_core::baselines::{run_bvi, run_vi};
use svi_core::graph::{compute_partition, mec_decomposition, sccs};
use svi_core::harness::{run_harness, CheckConfig, GeneratorConfig};
use svi_core::model::{parse_model, serialize_model, Game};
use svi_core::oracle::exact_value;
use svi_core::solver::{self, SolveOptions, SolveResult, Status, Stopping};

use crate::{Alg, RunArgs};

const EXIT_OK: u8 = 0;
const EXIT_MAX_ITERATIONS: u8 = 2;
const EXIT_HARNESS_FAILURE: u8 = 3;

fn load(path: &Path) -> Result<Game> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_model(&text).with_context(|| format!("{}", path.display()))
}

fn options(run: &RunArgs) -> SolveOptions {
    SolveOptions {
        epsilon: run.epsilon,
        stopping: if run.relative { Stopping::Relative } else { Stopping::Absolute },
        ec_handling: !run.no_ec_handling,
        topological: run.topological,
        max_iterations: run.max_iter,
        trace: run.trace.is_some(),
        delay_guard: !run.no_delay_guard,
    }
}

fn run_alg(alg: Alg, game: &Game, run: &RunArgs) -> SolveResult {
    let mut opts = options(run);
    match alg {
        Alg::Svi | Alg::Oracle => solver::solve(game, &opts),
        Alg::SviTopo => {
            opts.topological = true;
            solver::solve(game, &opts)
        }
        Alg::Bvi => run_bvi(game, opts.epsilon, opts.max_iterations, opts.trace),
        Alg::Vi => run_vi(game, opts.epsilon, opts.max_iterations, opts.trace),
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Converged => EXIT_OK,
        Status::MaxIterations => EXIT_MAX_ITERATIONS,
    }
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

pub fn solve(alg: Alg, run: &RunArgs, path: &Path) -> Result<u8> {
    let game = load(path)?;
    if alg == Alg::Oracle {
        return oracle_on(&game);
    }
    let result = run_alg(alg, &game, run);
    if let (Some(trace_path), Some(trace)) = (&run.trace, &result.trace) {
        fs::write(trace_path, trace.to_csv(&game.normalize()))
            .with_context(|| format!("cannot write {}", trace_path.display()))?;
    }
    print_json(&result.to_json());
    Ok(status_code(result.status))
}

pub fn compare(algs: &[Alg], run: &RunArgs, path: &Path) -> Result<u8> {
    let game = load(path)?;
    let initial = game.initial.unwrap_or(0);
    let mut out = String::from("algorithm,iterations,value,width,millis\n");
    let mut code = EXIT_OK;
    for &alg in algs {
        let name = alg.to_possible_value().expect("no skipped variants").get_name().to_string();
        let start = Instant::now();
        if alg == Alg::Oracle {
            let exact = exact_value(&game)?;
            let millis = start.elapsed().as_millis();
            let _ = writeln!(out, "{name},0,{},0,{millis}", exact.to_f64()[initial]);
            continue;
        }
        let result = run_alg(alg, &game, &RunArgs { trace: None, ..run.clone() });
        let millis = start.elapsed().as_millis();
        let width = result.upper.as_ref().map(|u| (u[initial] - result.lower[initial]).to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{name},{},{},{width},{millis}",
            result.iterations, result.values[initial]
        );
        code = code.max(status_code(result.status));
    }
    print!("{out}");
    Ok(code)
}

pub fn inspect(path: &Path) -> Result<u8> {
    let game = load(path)?.normalize();
    let partition = compute_partition(&game);
    let set = |s: &std::collections::BTreeSet<usize>| s.iter().copied().collect::<Vec<_>>();
    let mecs: Vec<Value> = mec_decomposition(&game, &partition.unknown)
        .iter()
        .map(|m| {
            let actions: Map<String, Value> = m
                .actions
                .iter()
                .map(|(s, acts)| {
                    let labels: Vec<&str> = acts.iter().map(|&a| game.actions(*s)[a].label.as_str()).collect();
                    (s.to_string(), json!(labels))
                })
                .collect();
            json!({"states": m.states, "actions": actions})
        })
        .collect();
    print_json(&json!({
        "states": game.len(),
        "targets": set(&partition.targets),
        "sinks": set(&partition.sinks),
        "unknown": set(&partition.unknown),
        "sccs": sccs(&game, &partition.unknown).components,
        "mecs": mecs,
    }));
    Ok(EXIT_OK)
}

fn oracle_on(game: &Game) -> Result<u8> {
    let exact = exact_value(game)?;
    let game = game.normalize();
    let values: Map<String, Value> = exact
        .values
        .iter()
        .enumerate()
        .map(|(s, v)| {
            let action = exact.actions[s].map(|a| game.actions(s)[a].label.clone());
            (s.to_string(), json!({"value": v.to_string(), "action": action}))
        })
        .collect();
    print_json(&json!({"algorithm": "oracle", "values": values}));
    Ok(EXIT_OK)
}

pub fn oracle(path: &Path) -> Result<u8> {
    oracle_on(&load(path)?)
}

pub fn harness(seed: u64, n: u64, epsilon: f64, max_iter: u64, delay_guard: bool, out: Option<&Path>) -> Result<u8> {
    let config = CheckConfig {
        epsilon,
        max_iterations: max_iter,
        delay_guard,
    };
    let report = run_harness(seed, n, &GeneratorConfig::default(), &config);
    let failures: Vec<_> = report.failures().collect();
    println!(
        "seed {seed}: {} games, {} with end components, {} failed",
        report.outcomes.len(),
        report.with_ec(),
        failures.len()
    );
    for (check, count) in report.tally() {
        println!("  {:<28} {count}", check.as_str());
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    for f in &failures {
        println!("game {}: {} violations", f.index, f.violations.len());
        for v in f.violations.iter().take(5) {
            println!("  {v}");
        }
        match out {
            Some(dir) => {
                let file = dir.join(format!("seed{seed}-game{}.json", f.index));
                fs::write(&file, serialize_model(&f.game)).with_context(|| format!("cannot write {}", file.display()))?;
                println!("  written to {}", file.display());
            }
            None => println!("{}", serialize_model(&f.game)),
        }
    }
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_HARNESS_FAILURE })
}
