//! Multi-seed experiment execution and artifact output.
//!
//! Layout of an output directory:
//!
//! * `seed-<S>.csv`: one row per iteration,
//!   `iter,q_1..q_n,y_1..y_n,err,delta,budget,epsilon_cum`; `delta` and
//!   `budget` are empty at iteration 0. Failed runs write what they have to
//!   `seed-<S>.partial.csv`.
//! * `oracle.json`: the reference equilibrium.
//! * `summary.json` and `summary.txt`: iterations-to-threshold statistics,
//!   failures and wall-clock times.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dpnash_core::game::{solve_ne_oracle, NeSolution};
use dpnash_core::seeker::{run, RunFailure, RunOptions, RunRecord};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, Scenario};
use crate::error::{HarnessError, Result};
use crate::summary::{summarize_row, SummaryTable};

/// Tolerance handed to the equilibrium oracle.
pub const ORACLE_TOL: f64 = 1e-10;

pub struct SeedRun {
    pub seed: u64,
    pub outcome: std::result::Result<RunRecord, RunFailure>,
    pub wall: Duration,
}

impl SeedRun {
    /// The full record, or whatever a failed run left behind.
    pub fn record(&self) -> Option<&RunRecord> {
        match &self.outcome {
            Ok(r) => Some(r),
            Err(f) => f.partial.as_deref(),
        }
    }
}

pub fn solve_oracle(sc: &Scenario) -> Result<NeSolution> {
    Ok(solve_ne_oracle(&sc.spec, ORACLE_TOL)?)
}

pub fn run_options(cfg: &RunConfig, sc: &Scenario, seed: u64) -> RunOptions {
    RunOptions::new(sc.q0.clone(), seed)
        .noise_mode(cfg.noise.into())
        .convention(cfg.convention.into())
        .m3(cfg.m3)
}

/// Runs every seed in parallel; results come back in seed-list order.
pub fn run_seeds(cfg: &RunConfig, sc: &Scenario, q_star: &[f64]) -> Vec<SeedRun> {
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let start = Instant::now();
            let outcome = run(
                &sc.spec,
                &sc.schedules,
                &sc.graphs,
                cfg.horizon,
                Some(q_star),
                &run_options(cfg, sc, seed),
            );
            SeedRun {
                seed,
                outcome,
                wall: start.elapsed(),
            }
        })
        .collect()
}

pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["iter".to_string()];
    h.extend((1..=n).map(|i| format!("q_{i}")));
    h.extend((1..=n).map(|i| format!("y_{i}")));
    h.extend(["err", "delta", "budget", "epsilon_cum"].map(String::from));
    h
}

pub fn write_csv(record: &RunRecord, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(record.n))?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for s in &record.snapshots {
        let entry = record.budget_at(s.l);
        let mut row = vec![s.l.to_string()];
        row.extend(s.q.iter().map(f64::to_string));
        row.extend(s.y.iter().map(f64::to_string));
        row.push(opt(s.error));
        row.push(opt(entry.map(|e| e.delta)));
        row.push(opt(entry.map(|e| e.budget)));
        row.push(entry.map_or(0.0, |e| e.epsilon).to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| HarnessError::io("csv", e))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct OracleFile<'a> {
    q: &'a [f64],
    residual: f64,
    iterations: usize,
    step: f64,
    linear: Option<&'a [f64]>,
    disagreement: Option<f64>,
}

pub fn oracle_json(sol: &NeSolution) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&OracleFile {
        q: sol.q.as_slice(),
        residual: sol.residual,
        iterations: sol.iterations,
        step: sol.step,
        linear: sol.linear.as_deref(),
        disagreement: sol.disagreement,
    })?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub error: String,
    pub partial_csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SummaryFile<'a> {
    scenario: &'a str,
    horizon: usize,
    noise: crate::config::NoiseSetting,
    convention: crate::config::ConventionSetting,
    table: &'a SummaryTable,
    failures: &'a [Failure],
    wall_clock_ms: Vec<(u64, f64)>,
}

pub struct ExperimentOutcome {
    pub oracle: NeSolution,
    pub runs: Vec<SeedRun>,
    pub summary: SummaryTable,
    pub failures: Vec<Failure>,
    pub csv_files: Vec<PathBuf>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

pub fn run_experiment(cfg: &RunConfig, out: &Path) -> Result<ExperimentOutcome> {
    let sc = cfg.validate()?;
    let oracle = solve_oracle(&sc)?;
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    write_file(&out.join("oracle.json"), oracle_json(&oracle)?.as_bytes())?;

    let runs = run_seeds(cfg, &sc, oracle.q.as_slice());
    let mut failures = Vec::new();
    let mut csv_files = Vec::new();
    let mut complete = Vec::new();
    for r in &runs {
        match &r.outcome {
            Ok(rec) => {
                let path = out.join(format!("seed-{}.csv", r.seed));
                let mut buf = Vec::new();
                write_csv(rec, &mut buf)?;
                write_file(&path, &buf)?;
                csv_files.push(path);
                complete.push(rec.clone());
            }
            Err(f) => {
                let partial_csv = match f.partial.as_deref() {
                    Some(rec) => {
                        let path = out.join(format!("seed-{}.partial.csv", r.seed));
                        let mut buf = Vec::new();
                        write_csv(rec, &mut buf)?;
                        write_file(&path, &buf)?;
                        Some(path)
                    }
                    None => None,
                };
                failures.push(Failure {
                    seed: r.seed,
                    error: f.error.to_string(),
                    partial_csv,
                });
            }
        }
    }

    let summary = SummaryTable {
        threshold: cfg.threshold,
        rows: if complete.is_empty() {
            Vec::new()
        } else {
            vec![summarize_row(&cfg.name, &complete, cfg.threshold)?]
        },
    };
    let file = SummaryFile {
        scenario: &cfg.name,
        horizon: cfg.horizon,
        noise: cfg.noise,
        convention: cfg.convention,
        table: &summary,
        failures: &failures,
        wall_clock_ms: runs
            .iter()
            .map(|r| (r.seed, r.wall.as_secs_f64() * 1e3))
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&file)?;
    json.push('\n');
    write_file(&out.join("summary.json"), json.as_bytes())?;

    let mut text = summary.render();
    for f in &failures {
        text += &format!("seed {} failed: {}\n", f.seed, f.error);
    }
    write_file(&out.join("summary.txt"), text.as_bytes())?;

    Ok(ExperimentOutcome {
        oracle,
        runs,
        summary,
        failures,
        csv_files,
    })
}
