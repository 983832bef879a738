//! Iterations-to-threshold tables and topology density.

use dpnash_core::graph::GraphSchedule;
use dpnash_core::seeker::RunRecord;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    /// First iteration with error below the threshold.
    pub crossing: Option<usize>,
    /// Per-iteration budget at the crossing.
    pub budget_at_crossing: Option<f64>,
    /// Cumulative budget at the crossing.
    pub epsilon_at_crossing: Option<f64>,
    pub final_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub seeds: usize,
    pub reached: usize,
    pub crossing_median: Option<f64>,
    pub crossing_min: Option<usize>,
    pub crossing_max: Option<usize>,
    pub budget_at_crossing_median: Option<f64>,
    pub final_error_median: Option<f64>,
    pub final_error_min: Option<f64>,
    pub final_error_max: Option<f64>,
    /// Sorted by seed.
    pub per_seed: Vec<SeedSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub threshold: f64,
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<20} {:>7} {:>9} {:>12} {:>12} {:>14}\n",
            "scenario", "reached", "median", "range", "budget", "final error"
        );
        let opt =
            |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |x| format!("{x:.prec$e}"));
        for r in &self.rows {
            let range = match (r.crossing_min, r.crossing_max) {
                (Some(a), Some(b)) => format!("{a}..{b}"),
                _ => "not reached".into(),
            };
            out += &format!(
                "{:<20} {:>7} {:>9} {:>12} {:>12} {:>14}\n",
                r.scenario,
                format!("{}/{}", r.reached, r.seeds),
                r.crossing_median.map_or("-".into(), |m| format!("{m}")),
                range,
                opt(r.budget_at_crossing_median, 4),
                opt(r.final_error_median, 4),
            );
        }
        out
    }
}

/// First iteration whose error is below `threshold`.
pub fn crossing(record: &RunRecord, threshold: f64) -> Option<usize> {
    record
        .snapshots
        .iter()
        .find(|s| s.error.is_some_and(|e| e < threshold))
        .map(|s| s.l)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

pub fn summarize_row(scenario: &str, records: &[RunRecord], threshold: f64) -> Result<SummaryRow> {
    if records.is_empty() {
        return Err(HarnessError::Invalid("nothing to summarize".into()));
    }
    let mut per_seed: Vec<SeedSummary> = records
        .iter()
        .map(|r| {
            let c = crossing(r, threshold);
            let entry = c.and_then(|l| r.budget_at(l));
            SeedSummary {
                seed: r.seed,
                crossing: c,
                budget_at_crossing: entry.map(|e| e.budget),
                epsilon_at_crossing: entry.map(|e| e.epsilon),
                final_error: r.final_error(),
            }
        })
        .collect();
    per_seed.sort_by_key(|s| s.seed);

    let crossings: Vec<usize> = per_seed.iter().filter_map(|s| s.crossing).collect();
    let finals: Vec<f64> = per_seed.iter().filter_map(|s| s.final_error).collect();
    Ok(SummaryRow {
        scenario: scenario.to_string(),
        seeds: per_seed.len(),
        reached: crossings.len(),
        crossing_median: median(crossings.iter().map(|&c| c as f64).collect()),
        crossing_min: crossings.iter().min().copied(),
        crossing_max: crossings.iter().max().copied(),
        budget_at_crossing_median: median(
            per_seed
                .iter()
                .filter_map(|s| s.budget_at_crossing)
                .collect(),
        ),
        final_error_median: median(finals.clone()),
        final_error_min: finals.iter().copied().reduce(f64::min),
        final_error_max: finals.iter().copied().reduce(f64::max),
        per_seed,
    })
}

/// One-row table for a set of runs of the same scenario.
pub fn summarize(scenario: &str, records: &[RunRecord], threshold: f64) -> Result<SummaryTable> {
    Ok(SummaryTable {
        threshold,
        rows: vec![summarize_row(scenario, records, threshold)?],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    /// Edge count per phase, self-loops excluded.
    pub edges: Vec<usize>,
    /// `edges / (n (n - 1))` per phase.
    pub density: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn density_report(s: &GraphSchedule) -> DensityReport {
    let edges: Vec<usize> = s.graphs().iter().map(|g| g.edge_count()).collect();
    let density: Vec<f64> = s.graphs().iter().map(|g| g.density()).collect();
    DensityReport {
        min: density.iter().copied().fold(f64::INFINITY, f64::min),
        max: density.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        edges,
        density,
    }
}
