//! Machine-readable benchmark reports: per-run records, per-strategy
//! aggregates, and ratios against the plain (no-relaxation) baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of the baseline strategy every ratio is computed against.
pub const BASELINE_STRATEGY: &str = "none";

/// Echo of the benchmark configuration, enough to reproduce the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seeds: Vec<u64>,
    pub dimension: usize,
    pub weight_exponent: f64,
    pub solver: String,
    pub strategies: Vec<String>,
    pub datasets: Vec<DatasetConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub name: String,
    pub vertices: usize,
    pub rel_err: f64,
}

/// One (dataset, strategy, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub vertices: usize,
    pub strategy: String,
    pub seed: u64,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunOutcome {
    Completed {
        iterations: usize,
        wall_seconds: f64,
        final_stress: f64,
        termination: String,
    },
    Failed {
        message: String,
    },
}

/// Means over the completed seeds of one (dataset, strategy) cell, with
/// ratios against the dataset's baseline row. The baseline's own ratios are
/// exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub strategy: String,
    pub completed_runs: usize,
    pub failed_runs: usize,
    pub mean_iterations: f64,
    pub mean_wall_seconds: f64,
    /// Mean wall time of one iteration: total time over total iterations.
    pub mean_iteration_seconds: f64,
    pub iteration_ratio: Option<f64>,
    pub time_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
}

impl BenchReport {
    /// Aggregate raw run records. Rows follow the dataset and strategy order
    /// of the config; ratios are taken against the `none` row of the same
    /// dataset when present.
    pub fn from_runs(config: BenchConfig, runs: Vec<RunRecord>) -> Self {
        let mut aggregates = Vec::new();
        for dataset in &config.datasets {
            let mut rows = Vec::new();
            for strategy in &config.strategies {
                let cell: Vec<&RunRecord> = runs
                    .iter()
                    .filter(|r| r.dataset == dataset.name && &r.strategy == strategy)
                    .collect();
                let mut iterations = 0usize;
                let mut wall = 0.0;
                let mut completed = 0usize;
                let mut failed = 0usize;
                for r in &cell {
                    match &r.outcome {
                        RunOutcome::Completed {
                            iterations: it,
                            wall_seconds,
                            ..
                        } => {
                            completed += 1;
                            iterations += it;
                            wall += wall_seconds;
                        }
                        RunOutcome::Failed { .. } => failed += 1,
                    }
                }
                let denom = completed.max(1) as f64;
                rows.push(AggregateRow {
                    dataset: dataset.name.clone(),
                    strategy: strategy.clone(),
                    completed_runs: completed,
                    failed_runs: failed,
                    mean_iterations: iterations as f64 / denom,
                    mean_wall_seconds: wall / denom,
                    mean_iteration_seconds: if iterations > 0 {
                        wall / iterations as f64
                    } else {
                        0.0
                    },
                    iteration_ratio: None,
                    time_ratio: None,
                });
            }
            let baseline = rows
                .iter()
                .find(|r| r.strategy == BASELINE_STRATEGY && r.completed_runs > 0)
                .map(|r| (r.mean_iterations, r.mean_wall_seconds));
            if let Some((base_iters, base_wall)) = baseline {
                for row in &mut rows {
                    if row.completed_runs > 0 {
                        if base_iters > 0.0 {
                            row.iteration_ratio = Some(row.mean_iterations / base_iters);
                        }
                        if base_wall > 0.0 {
                            row.time_ratio = Some(row.mean_wall_seconds / base_wall);
                        }
                    }
                }
            }
            aggregates.extend(rows);
        }
        BenchReport {
            config,
            runs,
            aggregates,
        }
    }

    pub fn aggregate(&self, dataset: &str, strategy: &str) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|r| r.dataset == dataset && r.strategy == strategy)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ParseError {
            line: e.line(),
            reason: e.to_string(),
        })
    }

    /// Copy with every wall-clock field zeroed and time ratios dropped, for
    /// byte-level determinism comparisons.
    pub fn strip_timings(&self) -> Self {
        let mut stripped = self.clone();
        for run in &mut stripped.runs {
            if let RunOutcome::Completed { wall_seconds, .. } = &mut run.outcome {
                *wall_seconds = 0.0;
            }
        }
        for row in &mut stripped.aggregates {
            row.mean_wall_seconds = 0.0;
            row.mean_iteration_seconds = 0.0;
            row.time_ratio = None;
        }
        stripped
    }

    /// Aligned plain-text summary: one block per dataset with an iteration
    /// row and a running-time row, `value/ratio%` per strategy.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let strategies = &self.config.strategies;
        let width = 18usize;
        out.push_str(&format!(
            "{:<12} {:>7} {:>8}  {:<14}",
            "dataset", "n", "rel err", "metric"
        ));
        for s in strategies {
            out.push_str(&format!(" {:>width$}", s, width = width));
        }
        out.push('\n');
        for dataset in &self.config.datasets {
            for (metric, value, ratio) in [
                (
                    "num of iter",
                    (|r: &AggregateRow| format!("{:.1}", r.mean_iterations))
                        as fn(&AggregateRow) -> String,
                    (|r: &AggregateRow| r.iteration_ratio) as fn(&AggregateRow) -> Option<f64>,
                ),
                (
                    "running time",
                    |r: &AggregateRow| format!("{:.3}", r.mean_wall_seconds),
                    |r: &AggregateRow| r.time_ratio,
                ),
            ] {
                out.push_str(&format!(
                    "{:<12} {:>7} {:>8.0e}  {:<14}",
                    dataset.name, dataset.vertices, dataset.rel_err, metric
                ));
                for strategy in strategies {
                    let cell = match self.aggregate(&dataset.name, strategy) {
                        Some(row) if row.completed_runs > 0 => match ratio(row) {
                            Some(q) => format!("{}/{:.1}%", value(row), 100.0 * q),
                            None => value(row),
                        },
                        _ => "-".to_string(),
                    };
                    out.push_str(&format!(" {:>width$}", cell, width = width));
                }
                out.push('\n');
            }
        }
        out
    }
}
