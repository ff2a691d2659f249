//! Multi-seed benchmark harness: every (dataset, strategy, seed) cell is an
//! independent layout run; cells execute on a worker pool and failures stay
//! contained to their own record.

use std::sync::Arc;

use rayon::prelude::*;

use sorlayout_core::engine::{LayoutConfig, LayoutProblem, RelaxStrategy};
use sorlayout_core::report::{
    BenchConfig, BenchReport, DatasetConfig, RunOutcome, RunRecord,
};
use sorlayout_core::{Graph, SolverBackend};

/// One benchmark dataset: a named graph and its termination threshold.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub name: String,
    pub graph: Graph,
    pub rel_err: f64,
}

/// Everything a bench or compare invocation needs.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub datasets: Vec<DatasetSpec>,
    pub strategies: Vec<RelaxStrategy>,
    pub seeds: Vec<u64>,
    pub dimension: usize,
    pub weight_exponent: f64,
    pub solver: SolverBackend,
    pub max_iter: usize,
}

impl BenchSpec {
    pub fn seed_range(count: u64) -> Vec<u64> {
        (1..=count).collect()
    }

    fn config(&self, dataset: &DatasetSpec, strategy: &RelaxStrategy, seed: u64) -> LayoutConfig {
        LayoutConfig {
            dimension: self.dimension,
            rel_err: dataset.rel_err,
            max_iter: self.max_iter,
            seed,
            strategy: strategy.clone(),
            weight_exponent: self.weight_exponent,
            solver: self.solver,
            record_placements: false,
        }
    }

    fn report_config(&self) -> BenchConfig {
        BenchConfig {
            seeds: self.seeds.clone(),
            dimension: self.dimension,
            weight_exponent: self.weight_exponent,
            solver: self.solver.name().to_string(),
            strategies: self.strategies.iter().map(|s| s.label()).collect(),
            datasets: self
                .datasets
                .iter()
                .map(|d| DatasetConfig {
                    name: d.name.clone(),
                    vertices: d.graph.n(),
                    rel_err: d.rel_err,
                })
                .collect(),
        }
    }
}

/// Run every (dataset x strategy x seed) cell and aggregate Table-style
/// means and ratios. The prepared problem (distances, weights, factorization)
/// is shared across all cells of a dataset.
pub fn run_bench(spec: &BenchSpec) -> BenchReport {
    let mut runs = Vec::new();
    for dataset in &spec.datasets {
        let problem = LayoutProblem::new(dataset.graph.clone(), spec.weight_exponent);
        match problem {
            Ok(problem) => {
                let problem = Arc::new(problem);
                let cells: Vec<(RelaxStrategy, u64)> = spec
                    .strategies
                    .iter()
                    .flat_map(|s| spec.seeds.iter().map(move |&seed| (s.clone(), seed)))
                    .collect();
                let mut records: Vec<RunRecord> = cells
                    .into_par_iter()
                    .map(|(strategy, seed)| {
                        let cfg = spec.config(dataset, &strategy, seed);
                        let outcome = match problem.run(&cfg) {
                            Ok(trace) => RunOutcome::Completed {
                                iterations: trace.iterations(),
                                wall_seconds: trace.total_wall_seconds(),
                                final_stress: trace.final_stress(),
                                termination: trace.reason.name().to_string(),
                            },
                            Err(e) => RunOutcome::Failed {
                                message: e.to_string(),
                            },
                        };
                        RunRecord {
                            dataset: dataset.name.clone(),
                            vertices: dataset.graph.n(),
                            strategy: strategy.label(),
                            seed,
                            outcome,
                        }
                    })
                    .collect();
                runs.append(&mut records);
            }
            Err(e) => {
                // dataset-level failure: record one failed cell per run so the
                // report still shows what was attempted
                for strategy in &spec.strategies {
                    for &seed in &spec.seeds {
                        runs.push(RunRecord {
                            dataset: dataset.name.clone(),
                            vertices: dataset.graph.n(),
                            strategy: strategy.label(),
                            seed,
                            outcome: RunOutcome::Failed {
                                message: e.to_string(),
                            },
                        });
                    }
                }
            }
        }
    }
    BenchReport::from_runs(spec.report_config(), runs)
}

/// Stress-vs-iteration and stress-vs-time curve data for external plotting.
pub struct CompareData {
    /// `dataset,strategy,iteration,mean_stress,mean_cum_seconds`
    pub curves_csv: String,
    /// `dataset,strategy,target_stress,mean_iterations_to_reach,reached_fraction`
    pub targets_csv: String,
}

/// Run the grid of cells keeping full traces, then emit per-strategy mean
/// curves and iterations-to-reach-target tables.
///
/// Targets default to a geometric grid between the typical initial stress and
/// just above the worst final stress, so every strategy can reach most of
/// them. Runs that never reach a target are excluded from its mean and
/// reported through `reached_fraction`.
pub fn run_compare(spec: &BenchSpec, targets: Option<&[f64]>) -> anyhow::Result<CompareData> {
    use std::fmt::Write as _;
    let mut curves_csv = String::from("dataset,strategy,iteration,mean_stress,mean_cum_seconds\n");
    let mut targets_csv =
        String::from("dataset,strategy,target_stress,mean_iterations_to_reach,reached_fraction\n");

    for dataset in &spec.datasets {
        let problem = Arc::new(LayoutProblem::new(
            dataset.graph.clone(),
            spec.weight_exponent,
        )?);
        // (strategy index, seed) -> (stress per iteration incl. initial, cumulative seconds)
        let cells: Vec<(usize, u64)> = (0..spec.strategies.len())
            .flat_map(|i| spec.seeds.iter().map(move |&s| (i, s)))
            .collect();
        let traces: Vec<(usize, Vec<f64>, Vec<f64>)> = cells
            .into_par_iter()
            .map(|(strategy_idx, seed)| {
                let cfg = spec.config(dataset, &spec.strategies[strategy_idx], seed);
                let trace = problem.run(&cfg)?;
                let stresses = trace.stresses();
                let mut cum = Vec::with_capacity(stresses.len());
                let mut total = 0.0;
                cum.push(0.0);
                for r in &trace.records {
                    total += r.wall_seconds;
                    cum.push(total);
                }
                Ok((strategy_idx, stresses, cum))
            })
            .collect::<anyhow::Result<_>>()?;

        let auto_targets = targets.is_none().then(|| {
            let mut initials: Vec<f64> = traces.iter().map(|(_, s, _)| s[0]).collect();
            initials.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let start = 0.5 * initials[initials.len() / 2];
            let floor = traces
                .iter()
                .map(|(_, s, _)| *s.last().unwrap())
                .fold(0.0, f64::max)
                .max(1e-300);
            let lo = (1.2 * floor).min(start);
            let count = 8;
            (0..count)
                .map(|k| start * (lo / start).powf(k as f64 / (count - 1) as f64))
                .collect::<Vec<f64>>()
        });
        let targets: &[f64] = match targets {
            Some(t) => t,
            None => auto_targets.as_deref().unwrap(),
        };

        for (strategy_idx, strategy) in spec.strategies.iter().enumerate() {
            let runs: Vec<&(usize, Vec<f64>, Vec<f64>)> = traces
                .iter()
                .filter(|(i, _, _)| *i == strategy_idx)
                .collect();
            let longest = runs.iter().map(|(_, s, _)| s.len()).max().unwrap_or(0);
            for k in 0..longest {
                // shorter runs are extended with their final value
                let mean_stress: f64 = runs
                    .iter()
                    .map(|(_, s, _)| *s.get(k).unwrap_or_else(|| s.last().unwrap()))
                    .sum::<f64>()
                    / runs.len() as f64;
                let mean_cum: f64 = runs
                    .iter()
                    .map(|(_, _, c)| *c.get(k).unwrap_or_else(|| c.last().unwrap()))
                    .sum::<f64>()
                    / runs.len() as f64;
                let _ = writeln!(
                    curves_csv,
                    "{},{},{},{:.9e},{:.9e}",
                    dataset.name,
                    strategy.label(),
                    k,
                    mean_stress,
                    mean_cum
                );
            }
            for &target in targets {
                let mut reached = 0usize;
                let mut iterations = 0usize;
                for (_, stresses, _) in &runs {
                    if let Some(pos) = stresses.iter().position(|&f| f <= target) {
                        reached += 1;
                        iterations += pos;
                    }
                }
                let mean_iters = if reached > 0 {
                    format!("{:.3}", iterations as f64 / reached as f64)
                } else {
                    String::from("")
                };
                let _ = writeln!(
                    targets_csv,
                    "{},{},{:.9e},{},{:.4}",
                    dataset.name,
                    strategy.label(),
                    target,
                    mean_iters,
                    reached as f64 / runs.len().max(1) as f64
                );
            }
        }
    }
    Ok(CompareData {
        curves_csv,
        targets_csv,
    })
}
