//! The layout iteration loop: random initialization, majorization steps,
//! the over-relaxation combine with its acceptance guard, relax-factor
//! strategies, termination, and per-iteration tracing.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{shortest_path_distances, validate_connected, DistanceMatrix, Graph};
use crate::solver::{Majorizer, SolverBackend};
use crate::stress::{stress, stress_two, weights_with_exponent, Placement, WeightMatrix};

/// How the relaxation factor is chosen each iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum RelaxStrategy {
    /// Plain majorization, no relaxation step at all.
    NonSor,
    /// One constant factor for the whole run.
    Fixed(f64),
    /// Exhaustive search over a candidate set, picking the factor whose
    /// combined placement has the lowest stress (ties go to the smaller
    /// factor).
    Enumerating(Vec<f64>),
    /// One roulette draw per iteration from a prior distribution of
    /// (factor, probability) pairs.
    Probabilistic(Vec<(f64, f64)>),
}

impl RelaxStrategy {
    /// Candidate set {0, 0.5, 1, ..., 8.5, 9} used by the exhaustive search.
    pub fn default_candidates() -> Vec<f64> {
        (0..=18).map(|k| k as f64 * 0.5).collect()
    }

    /// Prior P(0.5) = P(1.0) = 0.3, P(1.5) = P(2.0) = 0.2.
    pub fn default_distribution() -> Vec<(f64, f64)> {
        vec![(0.5, 0.3), (1.0, 0.3), (1.5, 0.2), (2.0, 0.2)]
    }

    pub fn enumerating_default() -> Self {
        RelaxStrategy::Enumerating(Self::default_candidates())
    }

    pub fn probabilistic_default() -> Self {
        RelaxStrategy::Probabilistic(Self::default_distribution())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidGraph { reason });
        match self {
            RelaxStrategy::NonSor => Ok(()),
            RelaxStrategy::Fixed(omega) => {
                if omega.is_finite() && *omega >= 0.0 {
                    Ok(())
                } else {
                    bad(format!("relax factor {} must be finite and nonnegative", omega))
                }
            }
            RelaxStrategy::Enumerating(candidates) => {
                if candidates.is_empty() {
                    return bad("candidate set must be non-empty".into());
                }
                for &c in candidates {
                    if !c.is_finite() || c < 0.0 {
                        return bad(format!("candidate {} must be finite and nonnegative", c));
                    }
                }
                Ok(())
            }
            RelaxStrategy::Probabilistic(dist) => {
                if dist.is_empty() {
                    return bad("distribution must be non-empty".into());
                }
                let mut total = 0.0;
                for &(omega, p) in dist {
                    if !omega.is_finite() || omega < 0.0 {
                        return bad(format!("factor {} must be finite and nonnegative", omega));
                    }
                    if !(0.0..=1.0).contains(&p) {
                        return bad(format!("probability {} out of [0, 1]", p));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("probabilities sum to {}, expected 1", total));
                }
                Ok(())
            }
        }
    }

    /// Short machine-readable label used in reports: `none`, `fixed:1.5`,
    /// `enum`, `prob`.
    pub fn label(&self) -> String {
        match self {
            RelaxStrategy::NonSor => "none".into(),
            RelaxStrategy::Fixed(omega) => format!("fixed:{}", omega),
            RelaxStrategy::Enumerating(_) => "enum".into(),
            RelaxStrategy::Probabilistic(_) => "prob".into(),
        }
    }
}

/// Everything a layout run needs besides the graph itself.
#[derive(Debug, Clone)]
pub struct LayoutConfig {
    /// Embedding dimension (2 draws in the plane).
    pub dimension: usize,
    /// Terminate when the relative stress decrease of an iteration falls
    /// below this threshold.
    pub rel_err: f64,
    /// Hard iteration cap; prevents livelock when `rel_err` is below
    /// attainable precision.
    pub max_iter: usize,
    /// Seed for the deterministic generator driving initialization and the
    /// probabilistic strategy.
    pub seed: u64,
    pub strategy: RelaxStrategy,
    /// Weights are d_ij raised to this exponent.
    pub weight_exponent: f64,
    pub solver: SolverBackend,
    /// Keep a copy of the accepted placement at every iteration (used by the
    /// convergence-rate analysis).
    pub record_placements: bool,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            dimension: 2,
            rel_err: 1e-6,
            max_iter: 10_000,
            seed: 1,
            strategy: RelaxStrategy::NonSor,
            weight_exponent: -2.0,
            solver: SolverBackend::Auto,
            record_placements: false,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidGraph {
                reason: "dimension must be at least 1".into(),
            });
        }
        if !self.rel_err.is_finite() || self.rel_err <= 0.0 {
            return Err(Error::InvalidGraph {
                reason: format!("rel_err {} must be positive and finite", self.rel_err),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidGraph {
                reason: "max_iter must be at least 1".into(),
            });
        }
        if !self.weight_exponent.is_finite() {
            return Err(Error::InvalidGraph {
                reason: "weight exponent must be finite".into(),
            });
        }
        self.strategy.validate()
    }

    /// Solver tolerance two orders below the termination threshold, so solver
    /// error never masks the stress decrease.
    pub fn cg_tol(&self) -> f64 {
        0.01 * self.rel_err
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    /// Relative stress decrease fell below `rel_err`.
    Converged,
    /// Stress reached exactly zero.
    StressZero,
    /// The iteration cap was hit first.
    MaxIterations,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            TerminationReason::Converged => "converged",
            TerminationReason::StressZero => "stress-zero",
            TerminationReason::MaxIterations => "max-iterations",
        }
    }
}

/// One iteration of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Stress of the placement kept at the end of the iteration.
    pub stress: f64,
    /// Relax factor used (0 for the plain algorithm).
    pub omega: f64,
    /// Whether the relaxed candidate passed the guard and was kept.
    pub accepted: bool,
    /// Stress of the unrelaxed majorization result, for guard diagnostics.
    pub stress_unrelaxed: f64,
    /// Wall-clock time of the full loop body.
    pub wall_seconds: f64,
}

/// Complete record of one layout run.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub initial_stress: f64,
    pub records: Vec<IterationRecord>,
    pub final_placement: Placement,
    pub reason: TerminationReason,
    /// Accepted placement after every iteration, present only when
    /// `record_placements` was set.
    pub placements: Option<Vec<Placement>>,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_stress(&self) -> f64 {
        self.records.last().map_or(self.initial_stress, |r| r.stress)
    }

    /// Stress sequence including the initial placement's value.
    pub fn stresses(&self) -> Vec<f64> {
        std::iter::once(self.initial_stress)
            .chain(self.records.iter().map(|r| r.stress))
            .collect()
    }

    pub fn total_wall_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.wall_seconds).sum()
    }
}

/// Uniform random placement on the unit square (one uniform draw per
/// coordinate), then the whole placement is shifted so vertex 0 sits at the
/// origin. Identical seeds give bit-identical placements.
pub fn init_placement(n: usize, dim: usize, seed: u64) -> Placement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    init_with_rng(n, dim, &mut rng)
}

fn init_with_rng(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Placement {
    assert!(n >= 1 && dim >= 1);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    let mut placement = Placement::new(n, dim, coords).expect("finite coordinates");
    placement.translate_to_origin(0);
    placement
}

/// The relaxation combine: x_next + omega * (x_next - x_prev), elementwise
/// (the extrapolation form of (1 + omega) x_next - omega x_prev). A zero
/// factor returns `x_next` unchanged.
pub fn sor_combine(x_next: &Placement, x_prev: &Placement, omega: f64) -> Placement {
    assert_eq!(x_next.n(), x_prev.n(), "placement shapes must agree");
    assert_eq!(x_next.dim(), x_prev.dim(), "placement shapes must agree");
    if omega == 0.0 {
        return x_next.clone();
    }
    let mut combined = x_next.clone();
    for ((c, a), b) in combined
        .coords_mut()
        .iter_mut()
        .zip(x_next.coords())
        .zip(x_prev.coords())
    {
        *c = a + omega * (a - b);
    }
    combined
}

/// Inputs available to a relax-factor strategy when choosing omega.
pub struct OmegaContext<'a> {
    pub x_next: &'a Placement,
    pub x_prev: &'a Placement,
    pub dist: &'a DistanceMatrix,
    pub weights: &'a WeightMatrix,
    pub rng: &'a mut ChaCha8Rng,
}

/// Outcome of a strategy's choice.
pub struct OmegaChoice {
    pub omega: f64,
    /// Number of stress evaluations the choice itself cost.
    pub evaluations: usize,
    /// For the exhaustive search: the winning combined placement and its
    /// stress, so the caller does not evaluate it again.
    pub best: Option<(Placement, f64)>,
    /// Stress of the unrelaxed placement when the search already computed it
    /// (the zero candidate).
    pub unrelaxed: Option<f64>,
}

/// Pick a relax factor for this iteration.
pub fn choose_omega(strategy: &RelaxStrategy, ctx: &mut OmegaContext<'_>) -> OmegaChoice {
    match strategy {
        RelaxStrategy::NonSor => OmegaChoice {
            omega: 0.0,
            evaluations: 0,
            best: None,
            unrelaxed: None,
        },
        RelaxStrategy::Fixed(omega) => OmegaChoice {
            omega: *omega,
            evaluations: 0,
            best: None,
            unrelaxed: None,
        },
        RelaxStrategy::Enumerating(candidates) => {
            let mut best: Option<(f64, Placement, f64)> = None;
            let mut unrelaxed = None;
            for &omega in candidates {
                let candidate = sor_combine(ctx.x_next, ctx.x_prev, omega);
                let f = stress(&candidate, ctx.dist, ctx.weights);
                if omega == 0.0 {
                    unrelaxed = Some(f);
                }
                let better = match &best {
                    None => true,
                    Some((best_omega, _, best_f)) => {
                        f < *best_f || (f == *best_f && omega < *best_omega)
                    }
                };
                if better {
                    best = Some((omega, candidate, f));
                }
            }
            let (omega, placement, f) = best.expect("candidate set is non-empty");
            OmegaChoice {
                omega,
                evaluations: candidates.len(),
                best: Some((placement, f)),
                unrelaxed,
            }
        }
        RelaxStrategy::Probabilistic(dist) => {
            // One roulette spin per iteration.
            let u: f64 = ctx.rng.random();
            let mut cumulative = 0.0;
            let mut omega = dist.last().map(|&(o, _)| o).unwrap_or(0.0);
            for &(o, p) in dist {
                cumulative += p;
                if u < cumulative {
                    omega = o;
                    break;
                }
            }
            OmegaChoice {
                omega,
                evaluations: 0,
                best: None,
                unrelaxed: None,
            }
        }
    }
}

/// A graph prepared for layout: ideal distances, weights, and the factorized
/// reduced system, all reusable across runs with different seeds or
/// strategies.
#[derive(Debug, Clone)]
pub struct LayoutProblem {
    graph: Graph,
    weight_exponent: f64,
    majorizer: Majorizer,
}

impl LayoutProblem {
    pub fn new(graph: Graph, weight_exponent: f64) -> Result<Self> {
        validate_connected(&graph)?;
        let dist = shortest_path_distances(&graph)?;
        let weights = weights_with_exponent(&dist, weight_exponent);
        let majorizer = Majorizer::new(weights, dist)?;
        Ok(LayoutProblem {
            graph,
            weight_exponent,
            majorizer,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn weight_exponent(&self) -> f64 {
        self.weight_exponent
    }

    pub fn dist(&self) -> &DistanceMatrix {
        self.majorizer.dist()
    }

    pub fn weights(&self) -> &WeightMatrix {
        self.majorizer.weights()
    }

    pub fn system_checksum(&self) -> u64 {
        self.majorizer.system().checksum()
    }

    pub fn stress(&self, x: &Placement) -> f64 {
        stress(x, self.dist(), self.weights())
    }

    /// One plain majorization step (used by the convergence analysis).
    pub fn step(&self, x: &Placement, backend: SolverBackend, cg_tol: f64) -> Result<Placement> {
        self.majorizer.step(x, backend, cg_tol)
    }

    /// Run the full iteration loop. The problem's distances and weights are
    /// used as built; `cfg.weight_exponent` only matters when the problem is
    /// constructed from the config.
    pub fn run(&self, cfg: &LayoutConfig) -> Result<IterationTrace> {
        cfg.validate()?;
        let n = self.n();
        let dist = self.dist();
        let weights = self.weights();
        let backend = cfg.solver.resolve(n);
        let cg_tol = cfg.cg_tol();

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut x = init_with_rng(n, cfg.dimension, &mut rng);
        let mut f_current = stress(&x, dist, weights);
        let mut records = Vec::new();
        let mut snapshots = cfg.record_placements.then(Vec::new);

        if f_current == 0.0 {
            return Ok(IterationTrace {
                initial_stress: f_current,
                records,
                final_placement: x,
                reason: TerminationReason::StressZero,
                placements: snapshots,
            });
        }
        let initial_stress = f_current;

        let mut reason = TerminationReason::MaxIterations;
        for iteration in 1..=cfg.max_iter {
            let started = Instant::now();
            let x_next = self.majorizer.step(&x, backend, cg_tol)?;

            let (kept, f_kept, omega, accepted, f_unrelaxed) = match &cfg.strategy {
                RelaxStrategy::NonSor => {
                    let f_next = stress(&x_next, dist, weights);
                    (x_next, f_next, 0.0, false, f_next)
                }
                strategy => {
                    let mut ctx = OmegaContext {
                        x_next: &x_next,
                        x_prev: &x,
                        dist,
                        weights,
                        rng: &mut rng,
                    };
                    let choice = choose_omega(strategy, &mut ctx);
                    let (relaxed, f_relaxed, f_next) = match choice.best {
                        Some((placement, f)) => {
                            let f_next = match choice.unrelaxed {
                                Some(f) => f,
                                None => stress(&x_next, dist, weights),
                            };
                            (placement, f, f_next)
                        }
                        None => {
                            let relaxed = sor_combine(&x_next, &x, choice.omega);
                            // fused pass; values are bit-identical to two
                            // standalone stress evaluations
                            let (f_next, f_relaxed) =
                                stress_two(&x_next, &relaxed, dist, weights);
                            (relaxed, f_relaxed, f_next)
                        }
                    };
                    // the guard: keep the combined placement only if it does
                    // not deteriorate (ties accept it)
                    if f_relaxed <= f_next {
                        (relaxed, f_relaxed, choice.omega, true, f_next)
                    } else {
                        (x_next, f_next, choice.omega, false, f_next)
                    }
                }
            };

            let wall_seconds = started.elapsed().as_secs_f64();
            records.push(IterationRecord {
                stress: f_kept,
                omega,
                accepted,
                stress_unrelaxed: f_unrelaxed,
                wall_seconds,
            });
            if let Some(s) = snapshots.as_mut() {
                s.push(kept.clone());
            }

            if !f_kept.is_finite() {
                return Err(Error::NonFinite {
                    iteration,
                    trace: Box::new(IterationTrace {
                        initial_stress,
                        records,
                        final_placement: kept,
                        reason: TerminationReason::MaxIterations,
                        placements: snapshots,
                    }),
                });
            }

            x = kept;
            let f_previous = f_current;
            f_current = f_kept;

            if f_current == 0.0 {
                reason = TerminationReason::StressZero;
                break;
            }
            if (f_previous - f_current) / f_previous < cfg.rel_err {
                reason = TerminationReason::Converged;
                break;
            }
        }

        Ok(IterationTrace {
            initial_stress,
            records,
            final_placement: x,
            reason,
            placements: snapshots,
        })
    }
}

/// Lay out a connected graph from scratch: validates connectivity, computes
/// shortest-path ideal distances and weights, factorizes the reduced system
/// once, and iterates until termination.
pub fn run_layout(g: &Graph, cfg: &LayoutConfig) -> Result<IterationTrace> {
    cfg.validate()?;
    let problem = LayoutProblem::new(g.clone(), cfg.weight_exponent)?;
    problem.run(cfg)
}
