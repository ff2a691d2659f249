//! Numerical verification of the linear convergence rate: the spectral radius
//! of the iteration map's Jacobian at the converged placement, estimated by
//! finite-difference power iteration, against the contraction factor fitted
//! from the run's own error sequence.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{IterationTrace, LayoutConfig, LayoutProblem};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::stress::Placement;

/// Both rate estimates for one converged run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Spectral-radius estimate of the iteration map's Jacobian at the fixed
    /// point; below 1 means the fixed point attracts.
    pub estimated_radius: f64,
    /// Per-iteration error contraction factor fitted from the trace.
    pub observed_rate: f64,
    /// RMS residual of the log-error regression (small means a clean linear
    /// tail).
    pub fit_quality: f64,
    /// Number of trace points the fit used.
    pub iterations_used: usize,
}

/// Default finite-difference step: 1e-5 * (1 + ||x*||).
pub fn default_step(x_star: &Placement) -> f64 {
    1e-5 * (1.0 + x_star.norm())
}

const POWER_MAX_ITER: usize = 200;
const POWER_SETTLE_TOL: f64 = 1e-4;

/// Estimate the spectral radius of the majorization map's Jacobian at
/// `x_star` by power iteration on v -> (H(x* + h v) - H(x*)) / h.
///
/// Directions live in the pinned subspace (row 0 fixed at the origin), which
/// removes the translation modes; in two or more dimensions the rotation
/// modes x* A (A antisymmetric) are projected out, since the stress is
/// invariant under isometries and those directions would report a spurious
/// unit eigenvalue.
pub fn estimate_spectral_radius(
    g: &Graph,
    cfg: &LayoutConfig,
    x_star: &Placement,
    h: f64,
) -> Result<f64> {
    assert!(h > 0.0, "step size must be positive");
    let problem = LayoutProblem::new(g.clone(), cfg.weight_exponent)?;
    estimate_spectral_radius_of(&problem, cfg, x_star, h)
}

/// Same as [`estimate_spectral_radius`] but reusing an existing problem.
pub fn estimate_spectral_radius_of(
    problem: &LayoutProblem,
    cfg: &LayoutConfig,
    x_star: &Placement,
    h: f64,
) -> Result<f64> {
    assert!(h > 0.0, "step size must be positive");
    let n = x_star.n();
    let dim = x_star.dim();
    assert_eq!(problem.n(), n, "placement does not match the graph");
    let backend = crate::solver::SolverBackend::Direct;
    let cg_tol = cfg.cg_tol();

    let rotation_modes = orthonormal_rotation_modes(x_star);
    let project = |v: &mut Vec<f64>| {
        for c in v.iter_mut().take(dim) {
            *c = 0.0;
        }
        for mode in &rotation_modes {
            let dot: f64 = v.iter().zip(mode).map(|(a, b)| a * b).sum();
            for (vi, mi) in v.iter_mut().zip(mode) {
                *vi -= dot * mi;
            }
        }
    };

    let h_star = problem.step(x_star, backend, cg_tol)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut v: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>() - 0.5).collect();
    project(&mut v);
    normalize(&mut v);

    let mut estimate = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let mut perturbed = x_star.clone();
        for (c, vi) in perturbed.coords_mut().iter_mut().zip(&v) {
            *c += h * vi;
        }
        let image = problem.step(&perturbed, backend, cg_tol)?;
        let mut u: Vec<f64> = image
            .coords()
            .iter()
            .zip(h_star.coords())
            .map(|(a, b)| (a - b) / h)
            .collect();
        project(&mut u);
        let growth = norm(&u);
        if estimate.is_finite() && (growth - estimate).abs() < POWER_SETTLE_TOL {
            return Ok(growth);
        }
        estimate = growth;
        if growth < 1e-9 {
            // The map is locally constant along every remaining direction.
            return Ok(growth);
        }
        v = u;
        normalize(&mut v);
    }
    Err(Error::NoConvergence {
        iterations: POWER_MAX_ITER,
        residual: estimate,
    })
}

/// Observed contraction: least-squares slope of log ||X_k - x*|| over the
/// tail of the trace, after optimal orthogonal alignment to `x_star`.
/// Returns the per-iteration factor e^slope, the RMS regression residual,
/// and the number of points used.
pub fn observed_rate(trace: &IterationTrace, x_star: &Placement) -> Result<ObservedRate> {
    let snapshots = trace.placements.as_deref().unwrap_or(&[]);
    let errors: Vec<f64> = snapshots
        .iter()
        .map(|x| aligned_distance(x, x_star))
        .collect();
    observed_rate_from_errors(&errors)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedRate {
    pub rate: f64,
    pub fit_quality: f64,
    pub iterations_used: usize,
}

/// Fit on a raw error sequence (exposed for synthetic sequences in tests).
pub fn observed_rate_from_errors(errors: &[f64]) -> Result<ObservedRate> {
    const MIN_POINTS: usize = 5;
    const MAX_WINDOW: usize = 40;
    let scale = errors.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-12 * (1.0 + scale);
    let usable: Vec<(usize, f64)> = errors
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > floor)
        .map(|(k, &e)| (k, e.ln()))
        .collect();
    if usable.len() < MIN_POINTS {
        return Err(Error::InsufficientTail {
            usable: usable.len(),
            needed: MIN_POINTS,
        });
    }
    let window = &usable[usable.len().saturating_sub(MAX_WINDOW)..];

    // least squares for ln e = a + slope * k
    let m = window.len() as f64;
    let sum_k: f64 = window.iter().map(|(k, _)| *k as f64).sum();
    let sum_y: f64 = window.iter().map(|(_, y)| *y).sum();
    let sum_kk: f64 = window.iter().map(|(k, _)| (*k as f64) * (*k as f64)).sum();
    let sum_ky: f64 = window.iter().map(|(k, y)| (*k as f64) * y).sum();
    let denom = m * sum_kk - sum_k * sum_k;
    let slope = (m * sum_ky - sum_k * sum_y) / denom;
    let intercept = (sum_y - slope * sum_k) / m;
    let residual_sq: f64 = window
        .iter()
        .map(|(k, y)| {
            let fit = intercept + slope * (*k as f64);
            (y - fit) * (y - fit)
        })
        .sum::<f64>()
        / m;

    Ok(ObservedRate {
        rate: slope.exp(),
        fit_quality: residual_sq.sqrt(),
        iterations_used: window.len(),
    })
}

/// Frobenius distance between two placements after the best orthogonal
/// alignment of `x` onto `target` (rotations and reflections about the pinned
/// origin; the stress is invariant under them, so raw differences would
/// contaminate the rate).
pub fn aligned_distance(x: &Placement, target: &Placement) -> f64 {
    assert_eq!(x.n(), target.n());
    assert_eq!(x.dim(), target.dim());
    let n = x.n();
    let dim = x.dim();
    if dim == 1 {
        let direct: f64 = (0..n)
            .map(|i| (x.row(i)[0] - target.row(i)[0]).powi(2))
            .sum::<f64>()
            .sqrt();
        let mirrored: f64 = (0..n)
            .map(|i| (-x.row(i)[0] - target.row(i)[0]).powi(2))
            .sum::<f64>()
            .sqrt();
        return direct.min(mirrored);
    }
    let xm = DMatrix::from_row_slice(n, dim, x.coords());
    let tm = DMatrix::from_row_slice(n, dim, target.coords());
    let m = xm.transpose() * &tm;
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    let q = u * vt;
    (xm * q - tm).norm()
}

/// Orthonormal basis of the rotation tangent directions x* A at the fixed
/// point, one generator per coordinate pair. Empty in one dimension.
fn orthonormal_rotation_modes(x_star: &Placement) -> Vec<Vec<f64>> {
    let n = x_star.n();
    let dim = x_star.dim();
    let mut modes: Vec<Vec<f64>> = Vec::new();
    for a in 0..dim {
        for b in (a + 1)..dim {
            // generator: e_a <- e_b, e_b <- -e_a
            let mut mode = vec![0.0; n * dim];
            for i in 0..n {
                let row = x_star.row(i);
                mode[i * dim + a] = row[b];
                mode[i * dim + b] = -row[a];
            }
            // Gram-Schmidt against the accepted modes
            for prev in &modes {
                let dot: f64 = mode.iter().zip(prev.iter()).map(|(x, y)| x * y).sum();
                for (mi, pi) in mode.iter_mut().zip(prev.iter()) {
                    *mi -= dot * pi;
                }
            }
            let len = norm(&mode);
            if len > 1e-12 {
                for m in &mut mode {
                    *m /= len;
                }
                modes.push(mode);
            }
        }
    }
    modes
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let len = norm(v);
    if len > 0.0 {
        for x in v.iter_mut() {
            *x /= len;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_layout, RelaxStrategy};

    fn tight_cfg(dim: usize, seed: u64) -> LayoutConfig {
        LayoutConfig {
            dimension: dim,
            rel_err: 1e-12,
            seed,
            strategy: RelaxStrategy::NonSor,
            record_placements: true,
            ..LayoutConfig::default()
        }
    }

    fn converge(g: &Graph, cfg: &LayoutConfig) -> (IterationTrace, Placement) {
        let problem = LayoutProblem::new(g.clone(), cfg.weight_exponent).unwrap();
        let trace = problem.run(cfg).unwrap();
        // polish the fixed point well past the traced run
        let mut x = trace.final_placement.clone();
        for _ in 0..300 {
            let next = problem
                .step(&x, crate::solver::SolverBackend::Direct, 1e-14)
                .unwrap();
            let moved = aligned_distance(&next, &x);
            x = next;
            if moved < 1e-15 * (1.0 + x.norm()) {
                break;
            }
        }
        (trace, x)
    }

    #[test]
    fn single_edge_radius_is_zero() {
        // One majorization step lands exactly on the minimizer of this
        // one-unknown problem, so the map is locally constant.
        let g = Graph::unit(2, &[(0, 1)]).unwrap();
        let cfg = tight_cfg(1, 4);
        let (_, x_star) = converge(&g, &cfg);
        let h = default_step(&x_star);
        let radius = estimate_spectral_radius(&g, &cfg, &x_star, h).unwrap();
        assert!(radius < 0.05, "radius {}", radius);
    }

    #[test]
    fn p3_radius_within_unit_interval() {
        let g = Graph::unit(3, &[(0, 1), (1, 2)]).unwrap();
        let cfg = tight_cfg(1, 8);
        let (_, x_star) = converge(&g, &cfg);
        let radius =
            estimate_spectral_radius(&g, &cfg, &x_star, default_step(&x_star)).unwrap();
        assert!((0.0..1.0).contains(&radius), "radius {}", radius);
    }

    #[test]
    fn finite_difference_step_consistency() {
        // C4 in the plane has a positive stress floor and a genuinely nonzero
        // radius, so the relative comparison is meaningful.
        let g = Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let cfg = tight_cfg(2, 2);
        let (_, x_star) = converge(&g, &cfg);
        let h = default_step(&x_star);
        let r1 = estimate_spectral_radius(&g, &cfg, &x_star, h).unwrap();
        let r2 = estimate_spectral_radius(&g, &cfg, &x_star, h / 2.0).unwrap();
        assert!(
            (r1 - r2).abs() <= 0.1 * r1.max(r2).max(1e-6),
            "h-sensitivity: {} vs {}",
            r1,
            r2
        );
    }

    #[test]
    fn synthetic_geometric_sequence_recovers_rate() {
        let r: f64 = 0.63;
        let errors: Vec<f64> = (0..30).map(|k| r.powi(k)).collect();
        let fit = observed_rate_from_errors(&errors).unwrap();
        assert!((fit.rate - r).abs() < 1e-9, "rate {}", fit.rate);
        assert!(fit.fit_quality < 1e-9);
    }

    #[test]
    fn synthetic_constant_sequence_reports_unit_rate() {
        let errors = vec![0.5; 20];
        let fit = observed_rate_from_errors(&errors).unwrap();
        assert!((fit.rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_short_tail_is_an_error() {
        let errors = vec![1.0, 0.5, 0.25];
        assert!(matches!(
            observed_rate_from_errors(&errors),
            Err(Error::InsufficientTail { usable: 3, .. })
        ));
    }

    #[test]
    fn one_dimensional_runs_converge_in_finitely_many_steps() {
        // In one dimension the majorization right-hand side depends only on
        // the coordinate ordering, so the map is piecewise constant: the run
        // lands exactly on a fixed point after a handful of steps. There is
        // no asymptotic tail to fit, and the local radius is zero.
        let g = Graph::unit(3, &[(0, 1), (1, 2)]).unwrap();
        let cfg = tight_cfg(1, 2);
        let (trace, x_star) = converge(&g, &cfg);
        assert!(trace.iterations() < 20);
        let estimated =
            estimate_spectral_radius(&g, &cfg, &x_star, default_step(&x_star)).unwrap();
        assert!(estimated < 0.05, "radius {}", estimated);
        assert!(matches!(
            observed_rate(&trace, &x_star),
            Err(Error::InsufficientTail { .. })
        ));
    }

    #[test]
    fn c4_observed_matches_estimated() {
        // The two estimators are independent routes to the same rate; on C4
        // in the plane they agree to a few parts per thousand.
        let g = Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        for seed in [2u64, 11] {
            let cfg = tight_cfg(2, seed);
            let (trace, x_star) = converge(&g, &cfg);
            let estimated =
                estimate_spectral_radius(&g, &cfg, &x_star, default_step(&x_star)).unwrap();
            let observed = observed_rate(&trace, &x_star).unwrap();
            assert!(observed.fit_quality < 0.1, "quality {}", observed.fit_quality);
            assert!(
                (observed.rate - estimated).abs() <= 0.2,
                "observed {} vs estimated {}",
                observed.rate,
                estimated
            );
        }
    }

    #[test]
    fn run_layout_then_rate_in_two_dimensions() {
        let g = crate::graph::generate_grid(9).unwrap();
        let cfg = tight_cfg(2, 6);
        let trace = run_layout(&g, &cfg).unwrap();
        let (_, x_star) = converge(&g, &cfg);
        let estimated =
            estimate_spectral_radius(&g, &cfg, &x_star, default_step(&x_star)).unwrap();
        assert!(estimated < 1.0, "radius {}", estimated);
        match observed_rate(&trace, &x_star) {
            Ok(fit) => {
                assert!(fit.rate > 0.0);
                assert!(fit.iterations_used >= 5);
            }
            Err(Error::InsufficientTail { .. }) => {}
            Err(e) => panic!("unexpected error {:?}", e),
        }
    }
}

