//! Per-iteration linear systems L^W X = L^Y Y, solved through the
//! fix-one-vertex reduction with a factor-once direct backend and a
//! warm-started conjugate-gradient backend.

use std::hash::{Hash, Hasher};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::graph::DistanceMatrix;
use crate::stress::{iteration_rhs, Placement, WeightMatrix};

/// Which linear solver drives the majorization step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverBackend {
    /// Resolves to `Direct` for up to 2000 vertices, `ConjugateGradient` above.
    #[default]
    Auto,
    Direct,
    ConjugateGradient,
}

impl SolverBackend {
    pub fn resolve(self, n: usize) -> SolverBackend {
        match self {
            SolverBackend::Auto => {
                if n <= 2000 {
                    SolverBackend::Direct
                } else {
                    SolverBackend::ConjugateGradient
                }
            }
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverBackend::Auto => "auto",
            SolverBackend::Direct => "direct",
            SolverBackend::ConjugateGradient => "cg",
        }
    }
}

/// Residual contract of the direct solve, relative to 1 + ||rhs||.
const DIRECT_RESIDUAL_TOL: f64 = 1e-10;

/// The weight Laplacian with the row and column of vertex 0 removed.
///
/// Vertex 0 is pinned at the origin for the whole layout, which turns the
/// singular Laplacian into a strictly diagonally dominant, positive-definite
/// system. The Cholesky factorization is computed once here and reused by
/// every subsequent solve.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    matrix: DMatrix<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
    inv_diag: Vec<f64>,
}

impl ReducedSystem {
    /// Delete row and column 0 of a weight Laplacian and factorize the result.
    pub fn reduce(lw: &DMatrix<f64>) -> Result<Self> {
        let n = lw.nrows();
        assert_eq!(lw.ncols(), n, "Laplacian must be square");
        assert!(n >= 1, "Laplacian must be at least 1x1");
        let m = n - 1;
        let mut matrix = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                matrix[(i, j)] = lw[(i + 1, j + 1)];
            }
        }
        let chol = if m > 0 {
            Some(Cholesky::new(matrix.clone()).ok_or(Error::SingularSystem)?)
        } else {
            None
        };
        let inv_diag = (0..m)
            .map(|i| {
                let d = matrix[(i, i)];
                if d > 0.0 {
                    1.0 / d
                } else {
                    1.0
                }
            })
            .collect();
        Ok(ReducedSystem {
            matrix,
            chol,
            inv_diag,
        })
    }

    /// Dimension of the reduced system (one less than the vertex count).
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Order-sensitive hash of the matrix entries; the reuse invariant checks
    /// the factorized system never changes within one layout.
    pub fn checksum(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in self.matrix.iter() {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Solve via the cached Cholesky factorization, with one step of iterative
/// refinement if the residual misses the contract.
pub fn solve_direct(sys: &ReducedSystem, rhs: &DVector<f64>) -> DVector<f64> {
    let m = sys.dim();
    assert_eq!(rhs.len(), m, "rhs length mismatch");
    if m == 0 {
        return DVector::zeros(0);
    }
    let chol = sys.chol.as_ref().expect("factorization exists for m > 0");
    let mut z = chol.solve(rhs);
    let bound = DIRECT_RESIDUAL_TOL * (1.0 + rhs.norm());
    let r = rhs - &sys.matrix * &z;
    if r.norm() > 0.5 * bound {
        z += chol.solve(&r);
    }
    z
}

/// Jacobi-preconditioned conjugate gradient, warm-started. Stops when the
/// residual norm drops to `tol * ||rhs||`; errors after 10n iterations.
pub fn solve_cg(
    sys: &ReducedSystem,
    rhs: &DVector<f64>,
    warm_start: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>> {
    assert!(tol > 0.0, "tolerance must be positive");
    let m = sys.dim();
    assert_eq!(rhs.len(), m);
    assert_eq!(warm_start.len(), m);
    if m == 0 {
        return Ok(DVector::zeros(0));
    }
    let rhs_norm = rhs.norm();
    if rhs_norm == 0.0 {
        // A z = 0 has the unique solution z = 0 for a positive-definite A.
        return Ok(DVector::zeros(m));
    }
    let threshold = tol * rhs_norm;
    let a = &sys.matrix;
    let mut x = warm_start.clone();
    let mut r = rhs - a * &x;
    let mut res_norm = r.norm();
    if res_norm <= threshold {
        return Ok(x);
    }
    let precond = |v: &DVector<f64>| {
        DVector::from_iterator(m, v.iter().zip(&sys.inv_diag).map(|(ri, di)| ri * di))
    };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let max_iter = 10 * m.max(1);
    for _ in 0..max_iter {
        let ap = a * &p;
        let denom = p.dot(&ap);
        if denom <= 0.0 {
            return Err(Error::SingularSystem);
        }
        let alpha = rz / denom;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        res_norm = r.norm();
        if res_norm <= threshold {
            return Ok(x);
        }
        z = precond(&r);
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        p = z + beta * p;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: res_norm / rhs_norm,
    })
}

/// One layout's worth of majorization machinery: the weighting, the ideal
/// distances, and the reduced system factorized once.
#[derive(Debug, Clone)]
pub struct Majorizer {
    weights: WeightMatrix,
    dist: DistanceMatrix,
    system: ReducedSystem,
}

impl Majorizer {
    pub fn new(weights: WeightMatrix, dist: DistanceMatrix) -> Result<Self> {
        assert_eq!(weights.n(), dist.n());
        let lw = crate::stress::weight_laplacian(&weights);
        let system = ReducedSystem::reduce(&lw)?;
        Ok(Majorizer {
            weights,
            dist,
            system,
        })
    }

    pub fn n(&self) -> usize {
        self.dist.n()
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn dist(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub fn system(&self) -> &ReducedSystem {
        &self.system
    }

    /// One majorization step: build B = L^X X, drop row 0 of every column,
    /// solve the d independent reduced systems, and reassemble with vertex 0
    /// at the origin. Stress never increases across a step.
    pub fn step(&self, x: &Placement, backend: SolverBackend, cg_tol: f64) -> Result<Placement> {
        let n = self.n();
        assert_eq!(x.n(), n, "placement size mismatch");
        let dim = x.dim();
        let b = iteration_rhs(&self.weights, &self.dist, x);
        let mut next = Placement::zeros(n, dim);
        let m = n - 1;
        for k in 0..dim {
            let rhs = DVector::from_iterator(m, (1..n).map(|i| b.row(i)[k]));
            let solution = match backend.resolve(n) {
                SolverBackend::ConjugateGradient => {
                    let warm = DVector::from_iterator(m, (1..n).map(|i| x.row(i)[k]));
                    match solve_cg(&self.system, &rhs, &warm, cg_tol) {
                        Ok(z) => z,
                        // iteration cap hit: fall back to the exact solve
                        Err(Error::NoConvergence { .. }) => solve_direct(&self.system, &rhs),
                        Err(e) => return Err(e),
                    }
                }
                _ => solve_direct(&self.system, &rhs),
            };
            for i in 1..n {
                next.row_mut(i)[k] = solution[i - 1];
            }
        }
        Ok(next)
    }
}

/// Standalone majorization step for small one-off uses; layouts should build
/// a `Majorizer` once instead so the factorization is reused.
pub fn majorize_step(x: &Placement, w: &WeightMatrix, dist: &DistanceMatrix) -> Result<Placement> {
    let majorizer = Majorizer::new(w.clone(), dist.clone())?;
    majorizer.step(x, SolverBackend::Direct, 1e-12)
}
