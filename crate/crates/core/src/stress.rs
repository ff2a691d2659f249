//! The stress objective, pairwise weights, and the two Laplacian operators
//! behind the majorization step.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::DistanceMatrix;

/// Coordinates of `n` vertices embedded in `dim` dimensions, stored row-major
/// (one row per vertex). All coordinates are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    n: usize,
    dim: usize,
    coords: Vec<f64>,
}

impl Placement {
    pub fn new(n: usize, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGraph {
                reason: "embedding dimension must be at least 1".into(),
            });
        }
        if coords.len() != n * dim {
            return Err(Error::InvalidGraph {
                reason: format!("coordinate storage {} != {}x{}", coords.len(), n, dim),
            });
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidGraph {
                reason: "placement coordinates must be finite".into(),
            });
        }
        Ok(Placement { n, dim, coords })
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Placement {
            n,
            dim,
            coords: vec![0.0; n * dim],
        }
    }

    /// Build from per-vertex rows; all rows must share one length.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(1, |r| r.len());
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "all rows must have the same dimension");
            coords.extend_from_slice(r);
        }
        Placement {
            n: rows.len(),
            dim,
            coords,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    /// Euclidean distance between the rows for vertices `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row(i), self.row(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius norm of the coordinate matrix.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Shift every row by `-row(vertex)` so the given vertex sits at the origin.
    pub fn translate_to_origin(&mut self, vertex: usize) {
        let shift: Vec<f64> = self.row(vertex).to_vec();
        for row in self.coords.chunks_exact_mut(self.dim) {
            for (c, s) in row.iter_mut().zip(&shift) {
                *c -= *s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

/// Symmetric nonnegative pairwise weights with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(n: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != n * n {
            return Err(Error::InvalidGraph {
                reason: format!("weight matrix storage {} != {}x{}", w.len(), n, n),
            });
        }
        for i in 0..n {
            if w[i * n + i] != 0.0 {
                return Err(Error::InvalidGraph {
                    reason: format!("weight matrix diagonal entry {} is nonzero", i),
                });
            }
            for j in 0..i {
                let v = w[i * n + j];
                if v != w[j * n + i] || !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidGraph {
                        reason: format!("weight w({}, {}) = {} must be symmetric nonnegative", i, j, v),
                    });
                }
            }
        }
        Ok(WeightMatrix { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }
}

/// Default experimental weighting w_ij = d_ij^-2.
pub fn default_weights(dist: &DistanceMatrix) -> WeightMatrix {
    weights_with_exponent(dist, -2.0)
}

/// Weighting w_ij = d_ij^alpha (w_ii = 0).
pub fn weights_with_exponent(dist: &DistanceMatrix, alpha: f64) -> WeightMatrix {
    let n = dist.n();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i * n + j] = dist.get(i, j).powf(alpha);
            }
        }
    }
    WeightMatrix { n, w }
}

/// The layout objective: sum over vertex pairs i < j of
/// w_ij * (||x_i - x_j|| - d_ij)^2.
pub fn stress(x: &Placement, dist: &DistanceMatrix, w: &WeightMatrix) -> f64 {
    let n = x.n();
    assert_eq!(dist.n(), n, "distance matrix dimension mismatch");
    assert_eq!(w.n(), n, "weight matrix dimension mismatch");
    let dim = x.dim();
    let mut total = 0.0;
    for i in 0..n {
        let xi = x.row(i);
        let drow = dist.row(i);
        let wrow = w.row(i);
        for j in (i + 1)..n {
            let xj = x.row(j);
            let mut sq = 0.0;
            for k in 0..dim {
                let t = xi[k] - xj[k];
                sq += t * t;
            }
            let e = sq.sqrt() - drow[j];
            total += wrow[j] * (e * e);
        }
    }
    total
}

/// Fused evaluation of `stress` for two placements over one pass of the pair
/// loop. Each accumulator follows exactly the operation sequence of a
/// standalone `stress` call, so the results are bit-identical to evaluating
/// the placements separately.
pub(crate) fn stress_two(
    a: &Placement,
    b: &Placement,
    dist: &DistanceMatrix,
    w: &WeightMatrix,
) -> (f64, f64) {
    let n = a.n();
    debug_assert_eq!(b.n(), n);
    let dim = a.dim();
    let mut total_a = 0.0;
    let mut total_b = 0.0;
    for i in 0..n {
        let ai = a.row(i);
        let bi = b.row(i);
        let drow = dist.row(i);
        let wrow = w.row(i);
        for j in (i + 1)..n {
            let aj = a.row(j);
            let bj = b.row(j);
            let mut sq_a = 0.0;
            let mut sq_b = 0.0;
            for k in 0..dim {
                let ta = ai[k] - aj[k];
                sq_a += ta * ta;
                let tb = bi[k] - bj[k];
                sq_b += tb * tb;
            }
            let d = drow[j];
            let wij = wrow[j];
            let ea = sq_a.sqrt() - d;
            total_a += wij * (ea * ea);
            let eb = sq_b.sqrt() - d;
            total_b += wij * (eb * eb);
        }
    }
    (total_a, total_b)
}

/// Laplacian of the weight matrix: off-diagonal -w_ij, diagonal the negative
/// row sum. Symmetric, zero row sums, positive semidefinite.
pub fn weight_laplacian(w: &WeightMatrix) -> DMatrix<f64> {
    let n = w.n();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = w.get(i, j);
                l[(i, j)] = -v;
                diag += v;
            }
        }
        l[(i, i)] = diag;
    }
    l
}

/// Placement-dependent Laplacian: off-diagonal 0 when y_i and y_j coincide
/// exactly, -w_ij * d_ij / ||y_i - y_j|| otherwise; diagonal the negative row
/// sum. Exact coordinate equality is intentional: random initialization makes
/// coincidence measure-zero and a tolerance would change the operator.
pub fn iteration_laplacian(w: &WeightMatrix, dist: &DistanceMatrix, y: &Placement) -> DMatrix<f64> {
    let n = w.n();
    assert_eq!(dist.n(), n);
    assert_eq!(y.n(), n);
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let norm = y.distance(i, j);
            let v = if norm == 0.0 {
                0.0
            } else {
                w.get(i, j) * dist.get(i, j) / norm
            };
            l[(i, j)] = -v;
            diag += v;
        }
        l[(i, i)] = diag;
    }
    l
}

/// Right-hand side of the majorization step, B = L^Y * Y, computed pairwise
/// without materializing the Laplacian. Matches `iteration_laplacian(w, d, y) * y`.
pub(crate) fn iteration_rhs(w: &WeightMatrix, dist: &DistanceMatrix, y: &Placement) -> Placement {
    let n = y.n();
    let dim = y.dim();
    let mut b = Placement::zeros(n, dim);
    // (L^Y y)_i = sum_j w_ij d_ij (y_i - y_j) / ||y_i - y_j||, coincident pairs skipped.
    for i in 0..n {
        let drow = dist.row(i);
        let wrow = w.row(i);
        for j in (i + 1)..n {
            let (yi, yj) = (y.row(i), y.row(j));
            let mut sq = 0.0;
            for k in 0..dim {
                let t = yi[k] - yj[k];
                sq += t * t;
            }
            if sq == 0.0 {
                continue;
            }
            let c = wrow[j] * drow[j] / sq.sqrt();
            for k in 0..dim {
                let t = c * (yi[k] - yj[k]);
                b.coords[i * dim + k] += t;
                b.coords[j * dim + k] -= t;
            }
        }
    }
    b
}

/// The quadratic surrogate g(X, Y) = tr(X^T L^W X) - 2 tr(X^T L^Y Y) + C with
/// C = sum_{i<j} w_ij d_ij^2. Used to test the dominance property, not in the
/// iteration loop.
pub fn dominant_value(
    x: &Placement,
    y: &Placement,
    w: &WeightMatrix,
    dist: &DistanceMatrix,
) -> f64 {
    let n = x.n();
    assert_eq!(y.n(), n);
    let dim = x.dim();
    assert_eq!(y.dim(), dim);
    let lw = weight_laplacian(w);
    let ly = iteration_laplacian(w, dist, y);
    let xm = DMatrix::from_row_slice(n, dim, x.coords());
    let ym = DMatrix::from_row_slice(n, dim, y.coords());
    let quad = (xm.transpose() * &lw * &xm).trace();
    let cross = (xm.transpose() * &ly * &ym).trace();
    let mut constant = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist.get(i, j);
            constant += w.get(i, j) * d * d;
        }
    }
    quad - 2.0 * cross + constant
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{shortest_path_distances, Graph};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn p3() -> (DistanceMatrix, WeightMatrix) {
        let g = Graph::unit(3, &[(0, 1), (1, 2)]).unwrap();
        let d = shortest_path_distances(&g).unwrap();
        let w = default_weights(&d);
        (d, w)
    }

    fn c4() -> (DistanceMatrix, WeightMatrix) {
        let g = Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let d = shortest_path_distances(&g).unwrap();
        let w = default_weights(&d);
        (d, w)
    }

    #[test]
    fn default_weight_values() {
        let (d, w) = p3();
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(w.get(0, 1), 1.0);
        assert_eq!(w.get(0, 2), 0.25);
        let g = Graph::new(
            2,
            vec![crate::graph::Edge {
                u: 0,
                v: 1,
                length: 5.0,
            }],
        )
        .unwrap();
        let d5 = shortest_path_distances(&g).unwrap();
        let w5 = default_weights(&d5);
        assert_relative_eq!(w5.get(0, 1), 0.04, max_relative = 1e-15);
    }

    #[test]
    fn stress_zero_on_exact_path() {
        let (d, w) = p3();
        let x = Placement::from_rows(&[&[0.0], &[1.0], &[2.0]]);
        assert_eq!(stress(&x, &d, &w), 0.0);
    }

    #[test]
    fn stress_of_unit_square_c4() {
        // Direct summation: the four edges are realized exactly, the two
        // diagonals contribute (1/4)(sqrt(2) - 2)^2 each, total 3 - 2 sqrt(2).
        let (d, w) = c4();
        let x = Placement::from_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let expected = 3.0 - 2.0 * 2.0_f64.sqrt();
        assert_relative_eq!(stress(&x, &d, &w), expected, max_relative = 1e-12);
    }

    #[test]
    fn stress_of_collapsed_edge() {
        let g = Graph::unit(2, &[(0, 1)]).unwrap();
        let d = shortest_path_distances(&g).unwrap();
        let w = default_weights(&d);
        let x = Placement::zeros(2, 2);
        assert_eq!(stress(&x, &d, &w), 1.0);
    }

    #[test]
    fn weight_laplacian_single_edge() {
        let g = Graph::unit(2, &[(0, 1)]).unwrap();
        let d = shortest_path_distances(&g).unwrap();
        let w = default_weights(&d);
        let l = weight_laplacian(&w);
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(l[(0, 1)], -1.0);
        assert_eq!(l[(1, 0)], -1.0);
        assert_eq!(l[(1, 1)], 1.0);
    }

    #[test]
    fn weight_laplacian_p3_rows() {
        let (_, w) = p3();
        let l = weight_laplacian(&w);
        let expected = [
            [1.25, -1.0, -0.25],
            [-1.0, 2.0, -1.0],
            [-0.25, -1.0, 1.25],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(l[(i, j)], expected[i][j], max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(2..10);
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..i {
                    let v = rng.random::<f64>();
                    w[i * n + j] = v;
                    w[j * n + i] = v;
                }
            }
            let w = WeightMatrix::new(n, w).unwrap();
            let l = weight_laplacian(&w);
            for i in 0..n {
                let sum: f64 = (0..n).map(|j| l[(i, j)]).sum();
                assert!(sum.abs() < 1e-12, "row {} sums to {}", i, sum);
            }
        }
    }

    #[test]
    fn weight_laplacian_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(2..12);
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..i {
                    let v = rng.random::<f64>();
                    w[i * n + j] = v;
                    w[j * n + i] = v;
                }
            }
            let w = WeightMatrix::new(n, w).unwrap();
            let l = weight_laplacian(&w);
            for _ in 0..10 {
                let z: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
                let mut quad = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        quad += z[i] * l[(i, j)] * z[j];
                    }
                }
                assert!(quad >= -1e-12, "z^T L z = {}", quad);
            }
        }
    }

    #[test]
    fn iteration_laplacian_cases() {
        let g = Graph::unit(2, &[(0, 1)]).unwrap();
        let d = shortest_path_distances(&g).unwrap();
        let w = default_weights(&d);

        // distance ratio 1 reproduces the weight Laplacian
        let y = Placement::from_rows(&[&[0.0], &[1.0]]);
        let l = iteration_laplacian(&w, &d, &y);
        assert_eq!(l[(0, 1)], -1.0);

        // coincident vertices zero the entry
        let y0 = Placement::zeros(2, 1);
        let l0 = iteration_laplacian(&w, &d, &y0);
        assert_eq!(l0[(0, 1)], 0.0);
        assert_eq!(l0[(0, 0)], 0.0);

        // -w * d / ||dy|| = -1 * 2 / 4
        let g2 = Graph::new(
            2,
            vec![crate::graph::Edge {
                u: 0,
                v: 1,
                length: 2.0,
            }],
        )
        .unwrap();
        let d2 = shortest_path_distances(&g2).unwrap();
        let w2 = WeightMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let y2 = Placement::from_rows(&[&[0.0], &[4.0]]);
        let l2 = iteration_laplacian(&w2, &d2, &y2);
        assert_relative_eq!(l2[(0, 1)], -0.5, max_relative = 1e-15);
    }

    #[test]
    fn iteration_rhs_matches_materialized_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &dim in &[1usize, 2, 3] {
            let g = Graph::unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
            let d = shortest_path_distances(&g).unwrap();
            let w = default_weights(&d);
            let coords: Vec<f64> = (0..5 * dim).map(|_| rng.random::<f64>()).collect();
            let y = Placement::new(5, dim, coords).unwrap();
            let b = iteration_rhs(&w, &d, &y);
            let ly = iteration_laplacian(&w, &d, &y);
            let ym = DMatrix::from_row_slice(5, dim, y.coords());
            let expect = &ly * &ym;
            for i in 0..5 {
                for k in 0..dim {
                    assert_relative_eq!(b.row(i)[k], expect[(i, k)], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn dominant_single_edge_exact() {
        // g = tr + cross + C = 1 - 2 + 1 = 0 = stress of the exact placement.
        let g = Graph::unit(2, &[(0, 1)]).unwrap();
        let d = shortest_path_distances(&g).unwrap();
        let w = default_weights(&d);
        let x = Placement::from_rows(&[&[0.0], &[1.0]]);
        assert_relative_eq!(dominant_value(&x, &x, &w, &d), 0.0, epsilon = 1e-15);
        assert_eq!(stress(&x, &d, &w), 0.0);
    }

    #[test]
    fn dominance_property_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (d, w) = c4();
        for _ in 0..200 {
            let dim = rng.random_range(1..4);
            let xs: Vec<f64> = (0..4 * dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let ys: Vec<f64> = (0..4 * dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let x = Placement::new(4, dim, xs).unwrap();
            let y = Placement::new(4, dim, ys).unwrap();
            let f = stress(&x, &d, &w);
            let g_xy = dominant_value(&x, &y, &w, &d);
            let g_xx = dominant_value(&x, &x, &w, &d);
            assert!(f <= g_xy + 1e-9 * (1.0 + g_xy.abs()));
            assert!((f - g_xx).abs() <= 1e-9 * (1.0 + f.abs()));
        }
    }

    #[test]
    fn stress_invariant_under_isometries() {
        let (d, w) = c4();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let coords: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
        let x = Placement::new(4, 2, coords).unwrap();
        let base = stress(&x, &d, &w);

        // translation
        let mut t = x.clone();
        for row in t.coords_mut().chunks_exact_mut(2) {
            row[0] += 3.7;
            row[1] -= 1.2;
        }
        assert_relative_eq!(stress(&t, &d, &w), base, max_relative = 1e-9);

        // rotation
        let theta: f64 = 0.83;
        let (s, c) = theta.sin_cos();
        let mut r = x.clone();
        for row in r.coords_mut().chunks_exact_mut(2) {
            let (px, py) = (row[0], row[1]);
            row[0] = c * px - s * py;
            row[1] = s * px + c * py;
        }
        assert_relative_eq!(stress(&r, &d, &w), base, max_relative = 1e-9);

        // reflection
        let mut m = x.clone();
        for row in m.coords_mut().chunks_exact_mut(2) {
            row[0] = -row[0];
        }
        assert_relative_eq!(stress(&m, &d, &w), base, max_relative = 1e-9);
    }

    #[test]
    fn stress_two_matches_standalone_bitwise() {
        let (d, w) = c4();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let a = Placement::new(4, 2, (0..8).map(|_| rng.random::<f64>()).collect()).unwrap();
            let b = Placement::new(4, 2, (0..8).map(|_| rng.random::<f64>()).collect()).unwrap();
            let (fa, fb) = stress_two(&a, &b, &d, &w);
            assert_eq!(fa.to_bits(), stress(&a, &d, &w).to_bits());
            assert_eq!(fb.to_bits(), stress(&b, &d, &w).to_bits());
        }
    }
}
