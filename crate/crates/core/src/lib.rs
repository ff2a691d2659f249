//! Force-directed graph layout by stress majorization, accelerated with
//! successive over-relaxation (SOR).
//!
//! A layout minimizes the stress
//! `sum_{i<j} w_ij (||x_i - x_j|| - d_ij)^2` over vertex coordinates, where
//! `d_ij` are shortest-path ideal distances and `w_ij = d_ij^-2` by default.
//! Each iteration minimizes a quadratic surrogate of the stress by solving
//! one reduced Laplacian system per embedding dimension (vertex 0 pinned at
//! the origin, factorized once per layout). The SOR step extrapolates past
//! the new iterate, `x_next + omega * (x_next - x_prev)`, and keeps the
//! combined placement only when it does not increase stress.
//!
//! Modules:
//! - [`graph`]: graphs, generators, connectivity, shortest-path distances
//! - [`stress`]: the objective, weights, and Laplacian operators
//! - [`solver`]: the reduced system with direct and conjugate-gradient backends
//! - [`engine`]: the iteration loop, relax-factor strategies, tracing
//! - [`convergence`]: numeric convergence-rate estimation
//! - [`io`]: edge-list, TSV, and SVG formats
//! - [`report`]: benchmark report aggregation and serialization

pub mod convergence;
pub mod engine;
pub mod error;
pub mod graph;
pub mod io;
pub mod report;
pub mod solver;
pub mod stress;

pub use convergence::{estimate_spectral_radius, observed_rate, RateReport};
pub use engine::{
    init_placement, run_layout, sor_combine, IterationRecord, IterationTrace, LayoutConfig,
    LayoutProblem, RelaxStrategy, TerminationReason,
};
pub use error::{Error, Result};
pub use graph::{
    generate_band, generate_grid, shortest_path_distances, validate_connected, DistanceMatrix,
    Edge, Graph,
};
pub use io::{parse_edge_list, write_edge_list, write_placement_tsv, write_svg, SvgOptions};
pub use report::{BenchConfig, BenchReport, RunOutcome, RunRecord};
pub use solver::{majorize_step, solve_cg, solve_direct, ReducedSystem, SolverBackend};
pub use stress::{default_weights, dominant_value, stress, Placement, WeightMatrix};
