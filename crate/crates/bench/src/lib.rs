//! Shared fixtures for the microbenchmarks.

use sorlayout_core::engine::LayoutProblem;
use sorlayout_core::{generate_band, generate_grid, init_placement, Graph, Placement};

pub fn band(n: usize) -> Graph {
    generate_band(n).expect("valid band size")
}

pub fn grid(n: usize) -> Graph {
    generate_grid(n).expect("valid grid size")
}

pub fn prepared(g: &Graph) -> LayoutProblem {
    LayoutProblem::new(g.clone(), -2.0).expect("connected graph")
}

pub fn start(problem: &LayoutProblem, seed: u64) -> Placement {
    init_placement(problem.n(), 2, seed)
}
