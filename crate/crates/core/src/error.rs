use thiserror::Error;

use crate::engine::IterationTrace;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// The graph has more than one connected component, so finite ideal
    /// distances do not exist and no layout is attempted.
    #[error("graph is disconnected ({components} components); layout requires a connected graph")]
    DisconnectedGraph { components: usize },

    /// A generator was asked for a size it cannot produce.
    #[error("invalid size {size} for {family} generator (minimum {min})")]
    InvalidSize {
        family: &'static str,
        size: usize,
        min: usize,
    },

    /// Malformed graph description (bad vertex ids, nonpositive edge length, ...).
    #[error("invalid graph: {reason}")]
    InvalidGraph { reason: String },

    /// An edge connecting a vertex to itself.
    #[error("self-loop on vertex {vertex} is not allowed")]
    SelfLoop { vertex: usize },

    /// The same undirected vertex pair appeared twice.
    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: usize, v: usize },

    /// Edge-list input without the `vertices N` header line.
    #[error("missing `vertices N` header line")]
    MissingHeader,

    /// Any other input-format problem, with a 1-based line number.
    #[error("parse error at line {line}: {reason}")]
    ParseError { line: usize, reason: String },

    /// The reduced linear system could not be factorized.
    #[error("reduced system is singular (weighting does not connect all vertices)")]
    SingularSystem,

    /// An iterative scheme hit its iteration cap before meeting its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Stress became NaN or infinite; the partial trace is kept for diagnosis.
    #[error("stress became non-finite at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        trace: Box<IterationTrace>,
    },

    /// An output format only supports specific embedding dimensions.
    #[error("unsupported dimension {dim} (expected {expected})")]
    UnsupportedDimension { dim: usize, expected: usize },

    /// Too few usable data points to fit a convergence rate.
    #[error("insufficient tail: only {usable} usable points (need at least {needed})")]
    InsufficientTail { usable: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
