use thiserror::Error;

/// Errors produced by the solvers and the instance reader.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("injections unbalanced on component containing node {node}: residual {residual:e}")]
    UnbalancedInjection { node: usize, residual: f64 },

    #[error("control is not admissible at node {node}: {reason}")]
    InadmissibleControl { node: usize, reason: String },

    #[error("hyperplane supports an existing face without splitting it")]
    DegenerateCut,

    #[error("sweep requires x[{axis}] >= 0 but a vertex has x[{axis}] = {value:e}")]
    NegativeCoordinate { axis: usize, value: f64 },

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("control retrieval failed at step {step}: {reason}")]
    RetrievalFailed { step: usize, reason: String },

    #[error("network is not tree reducible: {0}")]
    NotTreeReducible(String),

    #[error("empty domain")]
    EmptyDomain,

    #[error("target {target} lies outside the domain [{lo}, {hi}]")]
    InfeasibleTarget { target: f64, lo: f64, hi: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no feasible control: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
