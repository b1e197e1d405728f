//! Optimal load shedding against cascading failures in DC power networks.
//!
//! The crate offers two solvers. The exact solver aggregates the continuum of supply-demand
//! vectors into finitely many polytopes, partitions admissible controls by the capacity
//! hyperplanes and runs a pruned iterative-deepening search. The analytic solver handles
//! tree-reducible networks under constant or one-shot control with an algebra of tent functions.

pub mod agg;
pub mod approx;
pub mod cascade;
pub mod chi;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod instance;
pub mod linkset;
pub mod net;
pub mod table;

pub use agg::{
    baseline_discretized_search, retrieve_control, value_iteration, AggControl, AggNode,
    ControlMode, SearchOptions, SearchResult,
};
pub use approx::{eta_family, projected_search, projected_value, ProjectionSpec, Route};
pub use cascade::{
    admissible_set, failure_step, is_feasible, run_uncontrolled, simulate_controls, AdmissibleSet,
    ControlBox, NetworkState, EPS_CAP,
};
pub use chi::{
    chi_argmax_split, chi_star, parallel_optimal, solve_one_shot, solve_tree_constant, tree_reduce,
    ChiPiece, ParallelProfile, PiecewiseChi, ReducedTree,
};
pub use error::{Error, Result};
pub use flow::{
    compute_flow, connected_components, pseudo_inverse, update_pseudo_inverse, FlowSolution,
    EPS_NUM,
};
pub use instance::{bundled, emit, parse, Instance};
pub use linkset::LinkSet;
pub use net::{Link, Network, NodeRole};
pub use table::{residual_load_table, TableRow, ETAS};
