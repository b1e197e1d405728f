//! Analytic solvers built on χ (tent) functions: parallel networks, the star operator, tree
//! reduction and optimal constant and one-shot control of tree-reducible networks.

pub mod interval;
pub mod parallel;
pub mod piecewise;
pub mod solve;
pub mod star;
pub mod tree;

pub use interval::{Interval, IntervalSet, IntervalSetF64};
pub use parallel::{parallel_optimal, parallel_value, ParallelProfile};
pub use piecewise::{chi, envelope, translate_top, ChiPiece, PiecewiseChi, PiecewiseChiF64};
pub use solve::{
    solve_constant, solve_one_shot, solve_tree_constant, solve_tree_with_sets, tree_feasible_sets,
    ConstantMethod, ConstantSolution, NodeOutput, OneShot, TreeSolution,
};
pub use star::{
    chi_argmax_split, chi_star, chi_star_enumerated, chi_star_report, StarInput, StarReport,
};
pub use tree::{
    component_feasible_set, min_cut, tree_reduce, tree_reduce_rooted, Component, FeasibleMode,
    ReducedTree,
};
