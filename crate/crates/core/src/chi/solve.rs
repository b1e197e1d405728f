//! Optimal constant and one-shot control of tree-reducible networks.

use rayon::prelude::*;

use crate::agg::{expand, value_iteration, ControlMode, SearchOptions};
use crate::cascade::{run_uncontrolled, NetworkState};
use crate::error::{Error, Result};
use crate::net::Network;

use super::interval::IntervalSetF64;
use super::piecewise::{ChiPiece, PiecewiseChiF64};
use super::star::{chi_argmax_split, chi_star, StarInput};
use super::tree::{component_feasible_set, tree_reduce, FeasibleMode, ReducedTree};

/// Output function of one tree node: the best objective of its subtree as a function of the
/// aggregate flow `z` it sends to its parent.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeOutput {
    /// Network node.
    pub node: usize,
    pub function: PiecewiseChiF64,
    /// Common top point when the function is a single χ function on its domain.
    pub top: Option<(f64, f64)>,
    pub domain: IntervalSetF64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSolution {
    pub value: f64,
    /// Constant control per network node (zero outside the tree).
    pub control: Vec<f64>,
    /// Aggregate flow of each tree node towards its parent, by tree index.
    pub flows: Vec<f64>,
    /// Output functions by tree index.
    pub outputs: Vec<NodeOutput>,
    /// Feasible aggregate flows of each component, by tree index of its child end.
    pub feasible_sets: Vec<Option<IntervalSetF64>>,
}

/// Feasible flow set of every component of `tree` for horizon `n`.
pub fn tree_feasible_sets(
    net: &Network,
    tree: &ReducedTree,
    n: usize,
    mode: FeasibleMode,
) -> Vec<Option<IntervalSetF64>> {
    tree.components
        .par_iter()
        .map(|c| c.as_ref().map(|c| component_feasible_set(net, c, n, mode)))
        .collect()
}

/// Optimal constant control over horizon `n`: a leaf-to-root pass builds the output function
/// of every node with the star operator, and a root-to-leaf pass splits the root flow `z_0 = 0`
/// into node controls and child flows.
pub fn solve_tree_constant(
    net: &Network,
    p0: &[f64],
    tree: &ReducedTree,
    n: usize,
) -> Result<TreeSolution> {
    let sets = tree_feasible_sets(net, tree, n, FeasibleMode::Constant);
    solve_tree_with_sets(net, p0, tree, &sets)
}

/// The two passes with given component flow sets.
pub fn solve_tree_with_sets(
    net: &Network,
    p0: &[f64],
    tree: &ReducedTree,
    sets: &[Option<IntervalSetF64>],
) -> Result<TreeSolution> {
    let k = tree.len();
    if sets.len() != k || p0.len() != net.node_count() {
        return Err(Error::InvalidNetwork(
            "flow sets or injections do not match the tree".into(),
        ));
    }
    let mut funcs: Vec<Option<PiecewiseChiF64>> = vec![None; k];
    let mut inputs: Vec<Vec<StarInput<f64>>> = vec![Vec::new(); k];
    for &i in tree.order.iter().rev() {
        let mut list = vec![own_input(net, p0, tree.nodes[i])];
        for &j in &tree.children[i] {
            let g = funcs[j].clone().expect("children are processed first");
            let d = g.domain();
            list.push((g, d));
        }
        let mut g = chi_star(&list)?;
        if tree.parent[i].is_some() {
            let allowed = sets[i].as_ref().ok_or(Error::EmptyDomain)?;
            let z = allowed.intersect(&g.domain());
            if z.is_empty() {
                return Err(Error::EmptyDomain);
            }
            g = g.restrict(&z);
        }
        funcs[i] = Some(g);
        inputs[i] = list;
    }
    let root = funcs[0].as_ref().unwrap();
    let value = root.eval(0.0).ok_or(Error::EmptyDomain)?;

    let mut flows = vec![0.0; k];
    let mut control = vec![0.0; net.node_count()];
    for &i in &tree.order {
        let x = chi_argmax_split(&inputs[i], flows[i])?;
        control[tree.nodes[i]] = x[0];
        for (&j, &zj) in tree.children[i].iter().zip(&x[1..]) {
            flows[j] = zj;
        }
    }
    let outputs = (0..k)
        .map(|i| {
            let function = funcs[i].clone().unwrap();
            NodeOutput {
                node: tree.nodes[i],
                top: function.as_single_chi(),
                domain: function.domain(),
                function,
            }
        })
        .collect();
    Ok(TreeSolution {
        value,
        control,
        flows,
        outputs,
        feasible_sets: sets.to_vec(),
    })
}

/// `s_v·x` on `Π(p_v)`; the zero function on `{0}` for transmission nodes.
fn own_input(net: &Network, p0: &[f64], v: usize) -> StarInput<f64> {
    let s = net.role(v).sign();
    let p = p0[v];
    let (lo, hi) = (p.min(0.0), p.max(0.0));
    let piece = if s == 0.0 || lo == hi {
        ChiPiece::new(lo, hi, (hi, s * hi))
    } else {
        ChiPiece::linear(s, lo, hi)
    };
    (
        PiecewiseChiF64::from_pieces(vec![piece]),
        IntervalSetF64::single(lo, hi),
    )
}

/// How a constant-control value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantMethod {
    Tree,
    Search,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSolution {
    pub value: f64,
    /// Constant control per network node.
    pub control: Vec<f64>,
    pub method: ConstantMethod,
}

/// Optimal constant control: the tree solver when the active network reduces to a tree, the
/// aggregated search restricted to constant controls otherwise.
pub fn solve_constant(net: &Network, state: &NetworkState, n: usize) -> Result<ConstantSolution> {
    if let Ok(tree) = tree_reduce(net, &state.active) {
        let sol = solve_tree_constant(net, &state.p, &tree, n)?;
        return Ok(ConstantSolution {
            value: sol.value,
            control: sol.control,
            method: ConstantMethod::Tree,
        });
    }
    let opts = SearchOptions {
        mode: ControlMode::Constant,
        ..Default::default()
    };
    let res = value_iteration(net, state, n, &opts)?;
    Ok(ConstantSolution {
        value: res.value,
        control: expand(net, &res.terminal),
        method: ConstantMethod::Search,
    })
}

/// Control that follows the uncontrolled cascade for `stage` steps and then holds one level.
#[derive(Debug, Clone, PartialEq)]
pub struct OneShot {
    pub value: f64,
    pub stage: usize,
    /// Control held from `stage` on.
    pub control: Vec<f64>,
    /// Best value of shedding at each candidate stage.
    pub candidates: Vec<(usize, f64)>,
}

impl OneShot {
    /// The full control sequence: `p⁰` before the shedding stage, the held control afterwards.
    pub fn sequence(&self, p0: &[f64], n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|t| {
                if t < self.stage {
                    p0.to_vec()
                } else {
                    self.control.clone()
                }
            })
            .collect()
    }
}

/// Best one-shot control: for every stage `t` at which the uncontrolled cascade still carries
/// `p⁰` in balance, the optimal constant control on the remaining `N − t` stages. Ties go to the
/// earliest stage.
pub fn solve_one_shot(net: &Network, state: &NetworkState, n: usize) -> Result<OneShot> {
    if n == 0 {
        return Err(Error::Infeasible("horizon must be at least 1".into()));
    }
    let prefix = run_uncontrolled(net, state, n - 1);
    let mut candidates = Vec::new();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for (t, st) in prefix.iter().enumerate() {
        if st.p != state.p {
            break;
        }
        let Ok(sol) = solve_constant(net, st, n - t) else {
            continue;
        };
        candidates.push((t, sol.value));
        if best.as_ref().map_or(true, |b| sol.value > b.0 + 1e-9) {
            best = Some((sol.value, t, sol.control));
        }
    }
    let (value, stage, control) = best
        .ok_or_else(|| Error::Infeasible("no one-shot control reaches a feasible state".into()))?;
    Ok(OneShot {
        value,
        stage,
        control,
        candidates,
    })
}
