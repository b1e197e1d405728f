//! Aggregated value iteration: states are pairs of an active link set and a polytope of
//! supply-demand vectors, controls are cells of the admissible region cut by the capacity
//! hyperplanes, and an iterative-deepening search with bounds evaluates the value recursion.

mod baseline;
pub mod line;
mod retrieve;

use std::collections::HashMap;
use std::sync::Arc;

use crate::cascade::NetworkState;
use crate::error::{Error, Result};
use crate::flow::{component_labels, connected_components, FlowCache};
use crate::geometry::{
    cube_of_polytope, insert_hyperplane, lp_over_vertices, polytope_of_point, slice, Hyperplane,
    IncidenceGraph,
};
use crate::linkset::LinkSet;
use crate::net::Network;

pub use baseline::baseline_discretized_search;
pub use retrieve::{retrieve_control, verify_controls};

/// Slack used when comparing values in the search.
pub const EPS_VALUE: f64 = 1e-9;

/// Resolution of the vertex fingerprint that identifies equal aggregated states.
const FINGERPRINT_RESOLUTION: f64 = 1e-9;

/// Which control sequences the search ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// `u^t ∈ Π(u^{t−1})`: load is only ever shed further.
    Monotone,
    /// `u^t = u^0` for all `t`; the region of a state is the set of candidate constant controls.
    Constant,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub mode: ControlMode,
    /// Normals (over the controlled coordinates) of hyperplanes through the origin that every
    /// control must lie in.
    pub subspace: Vec<Vec<f64>>,
    /// Prune nodes whose upper bound cannot beat the incumbent.
    pub prune: bool,
    /// Reuse values of identical aggregated states.
    pub memoize: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: ControlMode::Monotone,
            subspace: Vec::new(),
            prune: true,
            memoize: true,
        }
    }
}

/// Node of the aggregated search tree.
#[derive(Debug, Clone)]
pub struct AggNode {
    pub active: LinkSet,
    /// Closure of the aggregated supply-demand set, over the controlled coordinates.
    pub region: IncidenceGraph,
    /// Flow-sign vector of the control cell that produced this node (empty at the root).
    pub beta: Vec<i8>,
    pub depth: usize,
    /// `max sᵀp` over the region.
    pub upper_bound: f64,
    /// One-stage value of the node.
    pub lower_bound: f64,
}

impl AggNode {
    pub fn root(net: &Network, state: &NetworkState, mode: ControlMode) -> Result<AggNode> {
        let p = restrict(net, &state.p);
        let point = polytope_of_point(&p);
        let region = match mode {
            ControlMode::Monotone => point,
            ControlMode::Constant => cube_of_polytope(&point)?,
        };
        let s = control_objective(net);
        let upper_bound = lp_over_vertices(&region, &s)?.0;
        Ok(AggNode {
            active: state.active.clone(),
            region,
            beta: Vec::new(),
            depth: 0,
            upper_bound,
            lower_bound: 0.0,
        })
    }
}

/// Aggregated control: a closed cell of the admissible region on which every control produces
/// the same surviving link set.
#[derive(Debug, Clone)]
pub struct AggControl {
    /// Active link set at which the cell was formed.
    pub active: LinkSet,
    pub region: IncidenceGraph,
    /// `+1` where `f_i > c_i`, `−1` where `f_i < −c_i`, `0` otherwise (indexed by link).
    pub beta: Vec<i8>,
    pub next_active: LinkSet,
}

impl AggControl {
    pub fn is_feasible(&self) -> bool {
        self.beta.iter().all(|&b| b == 0)
    }
}

/// Per-depth counters of one iterative-deepening pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthStats {
    pub depth: usize,
    pub expanded: usize,
    pub pruned: usize,
    pub memo_hits: usize,
    pub incumbent: f64,
}

impl DepthStats {
    pub const CSV_HEADER: &'static str = "depth,expanded,pruned,memo_hits,incumbent";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.depth, self.expanded, self.pruned, self.memo_hits, self.incumbent
        )
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub value: f64,
    /// One control cell per stage; the last entry is the feasible cell of the final state.
    pub path: Vec<AggControl>,
    /// Maximizer of the final stage, over the controlled coordinates.
    pub terminal: Vec<f64>,
    pub stats: Vec<DepthStats>,
}

/// Objective `s` restricted to the controlled coordinates.
pub fn control_objective(net: &Network) -> Vec<f64> {
    net.controlled_nodes()
        .iter()
        .map(|&v| net.role(v).sign())
        .collect()
}

/// Node vector restricted to the controlled coordinates.
pub fn restrict(net: &Network, p: &[f64]) -> Vec<f64> {
    net.controlled_nodes().iter().map(|&v| p[v]).collect()
}

/// Node vector with `x` on the controlled coordinates and zero elsewhere.
pub fn expand(net: &Network, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; net.node_count()];
    for (&v, &xv) in net.controlled_nodes().iter().zip(x) {
        out[v] = xv;
    }
    out
}

/// Groups of controlled coordinates sharing a component of `active`.
pub fn balance_groups(net: &Network, active: &LinkSet) -> Vec<Vec<usize>> {
    let comps = connected_components(net, active);
    let label = component_labels(&comps, net.node_count());
    let mut groups = vec![Vec::new(); comps.len()];
    for (j, &v) in net.controlled_nodes().iter().enumerate() {
        groups[label[v]].push(j);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

/// `U(E, P) = Π(P) ∩ B_E` (or `P ∩ B_E` for constant controls), further restricted to the
/// search subspace. `None` when empty.
pub fn admissible_region(
    net: &Network,
    node: &AggNode,
    opts: &SearchOptions,
) -> Option<IncidenceGraph> {
    admissible_of(net, &node.active, &node.region, opts)
}

fn admissible_of(
    net: &Network,
    active: &LinkSet,
    region: &IncidenceGraph,
    opts: &SearchOptions,
) -> Option<IncidenceGraph> {
    let mut g = match opts.mode {
        ControlMode::Monotone => cube_of_polytope(region).ok()?,
        ControlMode::Constant => region.clone(),
    };
    let m = net.controlled_nodes().len();
    for group in balance_groups(net, active) {
        let mut normal = vec![0.0; m];
        for &j in &group {
            normal[j] = 1.0;
        }
        g = slice(&g, &Hyperplane::new(normal, 0.0).unwrap())?;
    }
    for normal in &opts.subspace {
        if let Some(h) = Hyperplane::new(normal.clone(), 0.0) {
            g = slice(&g, &h)?;
        }
    }
    Some(g)
}

/// Capacity hyperplanes `f_i(u) = ±c_i` that cut through `g`.
fn intersecting_constraints(
    net: &Network,
    active: &LinkSet,
    g: &IncidenceGraph,
    cache: &FlowCache,
) -> Vec<Hyperplane> {
    let sens = cache.get(net, active);
    let mut out = Vec::new();
    for i in active.iter() {
        let phi: Vec<f64> = sens.matrix.row(i).iter().copied().collect();
        let c = net.link(i).capacity;
        for sign in [1.0, -1.0] {
            let Some(h) = Hyperplane::new(phi.clone(), sign * c) else {
                continue;
            };
            let (mut pos, mut neg) = (false, false);
            for x in g.vertex_coords() {
                match h.side(x) {
                    1 => pos = true,
                    -1 => neg = true,
                    _ => {}
                }
            }
            if pos && neg {
                out.push(h);
            }
        }
    }
    out
}

/// Partition of the admissible region by the capacity hyperplanes; one control per cell.
pub fn partition_controls(net: &Network, node: &AggNode, opts: &SearchOptions) -> Vec<AggControl> {
    partition_with(net, &node.active, &node.region, opts, &FlowCache::new())
}

fn partition_with(
    net: &Network,
    active: &LinkSet,
    region: &IncidenceGraph,
    opts: &SearchOptions,
    cache: &FlowCache,
) -> Vec<AggControl> {
    let Some(u) = admissible_of(net, active, region, opts) else {
        return Vec::new();
    };
    let mut g = u;
    for h in intersecting_constraints(net, active, &g, cache) {
        g = insert_hyperplane(&g, &h).graph;
    }
    let sens = cache.get(net, active);
    let controls: Vec<AggControl> = g
        .cells()
        .into_iter()
        .map(|cell| {
            let x = &g.face(cell).centroid;
            let mut beta = vec![0i8; net.link_count()];
            let mut next = active.clone();
            for i in active.iter() {
                let f = sens.flow(i, x);
                let c = net.link(i).capacity;
                if f > c {
                    beta[i] = 1;
                } else if f < -c {
                    beta[i] = -1;
                }
                if beta[i] != 0 {
                    next.remove(i);
                }
            }
            AggControl {
                active: active.clone(),
                region: g.below(cell),
                beta,
                next_active: next,
            }
        })
        .collect();
    for c in &controls {
        // successors' pseudo-inverses come from rank-one updates of this one
        cache.get_after_removal(net, active, &c.next_active);
    }
    controls
}

/// One-stage value `max sᵀu` over the admissible controls that keep every active flow within
/// capacity, with the maximizing vertex. `None` when no such control exists (possible only for
/// constant controls).
pub fn j1(net: &Network, node: &AggNode, opts: &SearchOptions) -> Option<(f64, Vec<f64>)> {
    let s = control_objective(net);
    partition_controls(net, node, opts)
        .iter()
        .find(|c| c.is_feasible())
        .map(|c| lp_over_vertices(&c.region, &s).expect("cells are nonempty"))
}

#[derive(Debug, Clone)]
struct Outcome {
    value: f64,
    exact: bool,
    path: Vec<AggControl>,
    terminal: Vec<f64>,
}

impl Outcome {
    fn bound(value: f64) -> Self {
        Outcome {
            value,
            exact: false,
            path: Vec::new(),
            terminal: Vec::new(),
        }
    }
}

type StateKey = (LinkSet, Vec<i64>);

struct Searcher<'a> {
    net: &'a Network,
    opts: &'a SearchOptions,
    s: Vec<f64>,
    cache: FlowCache,
    children: HashMap<StateKey, Arc<Vec<AggControl>>>,
    memo: HashMap<(StateKey, usize), Outcome>,
    expanded: usize,
    pruned: usize,
    memo_hits: usize,
}

impl<'a> Searcher<'a> {
    fn new(net: &'a Network, opts: &'a SearchOptions) -> Self {
        Searcher {
            net,
            opts,
            s: control_objective(net),
            cache: FlowCache::new(),
            children: HashMap::new(),
            memo: HashMap::new(),
            expanded: 0,
            pruned: 0,
            memo_hits: 0,
        }
    }

    fn children_of(&mut self, key: &StateKey, region: &IncidenceGraph) -> Arc<Vec<AggControl>> {
        if let Some(c) = self.children.get(key) {
            return c.clone();
        }
        let c = Arc::new(partition_with(
            self.net,
            &key.0,
            region,
            self.opts,
            &self.cache,
        ));
        self.children.insert(key.clone(), c.clone());
        c
    }

    fn upper_bound(&self, region: &IncidenceGraph) -> f64 {
        lp_over_vertices(region, &self.s)
            .map(|r| r.0)
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Exact `J_t(active, region)` when it exceeds `alpha`; otherwise an upper bound `≤ alpha`
    /// flagged as inexact.
    fn value(
        &mut self,
        active: &LinkSet,
        region: &IncidenceGraph,
        t: usize,
        alpha: f64,
    ) -> Outcome {
        let key: StateKey = (active.clone(), region.fingerprint(FINGERPRINT_RESOLUTION));
        if self.opts.memoize {
            if let Some(e) = self.memo.get(&(key.clone(), t)) {
                if e.exact || e.value <= alpha {
                    self.memo_hits += 1;
                    return e.clone();
                }
            }
        }
        let ub = self.upper_bound(region);
        if self.opts.prune && ub <= alpha + EPS_VALUE {
            self.pruned += 1;
            return Outcome::bound(ub);
        }
        self.expanded += 1;
        let children = self.children_of(&key, region);
        let feasible = children.iter().find(|c| c.is_feasible());
        let one_stage =
            feasible.map(|c| lp_over_vertices(&c.region, &self.s).expect("cells are nonempty"));
        let out = if t == 1 {
            match (feasible, one_stage) {
                (Some(c), Some((v, x))) => Outcome {
                    value: v,
                    exact: true,
                    path: vec![c.clone()],
                    terminal: x,
                },
                _ => Outcome {
                    value: f64::NEG_INFINITY,
                    exact: true,
                    path: Vec::new(),
                    terminal: Vec::new(),
                },
            }
        } else {
            let mut a = alpha;
            if self.opts.prune {
                if let Some((v, _)) = &one_stage {
                    a = a.max(v - 2.0 * EPS_VALUE);
                }
            }
            let mut order: Vec<usize> = (0..children.len()).collect();
            if self.opts.prune {
                let ubs: Vec<f64> = children
                    .iter()
                    .map(|c| self.upper_bound(&c.region))
                    .collect();
                order.sort_by(|&x, &y| ubs[y].total_cmp(&ubs[x]));
            }
            let mut best: Option<(usize, Outcome)> = None;
            for idx in order {
                let c = &children[idx];
                let r = self.value(&c.next_active, &c.region, t - 1, a);
                if r.exact && r.value > a {
                    a = r.value;
                    best = Some((idx, r));
                }
            }
            match best {
                Some((idx, r)) => {
                    let mut path = vec![children[idx].clone()];
                    path.extend(r.path);
                    Outcome {
                        value: r.value,
                        exact: true,
                        path,
                        terminal: r.terminal,
                    }
                }
                None if alpha == f64::NEG_INFINITY => Outcome {
                    value: f64::NEG_INFINITY,
                    exact: true,
                    path: Vec::new(),
                    terminal: Vec::new(),
                },
                None => Outcome::bound(alpha),
            }
        };
        if self.opts.memoize {
            self.memo.insert((key, t), out.clone());
        }
        out
    }
}

/// Optimal value `J_N` of the aggregated problem from `state` and an optimal path of cells.
///
/// Depths `1..=N` are searched in turn; each depth starts from the previous optimum as incumbent,
/// which is a valid lower bound because the value is nondecreasing in the horizon.
pub fn value_iteration(
    net: &Network,
    state: &NetworkState,
    n: usize,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    if n == 0 {
        return Err(Error::Infeasible("horizon must be at least 1".into()));
    }
    let root = AggNode::root(net, state, opts.mode)?;
    let mut searcher = Searcher::new(net, opts);
    let mut incumbent = f64::NEG_INFINITY;
    let mut best: Option<Outcome> = None;
    let mut stats = Vec::new();
    for depth in 1..=n {
        let (e0, p0, h0) = (searcher.expanded, searcher.pruned, searcher.memo_hits);
        let alpha = if opts.prune && incumbent.is_finite() {
            incumbent - 1e-7
        } else {
            f64::NEG_INFINITY
        };
        let mut r = searcher.value(&root.active, &root.region, depth, alpha);
        if !r.exact {
            r = searcher.value(&root.active, &root.region, depth, f64::NEG_INFINITY);
        }
        incumbent = r.value;
        stats.push(DepthStats {
            depth,
            expanded: searcher.expanded - e0,
            pruned: searcher.pruned - p0,
            memo_hits: searcher.memo_hits - h0,
            incumbent,
        });
        best = Some(r);
    }
    let best = best.unwrap();
    if !best.value.is_finite() {
        return Err(Error::Infeasible(
            "no control sequence reaches a feasible state".into(),
        ));
    }
    Ok(SearchResult {
        value: best.value,
        path: best.path,
        terminal: best.terminal,
        stats,
    })
}
