//! DC power flow via the weighted Laplacian pseudo-inverse.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linkset::LinkSet;
use crate::net::Network;

/// Tolerance for balance and conservation checks.
pub const EPS_NUM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Signed flow per link, `None` for inactive links. Positive means tail to head.
    pub flows: Vec<Option<f64>>,
    pub components: Vec<Vec<usize>>,
}

impl FlowSolution {
    pub fn flow(&self, link: usize) -> Option<f64> {
        self.flows[link]
    }
}

/// Connected components of `(nodes, active)`, each sorted, ordered by smallest member.
pub fn connected_components(net: &Network, active: &LinkSet) -> Vec<Vec<usize>> {
    let n = net.node_count();
    let mut adj = vec![Vec::new(); n];
    for i in active.iter() {
        let l = net.link(i);
        adj[l.tail].push(l.head);
        adj[l.head].push(l.tail);
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Component label per node.
pub fn component_labels(components: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut label = vec![0; n];
    for (k, comp) in components.iter().enumerate() {
        for &v in comp {
            label[v] = k;
        }
    }
    label
}

fn laplacian(net: &Network, active: &LinkSet) -> DMatrix<f64> {
    let n = net.node_count();
    let mut lap = DMatrix::zeros(n, n);
    for i in active.iter() {
        let l = net.link(i);
        lap[(l.tail, l.tail)] += l.weight;
        lap[(l.head, l.head)] += l.weight;
        lap[(l.tail, l.head)] -= l.weight;
        lap[(l.head, l.tail)] -= l.weight;
    }
    lap
}

/// Moore–Penrose pseudo-inverse of the weighted Laplacian of `(nodes, active)`.
///
/// Each component is grounded at its smallest node, the reduced Laplacian is inverted by
/// Cholesky, and the result is projected onto the complement of the component's constant vector.
pub fn pseudo_inverse(net: &Network, active: &LinkSet) -> DMatrix<f64> {
    let n = net.node_count();
    let lap = laplacian(net, active);
    let mut out = DMatrix::zeros(n, n);
    for comp in connected_components(net, active) {
        let m = comp.len();
        if m == 1 {
            continue;
        }
        let rest = &comp[1..];
        let reduced = DMatrix::from_fn(m - 1, m - 1, |a, b| lap[(rest[a], rest[b])]);
        let inv = reduced
            .cholesky()
            .expect("reduced Laplacian of a connected component is positive definite")
            .inverse();
        // grounded inverse G on the component (zero row/column at the reference node)
        let mut g = DMatrix::zeros(m, m);
        g.view_mut((1, 1), (m - 1, m - 1)).copy_from(&inv);
        // L† = J G J with J the centering projector
        let row_mean = DVector::from_fn(m, |a, _| g.row(a).mean());
        let col_mean = DVector::from_fn(m, |b, _| g.column(b).mean());
        let total = g.mean();
        for a in 0..m {
            for b in 0..m {
                out[(comp[a], comp[b])] = g[(a, b)] - row_mean[a] - col_mean[b] + total;
            }
        }
    }
    out
}

/// Pseudo-inverse after removing `removed` from `active_before`, updated by rank-one corrections.
///
/// Removing a bridge changes the rank; in that case the remaining removals fall back to a full
/// recomputation on the reduced link set.
pub fn update_pseudo_inverse(
    prev: &DMatrix<f64>,
    net: &Network,
    active_before: &LinkSet,
    removed: &LinkSet,
) -> DMatrix<f64> {
    let mut active = active_before.clone();
    let mut lp = prev.clone();
    for i in removed.iter().filter(|&i| active_before.contains(i)) {
        let l = net.link(i);
        let x = lp.column(l.tail) - lp.column(l.head);
        let s = l.weight * (x[l.tail] - x[l.head]);
        active.remove(i);
        if 1.0 - s < 1e-9 {
            return pseudo_inverse(net, &active.difference(removed));
        }
        let k = l.weight / (1.0 - s);
        lp += k * &x * x.transpose();
    }
    lp
}

fn check_balance(components: &[Vec<usize>], p: &[f64]) -> Result<()> {
    for comp in components {
        let residual: f64 = comp.iter().map(|&v| p[v]).sum();
        if residual.abs() > EPS_NUM {
            return Err(Error::UnbalancedInjection {
                node: comp[0],
                residual,
            });
        }
    }
    Ok(())
}

/// Link flows `f = W Aᵀ L† p` for a balanced injection.
pub fn compute_flow(net: &Network, active: &LinkSet, p: &[f64]) -> Result<FlowSolution> {
    let components = connected_components(net, active);
    check_balance(&components, p)?;
    let lp = pseudo_inverse(net, active);
    let theta = &lp * DVector::from_column_slice(p);
    let flows = (0..net.link_count())
        .map(|i| {
            active.contains(i).then(|| {
                let l = net.link(i);
                l.weight * (theta[l.tail] - theta[l.head])
            })
        })
        .collect();
    Ok(FlowSolution { flows, components })
}

/// Flow response of one active link set restricted to the controlled coordinates.
#[derive(Debug, Clone)]
pub struct Sensitivity {
    /// Row `i` maps a control vector (controlled coordinates) to the flow on link `i`.
    /// Rows of inactive links are zero.
    pub matrix: DMatrix<f64>,
    pub components: Vec<Vec<usize>>,
    /// Groups of controlled-coordinate indices sharing a component.
    pub balance_groups: Vec<Vec<usize>>,
}

impl Sensitivity {
    pub fn new(net: &Network, active: &LinkSet) -> Self {
        let lp = pseudo_inverse(net, active);
        Self::from_pseudo_inverse(net, active, &lp)
    }

    pub fn from_pseudo_inverse(net: &Network, active: &LinkSet, lp: &DMatrix<f64>) -> Self {
        let ctrl = net.controlled_nodes();
        let mut matrix = DMatrix::zeros(net.link_count(), ctrl.len());
        for i in active.iter() {
            let l = net.link(i);
            for (j, &v) in ctrl.iter().enumerate() {
                matrix[(i, j)] = l.weight * (lp[(l.tail, v)] - lp[(l.head, v)]);
            }
        }
        let components = connected_components(net, active);
        let label = component_labels(&components, net.node_count());
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); components.len()];
        for (j, &v) in ctrl.iter().enumerate() {
            groups[label[v]].push(j);
        }
        let balance_groups = groups.into_iter().filter(|g| !g.is_empty()).collect();
        Sensitivity {
            matrix,
            components,
            balance_groups,
        }
    }

    /// Flow on link `i` for a control vector over the controlled coordinates.
    pub fn flow(&self, i: usize, u: &[f64]) -> f64 {
        self.matrix.row(i).iter().zip(u).map(|(a, b)| a * b).sum()
    }
}

/// Thread-safe cache of sensitivities keyed by active link set. Pseudo-inverses of link sets
/// reached by removing links from a cached set are obtained by rank-one updates.
#[derive(Debug, Default)]
pub struct FlowCache {
    map: Mutex<HashMap<LinkSet, (Arc<Sensitivity>, Arc<DMatrix<f64>>)>>,
}

impl FlowCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, net: &Network, active: &LinkSet) -> Arc<Sensitivity> {
        if let Some((s, _)) = self.map.lock().unwrap().get(active) {
            return s.clone();
        }
        let lp = pseudo_inverse(net, active);
        self.insert(net, active, lp)
    }

    /// Sensitivity of `child`, derived from the cached pseudo-inverse of `parent ⊇ child` when
    /// one is available.
    pub fn get_after_removal(
        &self,
        net: &Network,
        parent: &LinkSet,
        child: &LinkSet,
    ) -> Arc<Sensitivity> {
        let prev = {
            let map = self.map.lock().unwrap();
            if let Some((s, _)) = map.get(child) {
                return s.clone();
            }
            map.get(parent).map(|(_, lp)| lp.clone())
        };
        let lp = match prev {
            Some(lp) if child.is_subset(parent) => {
                update_pseudo_inverse(&lp, net, parent, &parent.difference(child))
            }
            _ => pseudo_inverse(net, child),
        };
        self.insert(net, child, lp)
    }

    fn insert(&self, net: &Network, active: &LinkSet, lp: DMatrix<f64>) -> Arc<Sensitivity> {
        let s = Arc::new(Sensitivity::from_pseudo_inverse(net, active, &lp));
        self.map
            .lock()
            .unwrap()
            .insert(active.clone(), (s.clone(), Arc::new(lp)));
        s
    }
}
