//! Shared oracles for integration tests.
#![allow(dead_code)]

pub mod chi;
pub mod sweep;

use cascade_core::geometry::{IncidenceGraph, LatticeBuilder};
use nalgebra::{DMatrix, DVector};

/// Simplex lattice with one face per nonempty vertex subset.
pub fn simplex(points: &[Vec<f64>]) -> IncidenceGraph {
    let m = points.len();
    let mut b = LatticeBuilder::new(points[0].len());
    let mut ids = vec![usize::MAX; 1 << m];
    let mut masks: Vec<usize> = (1..1usize << m).collect();
    masks.sort_by_key(|s| s.count_ones());
    for s in masks {
        let k = s.count_ones() as usize;
        ids[s] = if k == 1 {
            b.vertex(points[s.trailing_zeros() as usize].clone())
        } else {
            let subs = (0..m)
                .filter(|&i| s & (1 << i) != 0)
                .map(|i| ids[s & !(1 << i)])
                .collect();
            b.face(k - 1, subs)
        };
    }
    b.finish()
}

/// Halfspaces `a·x ≤ b` of a full-dimensional lattice, one per facet.
pub fn facet_inequalities(g: &IncidenceGraph) -> Vec<(Vec<f64>, f64)> {
    let d = g.ambient();
    let top = g.top();
    let center = DVector::from_column_slice(&g.face(top).centroid);
    g.layer(d - 1)
        .into_iter()
        .map(|f| {
            let pts: Vec<DVector<f64>> = g
                .face(f)
                .vertices
                .iter()
                .map(|&v| DVector::from_column_slice(g.coords(v)))
                .collect();
            let n = normal_through(&pts, d);
            let off = n.dot(&pts[0]);
            let (n, off) = if n.dot(&center) > off {
                (-n, -off)
            } else {
                (n, off)
            };
            (n.as_slice().to_vec(), off)
        })
        .collect()
}

/// Unit normal of the hyperplane through `pts` (which span a `(d−1)`-flat).
pub fn normal_through(pts: &[DVector<f64>], d: usize) -> DVector<f64> {
    let rows: Vec<DVector<f64>> = pts[1..].iter().map(|p| p - &pts[0]).collect();
    let r = rows.len().max(d);
    let m = DMatrix::from_fn(r, d, |i, j| if i < rows.len() { rows[i][j] } else { 0.0 });
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let k = (0..d)
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap();
    vt.row(k).transpose()
}

/// Max signed violation of the inequalities at `x` (negative means strictly inside).
pub fn hrep_score(h: &[(Vec<f64>, f64)], x: &[f64]) -> f64 {
    h.iter()
        .map(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() - b)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Facet hyperplanes of `conv(points)` in dimension 3 by brute force over point triples.
pub fn brute_force_facets_3d(points: &[Vec<f64>], tol: f64) -> Vec<(Vec<f64>, f64)> {
    let n = points.len();
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    let v: Vec<DVector<f64>> = points
        .iter()
        .map(|p| DVector::from_column_slice(p))
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nrm = (&v[j] - &v[i]).cross(&(&v[k] - &v[i]));
                if nrm.norm() < 1e-9 {
                    continue;
                }
                let nrm = nrm.normalize();
                let off = nrm.dot(&v[i]);
                let (mut pos, mut neg) = (false, false);
                for p in &v {
                    let s = nrm.dot(p) - off;
                    pos |= s > tol;
                    neg |= s < -tol;
                }
                if pos && neg {
                    continue;
                }
                let (nrm, off) = if pos { (-nrm, -off) } else { (nrm, off) };
                if !out
                    .iter()
                    .any(|(m, o)| same_plane(m, *o, nrm.as_slice(), off, tol))
                {
                    out.push((nrm.as_slice().to_vec(), off));
                }
            }
        }
    }
    out
}

pub fn same_plane(a: &[f64], oa: f64, b: &[f64], ob: f64, tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-6) && (oa - ob).abs() < tol.max(1e-6)
}

use cascade_core::{Instance, LinkSet, Network, NodeRole};
use rand::Rng;

/// Weighted Laplacian of the active links.
pub fn laplacian(net: &Network, active: &LinkSet) -> DMatrix<f64> {
    let n = net.node_count();
    let mut l = DMatrix::zeros(n, n);
    for i in active.iter() {
        let e = net.link(i);
        l[(e.tail, e.tail)] += e.weight;
        l[(e.head, e.head)] += e.weight;
        l[(e.tail, e.head)] -= e.weight;
        l[(e.head, e.tail)] -= e.weight;
    }
    l
}

/// Flows `W Aᵀ L† p` with the pseudo-inverse taken from an SVD.
pub fn svd_flows(net: &Network, active: &LinkSet, p: &[f64]) -> Vec<Option<f64>> {
    let lp = laplacian(net, active).pseudo_inverse(1e-10).unwrap();
    let theta = &lp * DVector::from_column_slice(p);
    (0..net.link_count())
        .map(|i| {
            active.contains(i).then(|| {
                let e = net.link(i);
                e.weight * (theta[e.tail] - theta[e.head])
            })
        })
        .collect()
}

/// Components of the active subgraph by union-find, as a label per node.
pub fn component_label(net: &Network, active: &LinkSet) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..net.node_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in active.iter() {
        let e = net.link(i);
        let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
        parent[a] = b;
    }
    (0..net.node_count())
        .map(|v| find(&mut parent, v))
        .collect()
}

/// Balanced injection on every component of `active`: random values on the controlled nodes,
/// shifted so that each component sums to zero.
pub fn balanced_injection<R: Rng>(net: &Network, active: &LinkSet, rng: &mut R) -> Vec<f64> {
    let label = component_label(net, active);
    let mut p: Vec<f64> = (0..net.node_count())
        .map(|v| {
            if net.role(v) == NodeRole::Transmission {
                0.0
            } else {
                rng.gen_range(-3.0..3.0)
            }
        })
        .collect();
    for root in 0..net.node_count() {
        let members: Vec<usize> = (0..net.node_count())
            .filter(|&v| label[v] == root)
            .collect();
        let ctrl: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&v| net.role(v) != NodeRole::Transmission)
            .collect();
        if ctrl.is_empty() {
            continue;
        }
        let mean = ctrl.iter().map(|&v| p[v]).sum::<f64>() / ctrl.len() as f64;
        for &v in &ctrl {
            p[v] -= mean;
        }
        if ctrl.len() == 1 {
            p[ctrl[0]] = 0.0;
        }
    }
    p
}

/// Random connected instance: a random spanning tree plus `extra` links, one or two supply
/// nodes, the rest demand or transmission. Capacities are drawn relative to the initial flows so
/// that some links overload.
pub fn random_instance<R: Rng>(rng: &mut R, nodes: usize, extra: usize) -> Instance {
    assert!(nodes >= 2);
    let mut roles = vec![NodeRole::Demand; nodes];
    roles[0] = NodeRole::Supply;
    for r in roles.iter_mut().skip(1) {
        let x: f64 = rng.gen();
        *r = if x < 0.2 {
            NodeRole::Supply
        } else if x < 0.4 {
            NodeRole::Transmission
        } else {
            NodeRole::Demand
        };
    }
    if !roles.contains(&NodeRole::Demand) {
        roles[nodes - 1] = NodeRole::Demand;
    }
    let mut links: Vec<(usize, usize, f64, f64)> = Vec::new();
    for v in 1..nodes {
        let u = rng.gen_range(0..v);
        links.push((u, v, rng.gen_range(0.5..2.0), 1.0));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..nodes);
        let mut b = rng.gen_range(0..nodes);
        while b == a {
            b = rng.gen_range(0..nodes);
        }
        links.push((a, b, rng.gen_range(0.5..2.0), 1.0));
    }
    let supplies: Vec<usize> = (0..nodes)
        .filter(|&v| roles[v] == NodeRole::Supply)
        .collect();
    let demands: Vec<usize> = (0..nodes)
        .filter(|&v| roles[v] == NodeRole::Demand)
        .collect();
    let total = rng.gen_range(1.0..4.0);
    let split = |k: usize, rng: &mut R| -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s * total).collect()
    };
    let mut p0 = vec![0.0; nodes];
    for (&v, x) in supplies.iter().zip(split(supplies.len(), rng)) {
        p0[v] = x;
    }
    for (&v, x) in demands.iter().zip(split(demands.len(), rng)) {
        p0[v] = -x;
    }
    let probe = Network::from_parts(roles.clone(), &links).unwrap();
    let flows = svd_flows(&probe, &probe.all_links(), &p0);
    for (l, f) in links.iter_mut().zip(&flows) {
        let f = f.unwrap().abs();
        l.3 = (f * rng.gen_range(0.6..1.6)).max(0.05);
    }
    Instance::new(Network::from_parts(roles, &links).unwrap(), p0, Vec::new())
}

/// Two-node network with one supply node, one demand node and parallel links.
pub fn parallel_network(weights: &[f64], capacities: &[f64]) -> Network {
    let links: Vec<(usize, usize, f64, f64)> = weights
        .iter()
        .zip(capacities)
        .map(|(&w, &c)| (0, 1, w, c))
        .collect();
    Network::from_parts(vec![NodeRole::Supply, NodeRole::Demand], &links).unwrap()
}

/// Random tree-reducible instance: `terminals` supply or demand nodes joined along a random tree,
/// each tree link realized by a single link, two parallel links, a path through a transmission
/// node, or a triangle with a transmission node. Capacities are drawn around the initial flows.
pub fn random_tree_instance<R: Rng>(rng: &mut R, terminals: usize) -> Instance {
    assert!(terminals >= 2);
    let mut roles = vec![NodeRole::Supply];
    for _ in 1..terminals {
        roles.push(if rng.gen_bool(0.35) {
            NodeRole::Supply
        } else {
            NodeRole::Demand
        });
    }
    if !roles.contains(&NodeRole::Demand) {
        roles[terminals - 1] = NodeRole::Demand;
    }
    let mut links: Vec<(usize, usize, f64, f64)> = Vec::new();
    let w = |rng: &mut R| rng.gen_range(0.5..2.0);
    for v in 1..terminals {
        let u = rng.gen_range(0..v);
        let (a, b) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
        match rng.gen_range(0..4) {
            0 => links.push((a, b, w(rng), 1.0)),
            1 => {
                links.push((a, b, w(rng), 1.0));
                links.push((a, b, w(rng), 1.0));
            }
            2 => {
                let t = roles.len();
                roles.push(NodeRole::Transmission);
                links.push((a, t, w(rng), 1.0));
                links.push((t, b, w(rng), 1.0));
            }
            _ => {
                let t = roles.len();
                roles.push(NodeRole::Transmission);
                links.push((a, t, w(rng), 1.0));
                links.push((t, b, w(rng), 1.0));
                links.push((a, b, w(rng), 1.0));
            }
        }
    }
    let n = roles.len();
    let supplies: Vec<usize> = (0..n).filter(|&v| roles[v] == NodeRole::Supply).collect();
    let demands: Vec<usize> = (0..n).filter(|&v| roles[v] == NodeRole::Demand).collect();
    let total = rng.gen_range(1.0..4.0);
    let mut p0 = vec![0.0; n];
    for (group, sign) in [(&supplies, 1.0), (&demands, -1.0)] {
        let raw: Vec<f64> = group.iter().map(|_| rng.gen_range(0.2..1.0)).collect();
        let s: f64 = raw.iter().sum();
        for (&v, x) in group.iter().zip(raw) {
            p0[v] = sign * x / s * total;
        }
    }
    let probe = Network::from_parts(roles.clone(), &links).unwrap();
    let flows = svd_flows(&probe, &probe.all_links(), &p0);
    for (l, f) in links.iter_mut().zip(&flows) {
        l.3 = (f.unwrap().abs() * rng.gen_range(0.5..1.5)).max(0.05);
    }
    Instance::new(Network::from_parts(roles, &links).unwrap(), p0, Vec::new())
}

/// Random instance with 2 to 5 nodes, a supply and between 2 and `max_controlled` controlled nodes.
pub fn small_instance<R: Rng>(rng: &mut R, max_controlled: usize) -> Instance {
    loop {
        let nodes = rng.gen_range(2..=5);
        let extra = rng.gen_range(0..3);
        let inst = random_instance(rng, nodes, extra);
        let ctrl = inst.net.controlled_nodes().len();
        let has_supply = inst.net.roles().contains(&NodeRole::Supply);
        if ctrl <= max_controlled && ctrl >= 2 && has_supply {
            return inst;
        }
    }
}
