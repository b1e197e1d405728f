//! Discretized search over a grid of admissible controls; a lower bound on the optimal value.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::cascade::{ControlBox, NetworkState, EPS_CAP};
use crate::flow::FlowCache;
use crate::linkset::LinkSet;
use crate::net::Network;

use super::{balance_groups, control_objective, restrict};

/// Grid over `Π(p) ∩ B_E`: `n0` points on every free axis. In each component one coordinate (the
/// one with the widest range) is solved from the balance equation instead of gridded.
struct Layout {
    m: usize,
    /// Free axes: coordinate, bounds and objective share (its sign minus that of the solved one).
    axes: Vec<(usize, f64, f64, f64)>,
    /// Per component: solved coordinate, its bounds and the axes summed into it.
    deps: Vec<(usize, f64, f64, Vec<usize>)>,
    /// Component of every axis.
    group_of: Vec<usize>,
    n0: usize,
}

impl Layout {
    fn new(net: &Network, s: &[f64], active: &LinkSet, p: &[f64], n0: usize) -> Self {
        let bounds = ControlBox::of(p);
        let mut axes = Vec::new();
        let mut deps = Vec::new();
        let mut group_of = Vec::new();
        for group in balance_groups(net, active) {
            let free: Vec<usize> = group
                .iter()
                .copied()
                .filter(|&j| bounds.upper[j] > bounds.lower[j])
                .collect();
            let has_pos = free.iter().any(|&j| bounds.upper[j] > 0.0);
            let has_neg = free.iter().any(|&j| bounds.lower[j] < 0.0);
            if !(has_pos && has_neg) {
                continue;
            }
            let dep = *free
                .iter()
                .max_by(|&&a, &&b| {
                    (bounds.upper[a] - bounds.lower[a])
                        .total_cmp(&(bounds.upper[b] - bounds.lower[b]))
                })
                .unwrap();
            let mut members = Vec::new();
            for &j in free.iter().filter(|&&j| j != dep) {
                members.push(axes.len());
                group_of.push(deps.len());
                axes.push((j, bounds.lower[j], bounds.upper[j], s[j] - s[dep]));
            }
            deps.push((dep, bounds.lower[dep], bounds.upper[dep], members));
        }
        Layout {
            m: p.len(),
            axes,
            deps,
            group_of,
            n0,
        }
    }

    fn at(&self, k: usize, i: usize) -> f64 {
        let (_, lo, hi, _) = self.axes[k];
        lo + (hi - lo) * i as f64 / (self.n0 - 1) as f64
    }

    fn dep_tol(lo: f64, hi: f64) -> f64 {
        1e-12 * (1.0 + lo.abs() + hi.abs())
    }

    /// Control for grid indices `idx`, or `None` when a solved coordinate leaves its bounds.
    fn point(&self, idx: &[usize]) -> Option<Vec<f64>> {
        let mut u = vec![0.0; self.m];
        for (k, &i) in idx.iter().enumerate() {
            u[self.axes[k].0] = self.at(k, i);
        }
        for (dep, lo, hi, members) in &self.deps {
            let d = -members.iter().map(|&k| u[self.axes[k].0]).sum::<f64>();
            let tol = Self::dep_tol(*lo, *hi);
            if d < lo - tol || d > hi + tol {
                return None;
            }
            u[*dep] = d.clamp(*lo, *hi);
        }
        Some(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Grid points in order of decreasing objective. The objective is a sum of per-axis shares, so a
/// best-first walk over per-axis sorted indices visits the points lazily.
struct GridWalk<'a> {
    layout: &'a Layout,
    /// Per axis: grid indices by decreasing share.
    sorted: Vec<Vec<usize>>,
    heap: BinaryHeap<(OrdF64, Vec<usize>)>,
    seen: HashSet<Vec<usize>>,
}

impl<'a> GridWalk<'a> {
    fn new(layout: &'a Layout) -> Self {
        let sorted = (0..layout.axes.len())
            .map(|k| {
                let share = layout.axes[k].3;
                let mut order: Vec<usize> = (0..layout.n0).collect();
                order.sort_by(|&a, &b| {
                    (share * layout.at(k, b)).total_cmp(&(share * layout.at(k, a)))
                });
                order
            })
            .collect();
        let mut walk = GridWalk {
            layout,
            sorted,
            heap: BinaryHeap::new(),
            seen: HashSet::new(),
        };
        walk.push(vec![0; layout.axes.len()]);
        walk
    }

    fn push(&mut self, rank: Vec<usize>) {
        if self.seen.insert(rank.clone()) {
            let total = rank
                .iter()
                .enumerate()
                .map(|(k, &r)| self.layout.axes[k].3 * self.layout.at(k, self.sorted[k][r]))
                .sum();
            self.heap.push((OrdF64(total), rank));
        }
    }

    /// Next grid point within the balance bounds, with an upper bound on the objective of every
    /// point after it.
    fn next_point(&mut self) -> Option<(Vec<f64>, f64)> {
        while let Some((OrdF64(bound), rank)) = self.heap.pop() {
            for k in 0..rank.len() {
                if rank[k] + 1 < self.layout.n0 {
                    let mut child = rank.clone();
                    child[k] += 1;
                    self.push(child);
                }
            }
            let idx: Vec<usize> = rank
                .iter()
                .enumerate()
                .map(|(k, &r)| self.sorted[k][r])
                .collect();
            if let Some(u) = self.layout.point(&idx) {
                return Some((u, bound));
            }
        }
        None
    }
}

struct Grid<'a> {
    net: &'a Network,
    s: Vec<f64>,
    n0: usize,
    cache: FlowCache,
}

impl Grid<'_> {
    fn objective(&self, u: &[f64]) -> f64 {
        self.s.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    fn surviving(&self, active: &LinkSet, u: &[f64]) -> (LinkSet, bool) {
        let sens = self.cache.get(self.net, active);
        let mut next = active.clone();
        for i in active.iter() {
            if sens.flow(i, u).abs() > self.net.link(i).capacity + EPS_CAP {
                next.remove(i);
            }
        }
        let unchanged = next == *active;
        (next, unchanged)
    }

    /// Best objective of a grid point that overloads no link, or `-∞`. All axes but the last are
    /// enumerated; along the last one flows are affine, so its feasible grid points form a range
    /// and only the best end needs checking.
    fn best_feasible(&self, layout: &Layout, active: &LinkSet) -> f64 {
        let k = layout.axes.len();
        if k == 0 {
            return match layout.point(&[]) {
                Some(u) if self.surviving(active, &u).1 => self.objective(&u),
                _ => f64::NEG_INFINITY,
            };
        }
        let sens = self.cache.get(self.net, active);
        let last = k - 1;
        let (jl, lo, hi, share) = layout.axes[last];
        let (dep, dlo, dhi, _) = &layout.deps[layout.group_of[last]];
        let h = (hi - lo) / (self.n0 - 1) as f64;
        let mut best = f64::NEG_INFINITY;
        let mut idx = vec![0usize; k];
        loop {
            idx[last] = 0;
            if let Some(base) = layout.point(&idx) {
                // u(x) = base + (x − lo)·(e_last − e_dep) along the last axis
                let mut dir = vec![0.0; layout.m];
                dir[jl] += 1.0;
                dir[*dep] -= 1.0;
                let (mut xl, mut xh) = (lo, hi);
                // the solved coordinate stays within its bounds
                let d0 = base[*dep] + lo;
                let tol = Layout::dep_tol(*dlo, *dhi);
                xl = xl.max(d0 - dhi - tol);
                xh = xh.min(d0 - dlo + tol);
                for i in active.iter() {
                    let a = sens.flow(i, &base);
                    let b = sens.flow(i, &dir);
                    let c = self.net.link(i).capacity + EPS_CAP;
                    // |a + b·(x − lo)| ≤ c
                    if b.abs() < 1e-15 {
                        if a.abs() > c {
                            xh = f64::NEG_INFINITY;
                        }
                        continue;
                    }
                    let (r1, r2) = ((-c - a) / b, (c - a) / b);
                    xl = xl.max(lo + r1.min(r2));
                    xh = xh.min(lo + r1.max(r2));
                }
                if xl <= xh {
                    let il = (((xl - lo) / h) - 1e-9).ceil().max(0.0) as usize;
                    let ih = ((((xh - lo) / h) + 1e-9).floor() as isize).min(self.n0 as isize - 1);
                    if ih >= il as isize {
                        let ih = ih as usize;
                        // try the best end first and step inwards past round-off
                        let order: Vec<usize> = if share >= 0.0 {
                            (il..=ih).rev().take(3).chain((il..=ih).take(3)).collect()
                        } else {
                            (il..=ih).take(3).chain((il..=ih).rev().take(3)).collect()
                        };
                        for i in order {
                            idx[last] = i;
                            if let Some(u) = layout.point(&idx) {
                                if self.surviving(active, &u).1 {
                                    best = best.max(self.objective(&u));
                                    break;
                                }
                            }
                        }
                    }
                }
            }
            // odometer over the enumerated axes
            let mut a = 0;
            while a < last {
                idx[a] += 1;
                if idx[a] < self.n0 {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == last {
                break;
            }
        }
        best
    }

    fn value(&self, active: &LinkSet, p: &[f64], t: usize, mut best: f64) -> f64 {
        let start = best;
        let layout = Layout::new(self.net, &self.s, active, p, self.n0);
        // a feasible point is held for the remaining stages
        best = best.max(self.best_feasible(&layout, active));
        if t > 1 {
            let mut walk = GridWalk::new(&layout);
            while let Some((u, bound)) = walk.next_point() {
                // later points have objective at most `bound`
                if bound + 1e-12 * (1.0 + bound.abs()) <= best {
                    break;
                }
                if self.objective(&u) <= best {
                    continue;
                }
                // above every feasible point, so some link fails
                let (next, _) = self.surviving(active, &u);
                best = best.max(self.value(&next, &u, t - 1, best));
            }
        }
        if best > start {
            best
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Best objective over control sequences whose every control lies on a grid with `n0` points per
/// free axis of the admissible set. A lower bound on the optimal value used as a test oracle.
pub fn baseline_discretized_search(
    net: &Network,
    state: &NetworkState,
    n: usize,
    n0: usize,
) -> f64 {
    assert!(n0 >= 2, "grid needs at least two points per axis");
    let grid = Grid {
        net,
        s: control_objective(net),
        n0,
        cache: FlowCache::new(),
    };
    let p = restrict(net, &state.p);
    grid.value(&state.active, &p, n.max(1), f64::NEG_INFINITY)
}
