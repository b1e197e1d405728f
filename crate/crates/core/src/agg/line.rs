//! Aggregated search along a single control direction `u = λ·d`. Cells and regions are closed
//! intervals of `λ`, so no lattice is needed.

use std::collections::HashMap;

use crate::cascade::{simulate_controls, NetworkState, EPS_CAP};
use crate::error::{Error, Result};
use crate::flow::FlowCache;
use crate::linkset::LinkSet;
use crate::net::Network;

use super::{balance_groups, control_objective, expand, EPS_VALUE};

/// Resolution of interval endpoints in memo keys.
const KEY_RESOLUTION: f64 = 1e-9;

/// Which scalar sequences `λ^0, …, λ^{N−1}` the search ranges over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineMode {
    /// `λ^t` between zero and `λ^{t−1}`.
    Monotone,
    /// `λ^t = λ^0`; a region is the set of candidate constants.
    Constant,
    /// Any `λ^t ∈ [−bound, bound]` at every stage.
    Relaxed { bound: f64 },
}

/// Closed interval `[lo, hi]` of the scalar `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Span { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Span { lo: x, hi: x }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    fn key(&self) -> (i64, i64) {
        (
            (self.lo / KEY_RESOLUTION).round() as i64,
            (self.hi / KEY_RESOLUTION).round() as i64,
        )
    }
}

/// Cell of the admissible interval on which every `λ` produces the same surviving link set.
#[derive(Debug, Clone, PartialEq)]
pub struct LineCell {
    pub active: LinkSet,
    pub span: Span,
    pub next_active: LinkSet,
}

impl LineCell {
    pub fn is_feasible(&self) -> bool {
        self.next_active == self.active
    }
}

#[derive(Debug, Clone)]
pub struct LineResult {
    pub value: f64,
    pub path: Vec<LineCell>,
    /// Maximizing `λ` of the final stage.
    pub terminal: f64,
}

/// Scalar control problem along a fixed direction over the controlled coordinates.
pub struct LineProblem<'a> {
    net: &'a Network,
    dir: Vec<f64>,
    mode: LineMode,
    /// `sᵀd`: objective per unit of `λ`.
    slope: f64,
    cache: FlowCache,
    cells: HashMap<(LinkSet, (i64, i64)), Vec<LineCell>>,
    memo: HashMap<(LinkSet, Option<(i64, i64)>, usize), Outcome>,
}

#[derive(Debug, Clone)]
struct Outcome {
    value: f64,
    exact: bool,
    path: Vec<LineCell>,
    terminal: f64,
}

impl Outcome {
    fn bound(value: f64) -> Self {
        Outcome {
            value,
            exact: false,
            path: Vec::new(),
            terminal: f64::NAN,
        }
    }

    fn infeasible() -> Self {
        Outcome {
            value: f64::NEG_INFINITY,
            exact: true,
            path: Vec::new(),
            terminal: f64::NAN,
        }
    }
}

impl<'a> LineProblem<'a> {
    /// `dir` is given over the controlled coordinates.
    pub fn new(net: &'a Network, dir: Vec<f64>, mode: LineMode) -> Self {
        assert_eq!(
            dir.len(),
            net.controlled_nodes().len(),
            "direction must cover the controlled nodes"
        );
        let slope = control_objective(net)
            .iter()
            .zip(&dir)
            .map(|(a, b)| a * b)
            .sum();
        LineProblem {
            net,
            dir,
            mode,
            slope,
            cache: FlowCache::new(),
            cells: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    pub fn direction(&self) -> &[f64] {
        &self.dir
    }

    /// Largest `λ ≥ 0` with `λ·d ∈ Π(p)` for `p` over the controlled coordinates; zero when `d`
    /// leaves the orthant of `p`.
    pub fn reach(&self, p: &[f64]) -> f64 {
        let mut lam = f64::INFINITY;
        for (&dj, &pj) in self.dir.iter().zip(p) {
            if dj == 0.0 {
                continue;
            }
            let r = pj / dj;
            lam = lam.min(if r >= 0.0 { r } else { 0.0 });
        }
        if lam.is_finite() {
            lam
        } else {
            0.0
        }
    }

    /// Admissible interval of a state: the shedding hull of `region` (or `region` itself for
    /// constant controls, or the relaxation bound), collapsed to `{0}` when `d` is unbalanced on
    /// some component of `active`. `None` when that collapse leaves nothing.
    pub fn admissible(&self, active: &LinkSet, region: Span) -> Option<Span> {
        let span = match self.mode {
            LineMode::Monotone => Span::new(region.lo.min(0.0), region.hi.max(0.0)),
            LineMode::Constant => region,
            LineMode::Relaxed { bound } => Span::new(-bound, bound),
        };
        let scale = 1.0 + self.dir.iter().map(|x| x.abs()).sum::<f64>();
        let balanced = balance_groups(self.net, active)
            .iter()
            .all(|g| g.iter().map(|&j| self.dir[j]).sum::<f64>().abs() <= 1e-12 * scale);
        if balanced {
            Some(span)
        } else if span.contains(0.0, 0.0) {
            Some(Span::point(0.0))
        } else {
            None
        }
    }

    /// Flow on each link per unit of `λ`.
    fn gains(&self, active: &LinkSet) -> Vec<f64> {
        let sens = self.cache.get(self.net, active);
        (0..self.net.link_count())
            .map(|i| {
                if active.contains(i) {
                    sens.flow(i, &self.dir)
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn surviving(&self, active: &LinkSet, gains: &[f64], lam: f64) -> LinkSet {
        let mut next = active.clone();
        for i in active.iter() {
            if (gains[i] * lam).abs() > self.net.link(i).capacity + EPS_CAP {
                next.remove(i);
            }
        }
        next
    }

    /// Partition of the admissible interval at the capacity breakpoints `λ = ±c_i / g_i`.
    pub fn partition(&mut self, active: &LinkSet, region: Span) -> Vec<LineCell> {
        let Some(adm) = self.admissible(active, region) else {
            return Vec::new();
        };
        let key = (active.clone(), adm.key());
        if let Some(c) = self.cells.get(&key) {
            return c.clone();
        }
        let gains = self.gains(active);
        let mut cuts = vec![adm.lo, adm.hi];
        let tol = 1e-12 * (1.0 + adm.lo.abs() + adm.hi.abs());
        for i in active.iter() {
            if gains[i].abs() < 1e-14 {
                continue;
            }
            let b = self.net.link(i).capacity / gains[i].abs();
            for x in [b, -b] {
                if x > adm.lo + tol && x < adm.hi - tol {
                    cuts.push(x);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= tol);
        let spans: Vec<Span> = if cuts.len() == 1 || adm.len() <= tol {
            vec![adm]
        } else {
            cuts.windows(2).map(|w| Span::new(w[0], w[1])).collect()
        };
        let out: Vec<LineCell> = spans
            .into_iter()
            .map(|span| {
                let next_active = self.surviving(active, &gains, span.mid());
                LineCell {
                    active: active.clone(),
                    span,
                    next_active,
                }
            })
            .collect();
        for c in &out {
            self.cache
                .get_after_removal(self.net, active, &c.next_active);
        }
        self.cells.insert(key, out.clone());
        out
    }

    fn best_in(&self, span: Span) -> (f64, f64) {
        let (a, b) = (self.slope * span.lo, self.slope * span.hi);
        if b >= a {
            (b, span.hi)
        } else {
            (a, span.lo)
        }
    }

    fn upper_bound(&self, active: &LinkSet, region: Span) -> f64 {
        self.admissible(active, region)
            .map_or(f64::NEG_INFINITY, |s| self.best_in(s).0)
    }

    fn value(&mut self, active: &LinkSet, region: Span, t: usize, alpha: f64) -> Outcome {
        let key = (
            active.clone(),
            self.admissible(active, region).map(|s| s.key()),
            t,
        );
        if let Some(e) = self.memo.get(&key) {
            if e.exact || e.value <= alpha {
                return e.clone();
            }
        }
        let ub = self.upper_bound(active, region);
        if ub <= alpha + EPS_VALUE {
            return Outcome::bound(ub);
        }
        let cells = self.partition(active, region);
        let feasible = cells
            .iter()
            .filter(|c| c.is_feasible())
            .map(|c| (c, self.best_in(c.span)))
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0));
        let out = if t == 1 {
            match feasible {
                Some((c, (v, x))) => Outcome {
                    value: v,
                    exact: true,
                    path: vec![c.clone()],
                    terminal: x,
                },
                None => Outcome::infeasible(),
            }
        } else {
            let mut a = alpha;
            if let Some((_, (v, _))) = feasible {
                a = a.max(v - 2.0 * EPS_VALUE);
            }
            let mut order: Vec<usize> = (0..cells.len()).collect();
            let ubs: Vec<f64> = cells
                .iter()
                .map(|c| self.upper_bound(&c.next_active, c.span))
                .collect();
            order.sort_by(|&x, &y| ubs[y].total_cmp(&ubs[x]));
            let mut best: Option<(usize, Outcome)> = None;
            for idx in order {
                let c = cells[idx].clone();
                let r = self.value(&c.next_active, c.span, t - 1, a);
                if r.exact && r.value > a {
                    a = r.value;
                    best = Some((idx, r));
                }
            }
            match best {
                Some((idx, r)) => {
                    let mut path = vec![cells[idx].clone()];
                    path.extend(r.path);
                    Outcome {
                        value: r.value,
                        exact: true,
                        path,
                        terminal: r.terminal,
                    }
                }
                None if alpha == f64::NEG_INFINITY => Outcome::infeasible(),
                None => Outcome::bound(alpha),
            }
        };
        self.memo.insert(key, out.clone());
        out
    }

    /// Optimal `N`-stage value from `(active, region)` with an optimal path of cells.
    pub fn solve(&mut self, active: &LinkSet, region: Span, n: usize) -> Result<LineResult> {
        if n == 0 {
            return Err(Error::Infeasible("horizon must be at least 1".into()));
        }
        let mut incumbent = f64::NEG_INFINITY;
        let mut best = None;
        for depth in 1..=n {
            let alpha = if incumbent.is_finite() {
                incumbent - 1e-7
            } else {
                f64::NEG_INFINITY
            };
            let mut r = self.value(active, region, depth, alpha);
            if !r.exact {
                r = self.value(active, region, depth, f64::NEG_INFINITY);
            }
            incumbent = r.value;
            best = Some(r);
        }
        let best = best.unwrap();
        if !best.value.is_finite() {
            return Err(Error::Infeasible(
                "no control sequence along the direction reaches a feasible state".into(),
            ));
        }
        Ok(LineResult {
            value: best.value,
            path: best.path,
            terminal: best.terminal,
        })
    }

    /// Union of the final-stage feasible cells over all `N`-stage cell paths from
    /// `(active, region)`, as sorted disjoint closed intervals of `λ`.
    pub fn collect_feasible(&mut self, active: &LinkSet, region: Span, n: usize) -> Vec<Span> {
        let mut found = Vec::new();
        let mut seen = std::collections::HashSet::new();
        self.collect(active, region, n.max(1), &mut found, &mut seen);
        merge_spans(found)
    }

    fn collect(
        &mut self,
        active: &LinkSet,
        region: Span,
        t: usize,
        found: &mut Vec<Span>,
        seen: &mut std::collections::HashSet<(LinkSet, (i64, i64), usize)>,
    ) {
        let Some(adm) = self.admissible(active, region) else {
            return;
        };
        if !seen.insert((active.clone(), adm.key(), t)) {
            return;
        }
        for c in self.partition(active, region) {
            if c.is_feasible() {
                found.push(c.span);
            } else if t > 1 {
                self.collect(&c.next_active, c.span, t - 1, found, seen);
            }
        }
    }

    /// Scalar controls that follow `result.path` and reach within `epsilon` of its value.
    pub fn retrieve(&self, result: &LineResult, epsilon: f64) -> Result<Vec<f64>> {
        if !(epsilon > 0.0) {
            return Err(Error::RetrievalFailed {
                step: 0,
                reason: "epsilon must be positive".into(),
            });
        }
        let n = result.path.len();
        if n == 0 {
            return Err(Error::RetrievalFailed {
                step: 0,
                reason: "empty path".into(),
            });
        }
        let m = self.dir.len().max(1) as f64;
        let norm = self
            .dir
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(1e-300);
        let mut lam = vec![0.0; n];
        let last = result.path[n - 1].span;
        let gap = last.mid() - result.terminal;
        let step = (epsilon / m / norm / self.slope.abs().max(1.0)).min(gap.abs()) / 2.0;
        lam[n - 1] = result.terminal + step * gap.signum();
        for t in (0..n - 1).rev() {
            let span = result.path[t].span;
            let next = lam[t + 1];
            lam[t] = match self.mode {
                LineMode::Constant => next,
                LineMode::Relaxed { .. } => span.mid(),
                LineMode::Monotone => {
                    let clipped = if next >= 0.0 {
                        Span::new(span.lo.max(next), span.hi)
                    } else {
                        Span::new(span.lo, span.hi.min(next))
                    };
                    if clipped.lo > clipped.hi {
                        return Err(Error::RetrievalFailed {
                            step: t,
                            reason: "no scalar in the cell dominates the next one".into(),
                        });
                    }
                    clipped.mid()
                }
            };
        }
        Ok(lam)
    }

    /// Node vectors `λ^t·d` for the scalar sequence.
    pub fn controls(&self, lam: &[f64]) -> Vec<Vec<f64>> {
        lam.iter()
            .map(|&l| {
                expand(
                    self.net,
                    &self.dir.iter().map(|d| l * d).collect::<Vec<_>>(),
                )
            })
            .collect()
    }

    /// Simulates the scalar sequence from `state` and checks the path's active sets, terminal
    /// feasibility and the value gap. Applies to monotone and constant modes, whose controls are
    /// admissible in the raw dynamics.
    pub fn verify(
        &self,
        state: &NetworkState,
        result: &LineResult,
        lam: &[f64],
        epsilon: f64,
    ) -> Result<()> {
        let controls = self.controls(lam);
        let (states, feasible) =
            simulate_controls(self.net, state, &controls).map_err(|e| Error::RetrievalFailed {
                step: 0,
                reason: format!("simulation rejected the controls: {e}"),
            })?;
        for (t, cell) in result.path.iter().enumerate().take(lam.len() - 1) {
            if states[t + 1].active != cell.next_active {
                return Err(Error::RetrievalFailed {
                    step: t,
                    reason: "active set differs from the planned one".into(),
                });
            }
        }
        if !feasible {
            return Err(Error::RetrievalFailed {
                step: lam.len() - 1,
                reason: "terminal state is infeasible".into(),
            });
        }
        let value = self.net.objective(controls.last().unwrap());
        if value < result.value - epsilon {
            return Err(Error::RetrievalFailed {
                step: lam.len() - 1,
                reason: format!(
                    "objective {value} falls short of {} by more than {epsilon}",
                    result.value
                ),
            });
        }
        Ok(())
    }
}

/// Sorts closed intervals and merges overlapping or touching ones.
pub fn merge_spans(mut spans: Vec<Span>) -> Vec<Span> {
    spans.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Span> = Vec::new();
    for s in spans {
        match out.last_mut() {
            Some(last) if s.lo <= last.hi + 1e-12 * (1.0 + last.hi.abs()) => {
                last.hi = last.hi.max(s.hi)
            }
            _ => out.push(s),
        }
    }
    out
}
