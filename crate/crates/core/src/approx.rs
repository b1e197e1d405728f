//! Approximate control by restricting controls to a subspace spanned by chosen directions.

use crate::agg::line::{LineMode, LineProblem, Span};
use crate::agg::{restrict, retrieve_control, value_iteration, ControlMode, SearchOptions};
use crate::cascade::NetworkState;
use crate::error::{Error, Result};
use crate::net::{Network, NodeRole};

/// Orthonormal basis of the controlled coordinates and the indices of the basis vectors that
/// span the allowed control subspace. Every other basis vector `Φ_i` imposes `Φ_iᵀu = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSpec {
    pub basis: Vec<Vec<f64>>,
    pub active: Vec<usize>,
}

impl ProjectionSpec {
    /// Completes `directions` (which must be linearly independent) to an orthonormal basis and
    /// keeps their span as the control subspace.
    pub fn spanning(directions: &[Vec<f64>], dim: usize) -> Result<Self> {
        let mut seed: Vec<Vec<f64>> = directions.to_vec();
        seed.extend((0..dim).map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            e
        }));
        let basis = gram_schmidt(&seed, dim);
        let independent = gram_schmidt(directions, dim).len() == directions.len();
        if !independent
            || basis.len() != dim
            || !directions
                .iter()
                .enumerate()
                .all(|(i, d)| span_contains(&basis[..=i], d))
        {
            return Err(Error::Infeasible(
                "projection directions are linearly dependent".into(),
            ));
        }
        Ok(ProjectionSpec {
            basis,
            active: (0..directions.len()).collect(),
        })
    }

    /// Every coordinate allowed; the search is exact.
    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|k| {
                let mut e = vec![0.0; dim];
                e[k] = 1.0;
                e
            })
            .collect();
        ProjectionSpec {
            basis,
            active: (0..dim).collect(),
        }
    }

    /// Normals of the hyperplanes through the origin that cut out the subspace.
    pub fn constraints(&self) -> Vec<Vec<f64>> {
        (0..self.basis.len())
            .filter(|i| !self.active.contains(i))
            .map(|i| self.basis[i].clone())
            .collect()
    }

    /// Largest deviation of `ΦᵀΦ` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

fn gram_schmidt(seed: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in seed {
        if out.len() == dim {
            break;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let dot: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= dot * y;
                }
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 * scale.max(1.0) {
            out.push(w.iter().map(|x| x / norm).collect());
        }
    }
    out
}

fn span_contains(basis: &[Vec<f64>], v: &[f64]) -> bool {
    let mut r = v.to_vec();
    for q in basis {
        let dot: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
        for (x, y) in r.iter_mut().zip(q) {
            *x -= dot * y;
        }
    }
    let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    r.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-9 * scale
}

/// One-parameter family of single-direction specs for a network with one supply and two demand
/// nodes. The direction is `η·q¹ + (1−η)·q²`, where `q^k` moves one unit from the supply to the
/// `k`-th demand node (demand nodes ordered by index). `η = 0.5` is proportional shedding when
/// the two demands are equal.
pub fn eta_family(net: &Network, eta: f64) -> Result<ProjectionSpec> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Infeasible(format!(
            "eta = {eta} lies outside [0, 1]"
        )));
    }
    let ctrl = net.controlled_nodes();
    let supplies: Vec<usize> = (0..ctrl.len())
        .filter(|&j| net.role(ctrl[j]) == NodeRole::Supply)
        .collect();
    let demands: Vec<usize> = (0..ctrl.len())
        .filter(|&j| net.role(ctrl[j]) == NodeRole::Demand)
        .collect();
    if supplies.len() != 1 || demands.len() != 2 {
        return Err(Error::InvalidNetwork(
            "the eta family needs one supply and two demand nodes".into(),
        ));
    }
    let mut d = vec![0.0; ctrl.len()];
    d[supplies[0]] = 1.0;
    d[demands[0]] = -eta;
    d[demands[1]] = -(1.0 - eta);
    ProjectionSpec::spanning(&[d], ctrl.len())
}

/// Which implementation evaluates a projected search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Interval search along the single allowed direction.
    Line,
    /// Lattice search with the subspace constraints inserted as hyperplanes.
    Lattice,
}

impl Route {
    /// `Line` for single-direction specs, `Lattice` otherwise.
    pub fn for_spec(spec: &ProjectionSpec) -> Route {
        if spec.active.len() == 1 {
            Route::Line
        } else {
            Route::Lattice
        }
    }
}

/// Value and retrieved controls of a projected search.
#[derive(Debug, Clone)]
pub struct Projected {
    pub value: f64,
    /// One node vector per stage.
    pub controls: Vec<Vec<f64>>,
}

fn check_spec(net: &Network, spec: &ProjectionSpec) -> Result<()> {
    let m = net.controlled_nodes().len();
    if spec.active.is_empty() {
        return Err(Error::Infeasible(
            "projection needs at least one allowed direction".into(),
        ));
    }
    if spec.basis.len() != m || spec.basis.iter().any(|b| b.len() != m) {
        return Err(Error::InvalidNetwork(
            "projection basis must span the controlled coordinates".into(),
        ));
    }
    if spec.orthonormality_error() > 1e-10 {
        return Err(Error::InvalidNetwork(
            "projection basis is not orthonormal".into(),
        ));
    }
    Ok(())
}

/// Optimal value over monotone control sequences confined to the subspace of `spec`.
pub fn projected_value(
    net: &Network,
    state: &NetworkState,
    n: usize,
    spec: &ProjectionSpec,
    route: Route,
) -> Result<f64> {
    projected_search_with(net, state, n, spec, route, None).map(|r| r.value)
}

/// Projected search with automatic route selection; controls are retrieved within `epsilon`.
pub fn projected_search(
    net: &Network,
    state: &NetworkState,
    n: usize,
    spec: &ProjectionSpec,
    epsilon: f64,
) -> Result<Projected> {
    projected_search_with(net, state, n, spec, Route::for_spec(spec), Some(epsilon))
}

/// Projected search along an explicit route. Controls are retrieved only when `epsilon` is given.
pub fn projected_search_with(
    net: &Network,
    state: &NetworkState,
    n: usize,
    spec: &ProjectionSpec,
    route: Route,
    epsilon: Option<f64>,
) -> Result<Projected> {
    check_spec(net, spec)?;
    match route {
        Route::Line => {
            if spec.active.len() != 1 {
                return Err(Error::Infeasible(
                    "the line route needs exactly one allowed direction".into(),
                ));
            }
            let dir = spec.basis[spec.active[0]].clone();
            let line = LineProblem::new(net, dir, LineMode::Monotone);
            let reach = line.reach(&restrict(net, &state.p));
            // orient the direction into the orthant of the initial injections
            let (mut line, reach) = if reach == 0.0 {
                let flipped: Vec<f64> = line.direction().iter().map(|x| -x).collect();
                let other = LineProblem::new(net, flipped, LineMode::Monotone);
                let r = other.reach(&restrict(net, &state.p));
                if r > 0.0 {
                    (other, r)
                } else {
                    (line, 0.0)
                }
            } else {
                (line, reach)
            };
            let result = line.solve(&state.active, Span::point(reach), n)?;
            let controls = match epsilon {
                Some(eps) => {
                    let lam = line.retrieve(&result, eps)?;
                    line.verify(state, &result, &lam, eps)?;
                    line.controls(&lam)
                }
                None => Vec::new(),
            };
            Ok(Projected {
                value: result.value,
                controls,
            })
        }
        Route::Lattice => {
            let opts = SearchOptions {
                mode: ControlMode::Monotone,
                subspace: spec.constraints(),
                ..Default::default()
            };
            let result = value_iteration(net, state, n, &opts)?;
            let controls = match epsilon {
                Some(eps) => retrieve_control(net, state, &result, eps)?,
                None => Vec::new(),
            };
            Ok(Projected {
                value: result.value,
                controls,
            })
        }
    }
}
