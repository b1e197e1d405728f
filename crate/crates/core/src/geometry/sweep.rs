//! Axis projection, axis sweep and the monotone shedding hull `Π(P)`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DVector;

use crate::error::{Error, Result};

use super::affine::{affine_directions, reject};
use super::lattice::{FaceId, IncidenceGraph, LatticeBuilder};
use super::{Hyperplane, EPS_GEO, EPS_RANK};

/// Threshold on the `e_k` component of a unit facet normal for calling the facet a top facet.
const TOP_EPS: f64 = 1e-9;

fn check_nonnegative(g: &IncidenceGraph, k: usize) -> Result<()> {
    for x in g.vertex_coords() {
        if x[k] < -EPS_GEO {
            return Err(Error::NegativeCoordinate {
                axis: k,
                value: x[k],
            });
        }
    }
    Ok(())
}

/// Faces all of whose vertices lie in `x_k = 0`.
fn zero_faces(g: &IncidenceGraph, k: usize) -> Vec<bool> {
    g.faces()
        .iter()
        .map(|f| f.vertices.iter().all(|&v| g.coords(v)[k].abs() <= EPS_GEO))
        .collect()
}

fn rank_tol(g: &IncidenceGraph) -> f64 {
    EPS_RANK * (1.0 + g.scale())
}

fn affine_dim(g: &IncidenceGraph, f: FaceId) -> usize {
    let pts: Vec<&[f64]> = g.face(f).vertices.iter().map(|&v| g.coords(v)).collect();
    affine_directions(&pts, 1e3 * rank_tol(g)).len()
}

/// True when `e_k` lies in the direction space of the affine hull of `g`.
fn contains_axis(g: &IncidenceGraph, k: usize) -> bool {
    let carrier = g.carrier();
    let mut e = DVector::zeros(g.ambient());
    e[k] = 1.0;
    reject(&e, &carrier.basis).norm() < 1e-9
}

/// Adds `proj_k` and `swp_k` images of the faces in `set` (down-closed, sorted by dimension).
/// `orig` maps faces of `g` already present in the builder; faces inside `x_k = 0` are their own
/// projection and sweep, which identifies the two copies of every point on the hyperplane.
struct Prism {
    proj: Vec<FaceId>,
    swp: Vec<Option<FaceId>>,
}

fn add_prism(
    g: &IncidenceGraph,
    k: usize,
    zero: &[bool],
    set: &[FaceId],
    orig: &[FaceId],
    b: &mut LatticeBuilder,
) -> Prism {
    let mut proj = vec![usize::MAX; g.len()];
    let mut swp = vec![None; g.len()];
    let mut order = set.to_vec();
    order.sort_by_key(|&f| (g.face(f).dim, f));
    for f in order {
        let face = g.face(f);
        if zero[f] {
            proj[f] = orig[f];
            continue;
        }
        proj[f] = if face.dim == 0 {
            let mut x = face.centroid.clone();
            x[k] = 0.0;
            b.vertex(x)
        } else {
            b.face(face.dim, face.subfaces.iter().map(|&s| proj[s]).collect())
        };
        let mut sub = vec![orig[f], proj[f]];
        sub.extend(face.subfaces.iter().filter_map(|&s| swp[s]));
        swp[f] = Some(b.face(face.dim + 1, sub));
    }
    Prism { proj, swp }
}

fn copy_faces(g: &IncidenceGraph, set: &[FaceId], b: &mut LatticeBuilder) -> Vec<FaceId> {
    let mut orig = vec![usize::MAX; g.len()];
    let mut order = set.to_vec();
    order.sort_by_key(|&f| (g.face(f).dim, f));
    for f in order {
        let face = g.face(f);
        orig[f] = if face.dim == 0 {
            b.vertex(face.centroid.clone())
        } else {
            b.face(face.dim, face.subfaces.iter().map(|&s| orig[s]).collect())
        };
    }
    orig
}

/// Unit outward normal of facet `f` inside the affine hull of the polytope, and its offset.
fn facet_normal(g: &IncidenceGraph, f: FaceId, center: &[f64]) -> (DVector<f64>, f64) {
    let pts: Vec<&[f64]> = g.face(f).vertices.iter().map(|&v| g.coords(v)).collect();
    let dirs = affine_directions(&pts, rank_tol(g));
    let c = DVector::from_column_slice(&g.face(f).centroid);
    let out = reject(&(&c - DVector::from_column_slice(center)), &dirs);
    let n = &out / out.norm();
    let offset = n.dot(&c);
    (n, offset)
}

/// `proj_k(P) = {p − p_k e_k : p ∈ P}`.
pub fn project_dir(g: &IncidenceGraph, k: usize) -> Result<IncidenceGraph> {
    let zero = zero_faces(g, k);
    if zero.iter().all(|&z| z) {
        return Ok(g.clone());
    }
    if !contains_axis(g, k) {
        return Ok(g.map_coords(|x| {
            let mut y = x.to_vec();
            y[k] = 0.0;
            y
        }));
    }
    let swept = sweep_dir(g, k)?;
    let h = Hyperplane::axis(g.ambient(), k, 0.0);
    super::insert::slice(&swept, &h).ok_or(Error::EmptyPolytope)
}

/// `swp_k(P) = {p − θ p_k e_k : p ∈ P, θ ∈ [0, 1]}` for a polytope in `x_k ≥ 0`.
///
/// When `e_k` is transverse to the affine hull of `P` the result is a prism over `P` with the
/// faces of `P`, their projections and their sweeps. Otherwise the top facets of `P` are kept,
/// the boundary ridges between top and non-top facets are swept down, and the projection of the
/// boundary ridges closes the result from below.
pub fn sweep_dir(g: &IncidenceGraph, k: usize) -> Result<IncidenceGraph> {
    if !g.is_polytope() {
        return Err(Error::InvalidNetwork(
            "sweep needs a polytope lattice".into(),
        ));
    }
    check_nonnegative(g, k)?;
    let zero = zero_faces(g, k);
    let top = g.top();
    if zero[top] {
        return Ok(g.clone());
    }
    let all: Vec<FaceId> = (0..g.len()).collect();
    if !contains_axis(g, k) {
        let mut b = LatticeBuilder::new(g.ambient());
        let orig = copy_faces(g, &all, &mut b);
        add_prism(g, k, &zero, &all, &orig, &mut b);
        return Ok(b.finish());
    }
    let n = g.face(top).dim;
    if n == 1 {
        let vs = &g.face(top).vertices;
        let hi = *vs
            .iter()
            .max_by(|&&a, &&c| g.coords(a)[k].total_cmp(&g.coords(c)[k]))
            .unwrap();
        let mut b = LatticeBuilder::new(g.ambient());
        let a = b.vertex(g.coords(hi).to_vec());
        let mut low = g.coords(hi).to_vec();
        low[k] = 0.0;
        let c = b.vertex(low);
        b.face(1, vec![a, c]);
        return Ok(b.finish());
    }
    let center = g.face(top).centroid.clone();
    let facets = g.face(top).subfaces.clone();
    let is_top: BTreeSet<FaceId> = facets
        .iter()
        .copied()
        .filter(|&f| facet_normal(g, f, &center).0[k] > TOP_EPS)
        .collect();
    let mut keep: BTreeSet<FaceId> = BTreeSet::new();
    for &f in &is_top {
        keep.extend(g.down_closure(f));
    }
    let boundary: Vec<FaceId> = g
        .layer(n - 2)
        .into_iter()
        .filter(|&r| {
            g.face(r)
                .superfaces
                .iter()
                .filter(|s| is_top.contains(s))
                .count()
                == 1
        })
        .collect();
    let mut ridge_closure: BTreeSet<FaceId> = BTreeSet::new();
    for &r in &boundary {
        ridge_closure.extend(g.down_closure(r));
    }
    let keep: Vec<FaceId> = keep.into_iter().collect();
    let ridge_closure: Vec<FaceId> = ridge_closure.into_iter().collect();

    let mut b = LatticeBuilder::new(g.ambient());
    let orig = copy_faces(g, &keep, &mut b);
    let prism = add_prism(g, k, &zero, &ridge_closure, &orig, &mut b);
    let base = b.face(n - 1, boundary.iter().map(|&r| prism.proj[r]).collect());
    let mut sub: Vec<FaceId> = is_top.iter().map(|&f| orig[f]).collect();
    sub.extend(boundary.iter().filter_map(|&r| prism.swp[r]));
    sub.push(base);
    b.face(n, sub);
    Ok(canonicalize(&b.finish()))
}

/// Repairs a polytope lattice whose facets may be subdivided into coplanar pieces.
///
/// Degenerate faces are dropped and coplanar facets merged. Each remaining face is identified by
/// the set of (merged) facets containing it; of the faces sharing such a set only one of maximal
/// dimension survives, and incidences are rebuilt from strict inclusion of facet sets.
pub fn canonicalize(g: &IncidenceGraph) -> IncidenceGraph {
    if !g.is_polytope() {
        return g.clone();
    }
    let top = g.top();
    let n = g.face(top).dim;
    if n == 0 {
        return g.clone();
    }
    let center = g.face(top).centroid.clone();
    let tol = 1e-7 * (1.0 + g.scale());
    let valid: Vec<bool> = (0..g.len())
        .map(|f| f == top || affine_dim(g, f) == g.face(f).dim)
        .collect();

    // coplanar facets share a class
    let facets: Vec<FaceId> = g
        .face(top)
        .subfaces
        .iter()
        .copied()
        .filter(|&f| valid[f])
        .collect();
    let mut planes: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut class_of: BTreeMap<FaceId, usize> = BTreeMap::new();
    for &f in &facets {
        let (nrm, off) = facet_normal(g, f, &center);
        let found = planes
            .iter()
            .position(|(m, o)| (m - &nrm).amax() < 1e-7 && (o - off).abs() < tol);
        let c = match found {
            Some(c) => c,
            None => {
                planes.push((nrm, off));
                planes.len() - 1
            }
        };
        class_of.insert(f, c);
    }
    let mut fs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.len()];
    for (&f, &c) in &class_of {
        for h in g.down_closure(f) {
            fs[h].insert(c);
        }
    }
    // one representative of maximal dimension per facet set
    let mut groups: BTreeMap<Vec<usize>, FaceId> = BTreeMap::new();
    for f in 0..g.len() {
        if f == top || !valid[f] || fs[f].is_empty() {
            continue;
        }
        let key: Vec<usize> = fs[f].iter().copied().collect();
        let e = groups.entry(key).or_insert(f);
        if g.face(f).dim > g.face(*e).dim {
            *e = f;
        }
    }
    let mut reps: Vec<(Vec<usize>, FaceId)> = groups.into_iter().collect();
    reps.sort_by_key(|(_, f)| (g.face(*f).dim, *f));
    let mut b = LatticeBuilder::new(g.ambient());
    let mut ids: Vec<FaceId> = Vec::with_capacity(reps.len());
    for (i, (key, f)) in reps.iter().enumerate() {
        let d = g.face(*f).dim;
        let id = if d == 0 {
            b.vertex(g.coords(*f).to_vec())
        } else {
            let sub: Vec<FaceId> = (0..i)
                .filter(|&j| {
                    let (kj, fj) = &reps[j];
                    g.face(*fj).dim + 1 == d
                        && kj.len() > key.len()
                        && key.iter().all(|c| kj.contains(c))
                })
                .map(|j| ids[j])
                .collect();
            b.face(d, sub)
        };
        ids.push(id);
    }
    let facet_ids: Vec<FaceId> = (0..reps.len())
        .filter(|&i| g.face(reps[i].1).dim + 1 == n)
        .map(|i| ids[i])
        .collect();
    b.face(n, facet_ids);
    b.finish()
}

/// `Π(P)` for a polytope in the closed positive orthant: sweeps along every axis on which `P`
/// has a nonzero coordinate, from the last axis to the first.
pub fn cube_in_orthant(g: &IncidenceGraph) -> Result<IncidenceGraph> {
    let mut cur = g.clone();
    for k in (0..g.ambient()).rev() {
        if cur.vertex_coords().iter().any(|x| x[k] > EPS_GEO) {
            cur = sweep_dir(&cur, k)?;
        }
    }
    Ok(cur)
}

/// `Π(P) = {x : ∃ p ∈ P, 0 ≤ sign(p)·x ≤ |p|}` for a polytope contained in one closed orthant.
pub fn cube_of_polytope(g: &IncidenceGraph) -> Result<IncidenceGraph> {
    let d = g.ambient();
    let mut signs = vec![1.0; d];
    for x in g.vertex_coords() {
        for k in 0..d {
            if x[k] < -EPS_GEO {
                signs[k] = -1.0;
            }
        }
    }
    for x in g.vertex_coords() {
        for k in 0..d {
            if signs[k] < 0.0 && x[k] > EPS_GEO {
                return Err(Error::NegativeCoordinate {
                    axis: k,
                    value: -x[k],
                });
            }
        }
    }
    let reflected = g.reflect(&signs);
    Ok(cube_in_orthant(&reflected)?.reflect(&signs))
}
