//! Incremental insertion of a hyperplane into a face lattice.

use crate::error::{Error, Result};

use super::lattice::{FaceId, IncidenceGraph, LatticeBuilder};
use super::Hyperplane;

/// How an inserted hyperplane met the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutOutcome {
    /// At least one face was split into two sides.
    Split,
    /// No face was split but some faces lie in the hyperplane; those faces were tagged.
    Supporting,
    /// The hyperplane misses the lattice.
    Disjoint,
}

/// Result of an insertion: the new lattice and the side (`−1`, `0`, `+1`) of each of its faces.
#[derive(Debug, Clone)]
pub struct Insertion {
    pub graph: IncidenceGraph,
    pub side: Vec<i8>,
    pub outcome: CutOutcome,
    /// Registry id of the inserted hyperplane in `graph`.
    pub hyperplane: usize,
}

fn face_side(signs: impl Iterator<Item = i8>) -> (bool, bool) {
    let (mut pos, mut neg) = (false, false);
    for s in signs {
        pos |= s > 0;
        neg |= s < 0;
    }
    (pos, neg)
}

/// Inserts `h`, splitting every face that has vertices strictly on both sides.
///
/// Faces are processed by increasing dimension. A split face `F` becomes `F+`, `F−` and the new
/// face `F0 = F ∩ h`; faces that are not split keep their subfaces. Faces lying in `h` are tagged
/// with the hyperplane instead of being perturbed.
pub fn insert_hyperplane(g: &IncidenceGraph, h: &Hyperplane) -> Insertion {
    let n = g.len();
    let vsign: Vec<i8> = (0..n)
        .map(|f| {
            if g.face(f).dim == 0 {
                h.side(g.coords(f))
            } else {
                0
            }
        })
        .collect();
    let class: Vec<(bool, bool)> = (0..n)
        .map(|f| face_side(g.face(f).vertices.iter().map(|&v| vsign[v])))
        .collect();

    let mut b = LatticeBuilder::with_hyperplanes(g.ambient(), g.hyperplanes().to_vec());
    let hid = b.add_hyperplane(h.clone());
    // image of an unsplit face, or (plus, minus, zero) pieces of a split face
    let mut same = vec![usize::MAX; n];
    let mut pieces = vec![(usize::MAX, usize::MAX, usize::MAX); n];
    let mut side_of: Vec<i8> = Vec::with_capacity(2 * n);
    let push_side = |side_of: &mut Vec<i8>, id: FaceId, s: i8| {
        if side_of.len() <= id {
            side_of.resize(id + 1, 0);
        }
        side_of[id] = s;
    };
    let mut order: Vec<FaceId> = (0..n).collect();
    order.sort_by_key(|&f| (g.face(f).dim, f));
    let mut any_split = false;
    let mut any_zero = false;
    for f in order {
        let face = g.face(f);
        let (pos, neg) = class[f];
        if !(pos && neg) {
            let id = if face.dim == 0 {
                b.vertex(face.centroid.clone())
            } else {
                b.face(face.dim, face.subfaces.iter().map(|&s| same[s]).collect())
            };
            for &t in &face.hyperplanes {
                b.tag(id, t);
            }
            let s = if pos {
                1
            } else if neg {
                -1
            } else {
                0
            };
            if s == 0 {
                b.tag(id, hid);
                any_zero = true;
            }
            push_side(&mut side_of, id, s);
            same[f] = id;
            continue;
        }
        any_split = true;
        let zero = if face.dim == 1 {
            let (a, c) = (face.vertices[0], face.vertices[1]);
            let (ea, ec) = (h.eval(g.coords(a)), h.eval(g.coords(c)));
            let t = ea / (ea - ec);
            let x: Vec<f64> = g
                .coords(a)
                .iter()
                .zip(g.coords(c))
                .map(|(p, q)| p + t * (q - p))
                .collect();
            b.vertex(x)
        } else {
            let mut sub = Vec::new();
            for &s in &face.subfaces {
                let (sp, sn) = class[s];
                if sp && sn {
                    sub.push(pieces[s].2);
                } else {
                    for &t in &g.face(s).subfaces {
                        if !class[t].0 && !class[t].1 {
                            sub.push(same[t]);
                        }
                    }
                }
            }
            b.face(face.dim - 1, sub)
        };
        let mut plus = vec![zero];
        let mut minus = vec![zero];
        if face.dim == 1 {
            for &v in &face.vertices {
                if vsign[v] > 0 {
                    plus.push(same[v]);
                } else {
                    minus.push(same[v]);
                }
            }
        } else {
            for &s in &face.subfaces {
                let (sp, sn) = class[s];
                if sp && sn {
                    plus.push(pieces[s].0);
                    minus.push(pieces[s].1);
                } else if sp {
                    plus.push(same[s]);
                } else if sn {
                    minus.push(same[s]);
                }
            }
        }
        let p = b.face(face.dim, plus);
        let m = b.face(face.dim, minus);
        for &t in &face.hyperplanes {
            b.tag(p, t);
            b.tag(m, t);
            b.tag(zero, t);
        }
        b.tag(zero, hid);
        push_side(&mut side_of, zero, 0);
        push_side(&mut side_of, p, 1);
        push_side(&mut side_of, m, -1);
        pieces[f] = (p, m, zero);
    }
    let graph = b.finish();
    side_of.resize(graph.len(), 0);
    let outcome = if any_split {
        CutOutcome::Split
    } else if any_zero {
        CutOutcome::Supporting
    } else {
        CutOutcome::Disjoint
    };
    Insertion {
        graph,
        side: side_of,
        outcome,
        hyperplane: hid,
    }
}

/// Like [`insert_hyperplane`] but reports a hyperplane that only supports existing faces.
pub fn insert_hyperplane_strict(g: &IncidenceGraph, h: &Hyperplane) -> Result<Insertion> {
    let ins = insert_hyperplane(g, h);
    if ins.outcome == CutOutcome::Supporting {
        return Err(Error::DegenerateCut);
    }
    Ok(ins)
}

/// Intersection of the lattice with `h`; `None` when they are disjoint.
pub fn slice(g: &IncidenceGraph, h: &Hyperplane) -> Option<IncidenceGraph> {
    let ins = insert_hyperplane(g, h);
    let keep: Vec<FaceId> = (0..ins.graph.len()).filter(|&f| ins.side[f] == 0).collect();
    (!keep.is_empty()).then(|| ins.graph.restrict(&keep))
}

/// Part of the lattice in the closed halfspace `side · (normal·x − offset) ≥ 0`; `None` when empty.
pub fn clip(g: &IncidenceGraph, h: &Hyperplane, side: i8) -> Option<IncidenceGraph> {
    let ins = insert_hyperplane(g, h);
    let keep: Vec<FaceId> = (0..ins.graph.len())
        .filter(|&f| ins.side[f] == 0 || ins.side[f] == side)
        .collect();
    if keep.is_empty() {
        return None;
    }
    // only faces below a maximal kept face of largest dimension survive as a polytope
    let top_dim = keep.iter().map(|&f| ins.graph.face(f).dim).max().unwrap();
    let tops: Vec<FaceId> = keep
        .iter()
        .copied()
        .filter(|&f| ins.graph.face(f).dim == top_dim)
        .collect();
    let mut closure: Vec<FaceId> = tops
        .iter()
        .flat_map(|&t| ins.graph.down_closure(t))
        .collect();
    closure.sort_unstable();
    closure.dedup();
    Some(ins.graph.restrict(&closure))
}
