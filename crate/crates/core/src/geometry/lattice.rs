use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DVector;

use super::affine::{affine_directions, Carrier};
use super::{Hyperplane, EPS_RANK};

pub type FaceId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub dim: usize,
    pub subfaces: Vec<FaceId>,
    pub superfaces: Vec<FaceId>,
    /// Sorted ids of the 0-faces weakly below this face.
    pub vertices: Vec<FaceId>,
    /// Ids (into the graph's registry) of inserted hyperplanes containing this face.
    pub hyperplanes: Vec<usize>,
    /// Mean of the vertex coordinates; the coordinates themselves for a 0-face.
    pub centroid: Vec<f64>,
}

/// Layered face lattice. A polytope has a single top face; an arrangement restricted to a
/// polytope has one top face per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceGraph {
    ambient: usize,
    faces: Vec<Face>,
    hyperplanes: Vec<Hyperplane>,
}

#[derive(Debug, Clone)]
struct ProtoFace {
    dim: usize,
    sub: Vec<FaceId>,
    coords: Option<Vec<f64>>,
    hyperplanes: Vec<usize>,
}

/// Incremental constructor; faces must be added after their subfaces.
#[derive(Debug, Clone)]
pub struct LatticeBuilder {
    ambient: usize,
    faces: Vec<ProtoFace>,
    hyperplanes: Vec<Hyperplane>,
}

impl LatticeBuilder {
    pub fn new(ambient: usize) -> Self {
        LatticeBuilder {
            ambient,
            faces: Vec::new(),
            hyperplanes: Vec::new(),
        }
    }

    pub fn with_hyperplanes(ambient: usize, hyperplanes: Vec<Hyperplane>) -> Self {
        LatticeBuilder {
            ambient,
            faces: Vec::new(),
            hyperplanes,
        }
    }

    pub fn vertex(&mut self, coords: Vec<f64>) -> FaceId {
        debug_assert_eq!(coords.len(), self.ambient);
        self.faces.push(ProtoFace {
            dim: 0,
            sub: Vec::new(),
            coords: Some(coords),
            hyperplanes: Vec::new(),
        });
        self.faces.len() - 1
    }

    pub fn face(&mut self, dim: usize, mut sub: Vec<FaceId>) -> FaceId {
        sub.sort_unstable();
        sub.dedup();
        debug_assert!(
            sub.iter().all(|&s| self.faces[s].dim + 1 == dim),
            "subfaces must be one dimension lower"
        );
        self.faces.push(ProtoFace {
            dim,
            sub,
            coords: None,
            hyperplanes: Vec::new(),
        });
        self.faces.len() - 1
    }

    pub fn tag(&mut self, face: FaceId, hyperplane: usize) {
        let hs = &mut self.faces[face].hyperplanes;
        if !hs.contains(&hyperplane) {
            hs.push(hyperplane);
            hs.sort_unstable();
        }
    }

    pub fn add_hyperplane(&mut self, h: Hyperplane) -> usize {
        self.hyperplanes.push(h);
        self.hyperplanes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn finish(self) -> IncidenceGraph {
        let n = self.faces.len();
        let mut vertices: Vec<Vec<FaceId>> = vec![Vec::new(); n];
        let mut order: Vec<FaceId> = (0..n).collect();
        order.sort_by_key(|&f| self.faces[f].dim);
        for &f in &order {
            if self.faces[f].dim == 0 {
                vertices[f] = vec![f];
            } else {
                let mut vs: Vec<FaceId> = self.faces[f]
                    .sub
                    .iter()
                    .flat_map(|&s| vertices[s].iter().copied())
                    .collect();
                vs.sort_unstable();
                vs.dedup();
                vertices[f] = vs;
            }
        }
        let mut superfaces: Vec<Vec<FaceId>> = vec![Vec::new(); n];
        for (f, pf) in self.faces.iter().enumerate() {
            for &s in &pf.sub {
                superfaces[s].push(f);
            }
        }
        let ambient = self.ambient;
        let coords: Vec<Option<Vec<f64>>> = self.faces.iter().map(|pf| pf.coords.clone()).collect();
        let faces = self
            .faces
            .into_iter()
            .enumerate()
            .map(|(f, pf)| {
                let mut centroid = vec![0.0; ambient];
                for &v in &vertices[f] {
                    for (c, x) in centroid.iter_mut().zip(coords[v].as_ref().unwrap()) {
                        *c += x;
                    }
                }
                let k = vertices[f].len().max(1) as f64;
                centroid.iter_mut().for_each(|c| *c /= k);
                let mut sup = std::mem::take(&mut superfaces[f]);
                sup.sort_unstable();
                Face {
                    dim: pf.dim,
                    subfaces: pf.sub,
                    superfaces: sup,
                    vertices: std::mem::take(&mut vertices[f]),
                    hyperplanes: pf.hyperplanes,
                    centroid,
                }
            })
            .collect();
        IncidenceGraph {
            ambient,
            faces,
            hyperplanes: self.hyperplanes,
        }
    }
}

impl IncidenceGraph {
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id]
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    /// Largest face dimension.
    pub fn dim(&self) -> usize {
        self.faces.iter().map(|f| f.dim).max().unwrap_or(0)
    }

    pub fn layer(&self, k: usize) -> Vec<FaceId> {
        (0..self.faces.len())
            .filter(|&f| self.faces[f].dim == k)
            .collect()
    }

    /// Face counts per dimension, from vertices upward.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut out = vec![0; self.dim() + 1];
        for f in &self.faces {
            out[f.dim] += 1;
        }
        out
    }

    pub fn coords(&self, vertex: FaceId) -> &[f64] {
        &self.faces[vertex].centroid
    }

    pub fn vertex_coords(&self) -> Vec<&[f64]> {
        self.layer(0).into_iter().map(|v| self.coords(v)).collect()
    }

    /// Faces without superfaces.
    pub fn tops(&self) -> Vec<FaceId> {
        (0..self.faces.len())
            .filter(|&f| self.faces[f].superfaces.is_empty())
            .collect()
    }

    /// Faces of maximal dimension.
    pub fn cells(&self) -> Vec<FaceId> {
        self.layer(self.dim())
    }

    pub fn is_polytope(&self) -> bool {
        self.tops().len() == 1
    }

    pub fn top(&self) -> FaceId {
        let tops = self.tops();
        assert_eq!(tops.len(), 1, "lattice has {} top faces", tops.len());
        tops[0]
    }

    /// Face ids weakly below `f`, in increasing id order.
    pub fn down_closure(&self, f: FaceId) -> Vec<FaceId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if seen.insert(g) {
                stack.extend(self.faces[g].subfaces.iter().copied());
            }
        }
        seen.into_iter().collect()
    }

    /// The polytope lattice of face `f` (its down-closure, reindexed).
    pub fn below(&self, f: FaceId) -> IncidenceGraph {
        self.restrict(&self.down_closure(f))
    }

    /// Sub-lattice on a down-closed set of faces.
    pub fn restrict(&self, keep: &[FaceId]) -> IncidenceGraph {
        let mut order = keep.to_vec();
        order.sort_by_key(|&f| (self.faces[f].dim, f));
        let mut map = vec![usize::MAX; self.faces.len()];
        let mut b = LatticeBuilder::with_hyperplanes(self.ambient, self.hyperplanes.clone());
        for &f in &order {
            let face = &self.faces[f];
            let id = if face.dim == 0 {
                b.vertex(face.centroid.clone())
            } else {
                b.face(face.dim, face.subfaces.iter().map(|&s| map[s]).collect())
            };
            for &h in &face.hyperplanes {
                b.tag(id, h);
            }
            map[f] = id;
        }
        b.finish()
    }

    /// Same lattice with vertex coordinates transformed by `f`.
    pub fn map_coords<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> IncidenceGraph {
        let mut b = LatticeBuilder::new(self.ambient);
        let mut map = vec![usize::MAX; self.faces.len()];
        let mut order: Vec<FaceId> = (0..self.faces.len()).collect();
        order.sort_by_key(|&g| (self.faces[g].dim, g));
        for g in order {
            let face = &self.faces[g];
            map[g] = if face.dim == 0 {
                b.vertex(f(&face.centroid))
            } else {
                b.face(face.dim, face.subfaces.iter().map(|&s| map[s]).collect())
            };
        }
        b.finish()
    }

    /// Reflection `x ↦ signs ⊙ x`.
    pub fn reflect(&self, signs: &[f64]) -> IncidenceGraph {
        self.map_coords(|x| x.iter().zip(signs).map(|(a, s)| a * s).collect())
    }

    /// Affine hull of the vertices of face `f`.
    pub fn carrier_of(&self, f: FaceId) -> Carrier {
        let pts: Vec<&[f64]> = self.faces[f]
            .vertices
            .iter()
            .map(|&v| self.coords(v))
            .collect();
        let basis = affine_directions(&pts, EPS_RANK * (1.0 + self.scale()));
        Carrier {
            offset: DVector::from_column_slice(pts[0]),
            basis,
        }
    }

    /// Affine hull of all vertices.
    pub fn carrier(&self) -> Carrier {
        let pts = self.vertex_coords();
        let basis = affine_directions(&pts, EPS_RANK * (1.0 + self.scale()));
        Carrier {
            offset: DVector::from_column_slice(pts[0]),
            basis,
        }
    }

    /// Largest absolute vertex coordinate.
    pub fn scale(&self) -> f64 {
        self.faces
            .iter()
            .filter(|f| f.dim == 0)
            .flat_map(|f| f.centroid.iter())
            .fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let pts = self.vertex_coords();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let s: f64 = pts[i]
                    .iter()
                    .zip(pts[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d = d.max(s.sqrt());
            }
        }
        d
    }

    /// Order-independent identity of the vertex set up to `resolution`.
    pub fn fingerprint(&self, resolution: f64) -> Vec<i64> {
        let mut pts: Vec<Vec<i64>> = self
            .vertex_coords()
            .into_iter()
            .map(|x| x.iter().map(|&c| (c / resolution).round() as i64).collect())
            .collect();
        pts.sort();
        pts.dedup();
        pts.into_iter().flatten().collect()
    }

    /// Alternating sum of face counts.
    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    /// Every incident (k−2)/k pair has exactly two intermediate faces.
    pub fn has_diamond_property(&self) -> bool {
        for (f, face) in self.faces.iter().enumerate() {
            if face.dim < 2 {
                continue;
            }
            let mut counts = std::collections::HashMap::new();
            for &s in &face.subfaces {
                for &t in &self.faces[s].subfaces {
                    *counts.entry(t).or_insert(0usize) += 1;
                }
            }
            if counts.values().any(|&c| c != 2) {
                return false;
            }
            let _ = f;
        }
        true
    }

    /// Plain-text listing: one line per face, grouped by dimension.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for k in 0..=self.dim() {
            let _ = writeln!(out, "layer {k}");
            for f in self.layer(k) {
                let face = &self.faces[f];
                if k == 0 {
                    let xs: Vec<String> = face.centroid.iter().map(|x| format!("{x:.6}")).collect();
                    let _ = writeln!(out, "  {f} dim=0 at ({})", xs.join(", "));
                } else {
                    let subs: Vec<String> = face.subfaces.iter().map(|s| s.to_string()).collect();
                    let _ = writeln!(out, "  {f} dim={k} sub=[{}]", subs.join(", "));
                }
            }
        }
        out
    }
}
