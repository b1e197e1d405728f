//! Face lattices (incidence graphs) of polytopes and hyperplane arrangements restricted to a
//! polytope, with hyperplane insertion, directional sweeps and the monotone shedding hull.

mod affine;
mod insert;
mod lattice;
mod lp;
mod sweep;

pub use affine::{affine_directions, orthonormal_basis, reject, Carrier};
pub use insert::{clip, insert_hyperplane, insert_hyperplane_strict, slice, CutOutcome, Insertion};
pub use lattice::{Face, FaceId, IncidenceGraph, LatticeBuilder};
pub use lp::lp_over_vertices;
pub use sweep::{canonicalize, cube_in_orthant, cube_of_polytope, project_dir, sweep_dir};

/// Point-on-hyperplane tolerance (signed distance to a unit-normal hyperplane).
pub const EPS_GEO: f64 = 1e-7;

/// Rank tolerance for affine dimension decisions.
pub const EPS_RANK: f64 = 1e-10;

/// Hyperplane `{x : normal·x = offset}` with unit normal whose first significant entry is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
}

impl Hyperplane {
    /// Returns `None` when the normal vanishes.
    pub fn new(normal: Vec<f64>, offset: f64) -> Option<Self> {
        let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-14) {
            return None;
        }
        let lead = normal
            .iter()
            .find(|x| x.abs() > 1e-12 * norm)
            .copied()
            .unwrap_or(1.0);
        let s = if lead < 0.0 { -1.0 / norm } else { 1.0 / norm };
        Some(Hyperplane {
            normal: normal.iter().map(|x| x * s).collect(),
            offset: offset * s,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Signed distance `normal·x − offset`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }

    /// Sign of `eval` with the geometric tolerance.
    pub fn side(&self, x: &[f64]) -> i8 {
        let v = self.eval(x);
        if v > EPS_GEO {
            1
        } else if v < -EPS_GEO {
            -1
        } else {
            0
        }
    }

    /// `+1` when the stored normal points along `normal`, `−1` when it was flipped.
    pub fn orientation(&self, normal: &[f64]) -> i8 {
        let dot: f64 = self.normal.iter().zip(normal).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            -1
        } else {
            1
        }
    }

    /// Axis-aligned hyperplane `x_k = value`.
    pub fn axis(dim: usize, k: usize, value: f64) -> Self {
        let mut n = vec![0.0; dim];
        n[k] = 1.0;
        Hyperplane {
            normal: n,
            offset: value,
        }
    }
}

/// Incidence graph of a single point.
pub fn polytope_of_point(x: &[f64]) -> IncidenceGraph {
    let mut b = LatticeBuilder::new(x.len());
    b.vertex(x.to_vec());
    b.finish()
}

/// Box `Π(p0)` with one face per sign vector in `{−1, 0, 1}^d`: entry `−1` pins the coordinate to
/// zero, `+1` pins it to `p0`, and `0` leaves it free.
pub fn hypercube_of(p0: &[f64]) -> IncidenceGraph {
    let d = p0.len();
    assert!(
        p0.iter().all(|&x| x != 0.0),
        "hypercube_of needs nonzero coordinates"
    );
    let total = 3usize.pow(d as u32);
    let decode = |mut code: usize| -> Vec<i8> {
        (0..d)
            .map(|_| {
                let s = (code % 3) as i8 - 1;
                code /= 3;
                s
            })
            .collect()
    };
    let encode = |alpha: &[i8]| -> usize {
        alpha
            .iter()
            .rev()
            .fold(0usize, |acc, &s| acc * 3 + (s + 1) as usize)
    };
    let mut b = LatticeBuilder::new(d);
    let mut ids = vec![usize::MAX; total];
    // faces in order of increasing dimension so subfaces exist before their superfaces
    let mut codes: Vec<usize> = (0..total).collect();
    codes.sort_by_key(|&c| decode(c).iter().filter(|&&s| s == 0).count());
    for code in codes {
        let alpha = decode(code);
        let free: Vec<usize> = (0..d).filter(|&i| alpha[i] == 0).collect();
        if free.is_empty() {
            let x = alpha
                .iter()
                .zip(p0)
                .map(|(&s, &p)| if s > 0 { p } else { 0.0 })
                .collect();
            ids[code] = b.vertex(x);
        } else {
            let mut subs = Vec::with_capacity(2 * free.len());
            for &i in &free {
                for s in [-1i8, 1] {
                    let mut beta = alpha.clone();
                    beta[i] = s;
                    subs.push(ids[encode(&beta)]);
                }
            }
            ids[code] = b.face(free.len(), subs);
        }
    }
    b.finish()
}
