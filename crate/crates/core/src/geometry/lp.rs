//! Linear objectives over polytopes by vertex enumeration.

use crate::error::{Error, Result};

use super::lattice::IncidenceGraph;

/// Maximum of `objective · x` over the vertices of `g`, with the maximizing vertex.
///
/// Values within a relative `1e-12` of each other count as ties; ties go to the
/// lexicographically smallest vertex.
pub fn lp_over_vertices(g: &IncidenceGraph, objective: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut best: Option<(f64, &[f64])> = None;
    for x in g.vertex_coords() {
        let v: f64 = objective.iter().zip(x).map(|(a, b)| a * b).sum();
        best = match best {
            None => Some((v, x)),
            Some((bv, bx)) => {
                let tol = 1e-12 * (1.0 + bv.abs().max(v.abs()));
                if v > bv + tol {
                    Some((v, x))
                } else if v >= bv - tol && lex_less(x, bx) {
                    Some((bv.max(v), x))
                } else {
                    Some((bv, bx))
                }
            }
        };
    }
    best.map(|(v, x)| (v, x.to_vec()))
        .ok_or(Error::EmptyPolytope)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}
