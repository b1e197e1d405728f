//! Affine hulls and orthonormal bases.

use nalgebra::DVector;

/// Orthonormal basis of `span(vectors)` by modified Gram–Schmidt; vectors whose residual norm
/// falls below `tol` are treated as dependent.
pub fn orthonormal_basis(vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = r.dot(b);
                r -= c * b;
            }
        }
        let n = r.norm();
        if n > tol {
            basis.push(r / n);
        }
    }
    basis
}

/// Orthonormal basis of the direction space of the affine hull of `points`.
pub fn affine_directions(points: &[&[f64]], tol: f64) -> Vec<DVector<f64>> {
    if points.len() < 2 {
        return Vec::new();
    }
    let origin = DVector::from_column_slice(points[0]);
    let diffs: Vec<DVector<f64>> = points[1..]
        .iter()
        .map(|p| DVector::from_column_slice(p) - &origin)
        .collect();
    // order by length so the basis is built from the best-conditioned differences first
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| diffs[b].norm().total_cmp(&diffs[a].norm()));
    let sorted: Vec<DVector<f64>> = order.into_iter().map(|i| diffs[i].clone()).collect();
    orthonormal_basis(&sorted, tol)
}

/// Component of `v` orthogonal to the span of the orthonormal `basis`.
pub fn reject(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    for b in basis {
        let c = r.dot(b);
        r -= c * b;
    }
    r
}

/// Affine subspace `offset + span(basis)` with an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Carrier {
    pub offset: DVector<f64>,
    pub basis: Vec<DVector<f64>>,
}

impl Carrier {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `x` in the carrier basis (after removing the offset).
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        let d = DVector::from_column_slice(x) - &self.offset;
        self.basis.iter().map(|b| b.dot(&d)).collect()
    }

    /// Ambient point for carrier coordinates.
    pub fn point(&self, coords: &[f64]) -> Vec<f64> {
        let mut x = self.offset.clone();
        for (b, &c) in self.basis.iter().zip(coords) {
            x += c * b;
        }
        x.as_slice().to_vec()
    }

    /// Distance from `x` to the carrier.
    pub fn distance(&self, x: &[f64]) -> f64 {
        reject(&(DVector::from_column_slice(x) - &self.offset), &self.basis).norm()
    }
}
