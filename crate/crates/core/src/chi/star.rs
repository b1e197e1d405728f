//! The star operator: `(⋆ g_j)(z) = max { Σ g_j(x_j) : Σ x_j = z, x_j ∈ X_j }` for piecewise χ
//! inputs, and the recovery of a maximizer.

use num_traits::Float;

use crate::error::{Error, Result};

use super::interval::{slack, sum_is_connected, IntervalSet};
use super::piecewise::{envelope, ChiPiece, PiecewiseChi};

/// A star input: a piecewise χ function and the set it is restricted to.
pub type StarInput<T> = (PiecewiseChi<T>, IntervalSet<T>);

/// Output of the star operator together with the work it took.
#[derive(Debug, Clone, PartialEq)]
pub struct StarReport<T> {
    pub output: PiecewiseChi<T>,
    /// Number of interval combinations evaluated in closed form.
    pub subproblems: usize,
    /// Whether the convexification shortcut replaced the enumeration.
    pub shortcut: bool,
}

fn to_f64<T: Float>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn restrict_all<T: Float>(inputs: &[StarInput<T>]) -> Result<Vec<PiecewiseChi<T>>> {
    if inputs.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let restricted: Vec<PiecewiseChi<T>> = inputs.iter().map(|(g, x)| g.restrict(x)).collect();
    if restricted.iter().any(|g| g.is_empty()) {
        return Err(Error::EmptyDomain);
    }
    Ok(restricted)
}

/// Star of single-interval χ inputs: a χ function whose top is the sum of the tops, on the sum
/// of the intervals.
pub fn star_pieces<T: Float>(pieces: &[ChiPiece<T>]) -> ChiPiece<T> {
    let zero = (T::zero(), T::zero());
    let (lo, hi, top) = pieces
        .iter()
        .fold((T::zero(), T::zero(), zero), |(lo, hi, t), p| {
            (lo + p.lo, hi + p.hi, (t.0 + p.top.0, t.1 + p.top.1))
        });
    ChiPiece::new(lo, hi, top)
}

/// Tops `τ_j` when every input is one χ function on the hull of its domain and the shortcut
/// conditions hold: `τ_j¹ ∈ X_j`, and both `Σ X_j ∩ (−∞, τ_j¹]` and `Σ X_j ∩ [τ_j¹, ∞)` are
/// connected. Under these conditions the star equals the star over the hulls.
pub fn shortcut_tops<T: Float>(restricted: &[PiecewiseChi<T>]) -> Option<Vec<(T, T)>> {
    let mut tops = Vec::with_capacity(restricted.len());
    let mut below = Vec::with_capacity(restricted.len());
    let mut above = Vec::with_capacity(restricted.len());
    for g in restricted {
        let tau = g.as_single_chi()?;
        let domain = g.domain();
        if !domain.contains(tau.0) {
            return None;
        }
        below.push(domain.split_at(tau.0, false));
        above.push(domain.split_at(tau.0, true));
        tops.push(tau);
    }
    (sum_is_connected(&below) && sum_is_connected(&above)).then_some(tops)
}

/// Star operator with the shortcut applied whenever its conditions hold.
pub fn chi_star<T: Float>(inputs: &[StarInput<T>]) -> Result<PiecewiseChi<T>> {
    chi_star_report(inputs).map(|r| r.output)
}

/// Star operator reporting how the result was obtained.
pub fn chi_star_report<T: Float>(inputs: &[StarInput<T>]) -> Result<StarReport<T>> {
    let restricted = restrict_all(inputs)?;
    if restricted.len() > 1 {
        if let Some(tops) = shortcut_tops(&restricted) {
            let hulls: Vec<ChiPiece<T>> = restricted
                .iter()
                .zip(&tops)
                .map(|(g, &t)| {
                    let d = g.domain();
                    ChiPiece::new(d.min().unwrap(), d.max().unwrap(), t)
                })
                .collect();
            let output = PiecewiseChi::single(
                hulls.iter().fold(T::zero(), |a, p| a + p.lo),
                hulls.iter().fold(T::zero(), |a, p| a + p.hi),
                star_pieces(&hulls).top,
            );
            return Ok(StarReport {
                output,
                subproblems: 1,
                shortcut: true,
            });
        }
    }
    Ok(enumerate(&restricted))
}

/// Star operator by enumerating every combination of pieces, without the shortcut.
pub fn chi_star_enumerated<T: Float>(inputs: &[StarInput<T>]) -> Result<StarReport<T>> {
    Ok(enumerate(&restrict_all(inputs)?))
}

/// Maximum over all piece combinations `σ` of the closed-form star of `σ`.
fn enumerate<T: Float>(restricted: &[PiecewiseChi<T>]) -> StarReport<T> {
    let mut combos = Vec::new();
    for_each_combination(restricted, |sel| combos.push(star_pieces(sel)));
    let subproblems = combos.len();
    StarReport {
        output: envelope(combos),
        subproblems,
        shortcut: false,
    }
}

fn for_each_combination<T: Float, F: FnMut(&[ChiPiece<T>])>(inputs: &[PiecewiseChi<T>], mut f: F) {
    let counts: Vec<usize> = inputs.iter().map(|g| g.pieces().len()).collect();
    if counts.iter().any(|&c| c == 0) {
        return;
    }
    let mut idx = vec![0usize; inputs.len()];
    let mut sel: Vec<ChiPiece<T>> = inputs.iter().map(|g| g.pieces()[0]).collect();
    loop {
        f(&sel);
        let mut k = 0;
        loop {
            if k == idx.len() {
                return;
            }
            idx[k] += 1;
            if idx[k] < counts[k] {
                sel[k] = inputs[k].pieces()[idx[k]];
                break;
            }
            idx[k] = 0;
            sel[k] = inputs[k].pieces()[0];
            k += 1;
        }
    }
}

/// A maximizer `x*` of `Σ g_j(x_j)` subject to `Σ x_j = z`, `x_j ∈ X_j`.
///
/// Among the piece combinations containing `z` the best one is chosen (the first in
/// enumeration order on ties). Within it the split starts from the tops `τ_j¹` and moves all
/// coordinates proportionally: first the positive (resp. negative) tops toward zero, then every
/// coordinate toward its lower (resp. upper) bound.
pub fn chi_argmax_split<T: Float>(inputs: &[StarInput<T>], z: T) -> Result<Vec<T>> {
    let restricted = restrict_all(inputs)?;
    let mut best: Option<(T, Vec<ChiPiece<T>>)> = None;
    for_each_combination(&restricted, |sel| {
        let s = star_pieces(sel);
        if !s.contains(z) {
            return;
        }
        let v = s.eval(z);
        let better = match &best {
            None => true,
            Some((b, _)) => v > *b + slack(v, *b),
        };
        if better {
            best = Some((v, sel.to_vec()));
        }
    });
    let Some((_, sel)) = best else {
        let domain = IntervalSet::sum_all(
            restricted
                .iter()
                .map(|g| g.domain())
                .collect::<Vec<_>>()
                .iter(),
        );
        return Err(Error::InfeasibleTarget {
            target: to_f64(z),
            lo: domain.min().map(to_f64).unwrap_or(f64::NAN),
            hi: domain.max().map(to_f64).unwrap_or(f64::NAN),
        });
    };
    Ok(water_fill(&sel, z))
}

/// Proportional split of `z` over single-interval χ inputs.
pub fn water_fill<T: Float>(pieces: &[ChiPiece<T>], z: T) -> Vec<T> {
    let zero = T::zero();
    let tau: Vec<T> = pieces.iter().map(|p| p.top.0).collect();
    let total: T = tau.iter().fold(zero, |a, &b| a + b);
    if (z - total).abs() <= slack(z, total) {
        return tau;
    }
    let lower = z < total;
    // intermediate anchor: tops on the far side of zero move to zero (or the nearest bound)
    let anchor: Vec<T> = pieces
        .iter()
        .map(|p| {
            let t = p.top.0;
            if lower && t > zero {
                p.lo.max(zero)
            } else if !lower && t < zero {
                p.hi.min(zero)
            } else {
                t
            }
        })
        .collect();
    let bound: Vec<T> = pieces
        .iter()
        .map(|p| if lower { p.lo } else { p.hi })
        .collect();
    let sum = |v: &[T]| v.iter().fold(zero, |a, &b| a + b);
    let (a_sum, b_sum) = (sum(&anchor), sum(&bound));
    let lerp = |from: &[T], to: &[T], theta: T| -> Vec<T> {
        from.iter()
            .zip(to)
            .map(|(&f, &t)| f + theta * (t - f))
            .collect()
    };
    let reach_anchor = if lower { z >= a_sum } else { z <= a_sum };
    let mut x = if reach_anchor {
        let span = a_sum - total;
        let theta = if span == zero {
            T::one()
        } else {
            (z - total) / span
        };
        lerp(&tau, &anchor, theta.max(zero).min(T::one()))
    } else {
        let span = b_sum - a_sum;
        let theta = if span == zero {
            T::one()
        } else {
            (z - a_sum) / span
        };
        lerp(&anchor, &bound, theta.max(zero).min(T::one()))
    };
    for (xi, p) in x.iter_mut().zip(pieces) {
        *xi = xi.max(p.lo).min(p.hi);
    }
    x
}

/// Objective `Σ g_j(x_j)` of a split, or `None` when a coordinate leaves its domain.
pub fn split_value<T: Float>(inputs: &[StarInput<T>], x: &[T]) -> Option<T> {
    let mut total = T::zero();
    for ((g, dom), &xi) in inputs.iter().zip(x) {
        if !dom.contains(xi) {
            return None;
        }
        total = total + g.eval(xi)?;
    }
    Some(total)
}
