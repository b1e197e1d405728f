//! Tent functions with slopes ±1 and their piecewise unions.

use num_traits::Float;

use super::interval::{slack, Interval, IntervalSet};

/// `χ_τ(x)`: `x − τ¹ + τ²` for `x ≤ τ¹` and `−x + τ¹ + τ²` beyond.
pub fn chi<T: Float>(top: (T, T), x: T) -> T {
    if x <= top.0 {
        x - top.0 + top.1
    } else {
        -x + top.0 + top.1
    }
}

/// Moves a top point lying outside `[lo, hi]` onto the nearest endpoint without changing the
/// function on the interval.
pub fn translate_top<T: Float>(top: (T, T), lo: T, hi: T) -> (T, T) {
    if top.0 > hi {
        (hi, hi - top.0 + top.1)
    } else if top.0 < lo {
        (lo, -lo + top.0 + top.1)
    } else {
        top
    }
}

/// `χ_τ` restricted to `[lo, hi]`, with `lo ≤ τ¹ ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiPiece<T> {
    pub lo: T,
    pub hi: T,
    pub top: (T, T),
}

impl<T: Float> ChiPiece<T> {
    /// Restriction of `χ_top` to `[lo, hi]`; the top is translated into the interval.
    pub fn new(lo: T, hi: T, top: (T, T)) -> Self {
        assert!(lo <= hi, "piece bounds out of order");
        ChiPiece {
            lo,
            hi,
            top: translate_top(top, lo, hi),
        }
    }

    /// `sign·x` on `[lo, hi]` for `sign = ±1`.
    pub fn linear(sign: T, lo: T, hi: T) -> Self {
        let end = if sign > T::zero() { hi } else { lo };
        ChiPiece::new(lo, hi, (end, sign * end))
    }

    pub fn eval(&self, x: T) -> T {
        chi(self.top, x)
    }

    pub fn interval(&self) -> Interval<T> {
        Interval::new(self.lo, self.hi)
    }

    pub fn contains(&self, x: T) -> bool {
        self.interval().contains(x)
    }

    pub fn max_value(&self) -> T {
        self.top.1
    }

    /// Restriction to `[lo, hi] ∩ iv`.
    pub fn restrict(&self, iv: &Interval<T>) -> Option<ChiPiece<T>> {
        self.interval()
            .intersect(iv)
            .map(|c| ChiPiece::new(c.lo, c.hi, self.top))
    }

    /// Whether the piece rises up to its top (it has a part of slope +1).
    fn rises(&self) -> bool {
        self.top.0 > self.lo
    }

    /// Whether the piece falls after its top (it has a part of slope −1).
    fn falls(&self) -> bool {
        self.top.0 < self.hi
    }
}

/// Function that is a restricted χ function on each of finitely many closed intervals. Pieces
/// are sorted by their left end and have disjoint interiors; pieces may touch at an endpoint, in
/// which case the larger value applies there.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseChi<T> {
    pieces: Vec<ChiPiece<T>>,
}

pub type PiecewiseChiF64 = PiecewiseChi<f64>;

impl<T: Float> PiecewiseChi<T> {
    /// Upper envelope of arbitrary pieces; overlapping pieces are resolved by the maximum.
    pub fn from_pieces(pieces: Vec<ChiPiece<T>>) -> Self {
        envelope(pieces)
    }

    /// A single restricted χ function.
    pub fn single(lo: T, hi: T, top: (T, T)) -> Self {
        PiecewiseChi {
            pieces: vec![ChiPiece::new(lo, hi, top)],
        }
    }

    /// `χ_top` on every interval of `domain`.
    pub fn on_domain(top: (T, T), domain: &IntervalSet<T>) -> Self {
        PiecewiseChi {
            pieces: domain
                .parts()
                .iter()
                .map(|p| ChiPiece::new(p.lo, p.hi, top))
                .collect(),
        }
    }

    pub fn pieces(&self) -> &[ChiPiece<T>] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn domain(&self) -> IntervalSet<T> {
        IntervalSet::from_intervals(self.pieces.iter().map(|p| p.interval()).collect())
    }

    /// Value at `x`, or `None` outside the domain.
    pub fn eval(&self, x: T) -> Option<T> {
        self.pieces
            .iter()
            .filter(|p| p.contains(x))
            .map(|p| p.eval(x))
            .fold(None, |acc, v| match acc {
                Some(a) if a >= v => Some(a),
                _ => Some(v),
            })
    }

    /// Largest value and a point attaining it.
    pub fn maximum(&self) -> Option<(T, T)> {
        self.pieces
            .iter()
            .map(|p| (p.top.0, p.top.1))
            .fold(None, |acc, (x, v)| match acc {
                Some((_, a)) if a >= v => acc,
                _ => Some((x, v)),
            })
    }

    /// Restriction to `domain`.
    pub fn restrict(&self, domain: &IntervalSet<T>) -> PiecewiseChi<T> {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            for iv in domain.parts() {
                if let Some(r) = p.restrict(iv) {
                    pieces.push(r);
                }
            }
        }
        pieces.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        PiecewiseChi { pieces }
    }

    /// Top point `τ` such that the function equals `χ_τ` on its whole domain, if one exists.
    pub fn as_single_chi(&self) -> Option<(T, T)> {
        let first = self.pieces.first()?;
        let close = |a: T, b: T| (a - b).abs() <= slack(a, b) * T::from(100).unwrap();
        let interior: Vec<&ChiPiece<T>> = self
            .pieces
            .iter()
            .filter(|p| p.rises() && p.falls())
            .collect();
        let rising: Vec<T> = self
            .pieces
            .iter()
            .filter(|p| p.rises())
            .map(|p| p.top.1 - p.top.0)
            .collect();
        let falling: Vec<T> = self
            .pieces
            .iter()
            .filter(|p| p.falls())
            .map(|p| p.top.1 + p.top.0)
            .collect();
        let candidate =
            if let Some(p) = interior.first() {
                p.top
            } else {
                match (rising.first(), falling.first()) {
                    (Some(&a), Some(&b)) => (
                        (b - a) / (T::one() + T::one()),
                        (a + b) / (T::one() + T::one()),
                    ),
                    (Some(_), None) => self
                        .pieces
                        .iter()
                        .map(|p| p.top)
                        .fold(first.top, |acc, t| if t.0 > acc.0 { t } else { acc }),
                    (None, Some(_)) => self
                        .pieces
                        .iter()
                        .map(|p| p.top)
                        .fold(first.top, |acc, t| if t.0 < acc.0 { t } else { acc }),
                    (None, None) => {
                        // only single points: accept when they all lie on one tent through the best
                        self.pieces.iter().map(|p| p.top).fold(first.top, |acc, t| {
                            if t.1 > acc.1 {
                                t
                            } else {
                                acc
                            }
                        })
                    }
                }
            };
        let consistent = self.pieces.iter().all(|p| {
            let t = translate_top(candidate, p.lo, p.hi);
            close(t.0, p.top.0) && close(t.1, p.top.1)
        });
        consistent.then_some(candidate)
    }

    /// Checks the representation invariants: ordered pieces, tops inside their intervals,
    /// overlapping only at endpoints.
    pub fn is_valid(&self) -> bool {
        let tops_inside = self
            .pieces
            .iter()
            .all(|p| p.lo <= p.top.0 && p.top.0 <= p.hi && p.lo <= p.hi);
        let ordered = self.pieces.windows(2).all(|w| w[0].lo <= w[1].lo);
        let mut extended: Vec<&ChiPiece<T>> = self.pieces.iter().filter(|p| p.hi > p.lo).collect();
        extended.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        let disjoint = extended
            .windows(2)
            .all(|w| w[1].lo >= w[0].hi - slack(w[1].lo, w[0].hi));
        tops_inside && ordered && disjoint
    }
}

/// Affine run `y = slope·x + offset` on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    lo: T,
    hi: T,
    rising: bool,
    offset: T,
}

impl<T: Float> Segment<T> {
    fn at(&self, x: T) -> T {
        if self.rising {
            x + self.offset
        } else {
            -x + self.offset
        }
    }
}

/// Line of a piece on its rising (`x − τ¹ + τ²`) or falling (`−x + τ¹ + τ²`) side.
fn offset<T: Float>(top: (T, T), rising: bool) -> T {
    if rising {
        top.1 - top.0
    } else {
        top.1 + top.0
    }
}

/// Pointwise maximum of restricted χ functions as a normalized piecewise χ function.
pub fn envelope<T: Float>(pieces: Vec<ChiPiece<T>>) -> PiecewiseChi<T> {
    if pieces.is_empty() {
        return PiecewiseChi { pieces };
    }
    let two = T::one() + T::one();
    let (points, extended): (Vec<ChiPiece<T>>, Vec<ChiPiece<T>>) =
        pieces.into_iter().partition(|p| p.hi <= p.lo);

    let mut breaks: Vec<T> = Vec::new();
    for p in &extended {
        breaks.extend([p.lo, p.hi, p.top.0]);
    }
    for a in &extended {
        for b in &extended {
            let x = (offset(b.top, false) - offset(a.top, true)) / two;
            let (lo, hi) = (a.lo.max(b.lo), a.hi.min(b.hi));
            if x > lo && x < hi {
                breaks.push(x);
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() <= slack(*a, *b));

    let mut segments: Vec<Segment<T>> = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = (lo + hi) / two;
        let best = extended
            .iter()
            .filter(|p| p.lo <= mid && mid <= p.hi)
            .max_by(|a, b| a.eval(mid).partial_cmp(&b.eval(mid)).unwrap());
        if let Some(p) = best {
            let rising = mid <= p.top.0;
            segments.push(Segment {
                lo,
                hi,
                rising,
                offset: offset(p.top, rising),
            });
        }
    }

    let tol = |a: T, b: T| slack(a, b) * T::from(100).unwrap();
    let mut out: Vec<ChiPiece<T>> = Vec::new();
    let mut run: Option<(T, T, Option<T>, bool)> = None; // (lo, hi, peak, currently rising)
    let mut last: Option<Segment<T>> = None;
    for seg in &segments {
        let joins = match (&run, &last) {
            (Some((_, hi, _, rising)), Some(prev)) => {
                let touching = (seg.lo - *hi).abs() <= tol(seg.lo, *hi);
                let continuous =
                    (prev.at(*hi) - seg.at(seg.lo)).abs() <= tol(prev.at(*hi), seg.at(seg.lo));
                let shape = *rising || !seg.rising;
                touching && continuous && shape
            }
            _ => false,
        };
        if joins {
            let (lo, _, peak, rising) = run.unwrap();
            let peak = if rising && !seg.rising {
                Some(seg.lo)
            } else {
                peak
            };
            run = Some((lo, seg.hi, peak, seg.rising));
        } else {
            if let (Some(r), Some(prev)) = (run, last) {
                out.push(close_run(r, &prev, &segments));
            }
            run = Some((seg.lo, seg.hi, None, seg.rising));
        }
        last = Some(*seg);
    }
    if let (Some(r), Some(prev)) = (run, last) {
        out.push(close_run(r, &prev, &segments));
    }

    for p in points {
        let covered = out
            .iter()
            .filter(|q| q.contains(p.lo))
            .map(|q| q.eval(p.lo))
            .fold(T::neg_infinity(), T::max);
        if covered == T::neg_infinity() || p.top.1 > covered + tol(p.top.1, covered) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    PiecewiseChi { pieces: out }
}

/// Turns a run of segments into one piece; `last` is the final segment of the run.
fn close_run<T: Float>(
    run: (T, T, Option<T>, bool),
    last: &Segment<T>,
    segments: &[Segment<T>],
) -> ChiPiece<T> {
    let (lo, hi, peak, _) = run;
    let value_at = |x: T| {
        segments
            .iter()
            .filter(|s| s.lo <= x && x <= s.hi && s.lo >= lo && s.hi <= hi)
            .map(|s| s.at(x))
            .fold(T::neg_infinity(), T::max)
    };
    let top = match peak {
        Some(x) => (x, value_at(x)),
        None if last.rising => (hi, last.at(hi)),
        None => (lo, value_at(lo)),
    };
    ChiPiece::new(lo, hi, top)
}
