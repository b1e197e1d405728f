//! Finite unions of closed intervals on the real line.

use num_traits::Float;

/// Comparison slack relative to the magnitude of the operands.
pub(crate) fn slack<T: Float>(a: T, b: T) -> T {
    T::epsilon() * T::from(1e4).unwrap() * (T::one() + a.abs().max(b.abs()))
}

/// Closed interval `[lo, hi]`, possibly a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Float> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        assert!(lo <= hi, "interval bounds out of order");
        Interval { lo, hi }
    }

    pub fn point(x: T) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn len(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.lo - slack(x, self.lo) && x <= self.hi + slack(x, self.hi)
    }

    pub fn intersect(&self, other: &Interval<T>) -> Option<Interval<T>> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else if lo - hi <= slack(lo, hi) {
            Some(Interval::point(lo))
        } else {
            None
        }
    }

    pub fn add(&self, other: &Interval<T>) -> Interval<T> {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    pub fn neg(&self) -> Interval<T> {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

/// Sorted union of pairwise disjoint closed intervals. Intervals closer than the comparison
/// slack are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet<T> {
    parts: Vec<Interval<T>>,
}

pub type IntervalSetF64 = IntervalSet<f64>;

impl<T: Float> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn single(lo: T, hi: T) -> Self {
        IntervalSet {
            parts: vec![Interval::new(lo, hi)],
        }
    }

    /// Normalizes an arbitrary list of intervals.
    pub fn from_intervals(mut parts: Vec<Interval<T>>) -> Self {
        parts.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .expect("interval bounds are not NaN")
        });
        let mut out: Vec<Interval<T>> = Vec::with_capacity(parts.len());
        for p in parts {
            match out.last_mut() {
                Some(last) if p.lo <= last.hi + slack(p.lo, last.hi) => last.hi = last.hi.max(p.hi),
                _ => out.push(p),
            }
        }
        IntervalSet { parts: out }
    }

    pub fn parts(&self) -> &[Interval<T>] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        self.parts.len() <= 1
    }

    pub fn min(&self) -> Option<T> {
        self.parts.first().map(|p| p.lo)
    }

    pub fn max(&self) -> Option<T> {
        self.parts.last().map(|p| p.hi)
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<Interval<T>> {
        Some(Interval::new(self.min()?, self.max()?))
    }

    pub fn contains(&self, x: T) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn union(&self, other: &IntervalSet<T>) -> IntervalSet<T> {
        IntervalSet::from_intervals(self.parts.iter().chain(&other.parts).copied().collect())
    }

    pub fn intersect(&self, other: &IntervalSet<T>) -> IntervalSet<T> {
        let mut out = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                if let Some(c) = a.intersect(b) {
                    out.push(c);
                }
            }
        }
        IntervalSet::from_intervals(out)
    }

    pub fn intersect_interval(&self, iv: &Interval<T>) -> IntervalSet<T> {
        self.intersect(&IntervalSet { parts: vec![*iv] })
    }

    /// Minkowski sum `{a + b}`.
    pub fn sum(&self, other: &IntervalSet<T>) -> IntervalSet<T> {
        let mut out = Vec::with_capacity(self.parts.len() * other.parts.len());
        for a in &self.parts {
            for b in &other.parts {
                out.push(a.add(b));
            }
        }
        IntervalSet::from_intervals(out)
    }

    /// Minkowski sum of several sets; the sum of no sets is `{0}`.
    pub fn sum_all<'a, I: IntoIterator<Item = &'a IntervalSet<T>>>(sets: I) -> IntervalSet<T>
    where
        T: 'a,
    {
        sets.into_iter()
            .fold(IntervalSet::single(T::zero(), T::zero()), |acc, s| {
                acc.sum(s)
            })
    }

    pub fn neg(&self) -> IntervalSet<T> {
        IntervalSet::from_intervals(self.parts.iter().map(|p| p.neg()).collect())
    }

    /// Part of the set below (`upper = false`: `x ≤ at`) or above (`x ≥ at`) a threshold.
    pub fn split_at(&self, at: T, upper: bool) -> IntervalSet<T> {
        let ray = if upper {
            Interval::new(at, T::infinity())
        } else {
            Interval::new(T::neg_infinity(), at)
        };
        self.intersect_interval(&ray)
    }

    /// Largest gap between consecutive intervals (zero for connected sets).
    pub fn max_gap(&self) -> T {
        self.parts
            .windows(2)
            .map(|w| w[1].lo - w[0].hi)
            .fold(T::zero(), T::max)
    }

    /// Span `max − min` (zero for empty sets).
    pub fn width(&self) -> T {
        match (self.min(), self.max()) {
            (Some(a), Some(b)) => b - a,
            _ => T::zero(),
        }
    }
}

/// Sufficient condition for `Σ X_j` to be connected when one summand is an interval: with the
/// summands ordered by increasing largest gap `δ_j`, every gap is bridged by the total width of
/// the summands before it.
pub fn sum_connected_by_gaps<T: Float>(sets: &[IntervalSet<T>]) -> bool {
    if !sets.iter().any(|s| s.is_connected()) {
        return false;
    }
    let mut order: Vec<&IntervalSet<T>> = sets.iter().collect();
    order.sort_by(|a, b| a.max_gap().partial_cmp(&b.max_gap()).unwrap());
    let mut width = T::zero();
    for (k, s) in order.iter().enumerate() {
        if k > 0 && s.max_gap() > width + slack(width, s.max_gap()) {
            return false;
        }
        width = width + s.width();
    }
    true
}

/// Sufficient condition for the `n`-fold sum `X + … + X` to be connected: every gap between
/// neighbouring intervals is at most `n − 1` times the shorter of the two.
pub fn repeated_sum_connected<T: Float>(set: &IntervalSet<T>, n: usize) -> bool {
    let factor = T::from(n.saturating_sub(1)).unwrap();
    set.parts().windows(2).all(|w| {
        let gap = w[1].lo - w[0].hi;
        gap <= factor * w[0].len().min(w[1].len()) + slack(gap, T::zero())
    })
}

/// Whether `Σ X_j` is connected: the gap condition first, the exact sum otherwise.
pub fn sum_is_connected<T: Float>(sets: &[IntervalSet<T>]) -> bool {
    if sets.iter().any(|s| s.is_empty()) {
        return false;
    }
    if sets.len() >= 2
        && sets.windows(2).all(|w| w[0] == w[1])
        && repeated_sum_connected(&sets[0], sets.len())
    {
        return true;
    }
    sum_connected_by_gaps(sets) || IntervalSet::sum_all(sets).is_connected()
}
