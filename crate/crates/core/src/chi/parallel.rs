//! Optimal control of a two-node network whose links all run in parallel between one supply
//! and one demand node.

use crate::cascade::EPS_CAP;
use crate::error::{Error, Result};
use crate::net::{Network, NodeRole};

/// Links of a parallel network sorted by `w_i / c_i` ascending, with the supportable loads.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelProfile {
    /// Original link indices in sorted order.
    pub order: Vec<usize>,
    pub weights: Vec<f64>,
    pub capacities: Vec<f64>,
    /// `R_i = (c_i / w_i)·Σ_{j≤i} w_j`: largest supply the first `i` links carry (index `i − 1`).
    pub r: Vec<f64>,
    /// Record points `o_1 < … < o_m` of the running maximum of `R`, one-based; `o_m = |E|`.
    pub records: Vec<usize>,
}

impl ParallelProfile {
    pub fn new(weights: &[f64], capacities: &[f64]) -> Self {
        assert_eq!(weights.len(), capacities.len(), "one capacity per weight");
        assert!(
            !weights.is_empty(),
            "a parallel network needs at least one link"
        );
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| {
            (weights[a] / capacities[a]).total_cmp(&(weights[b] / capacities[b]))
        });
        let w: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
        let c: Vec<f64> = order.iter().map(|&i| capacities[i]).collect();
        let mut r = Vec::with_capacity(w.len());
        let mut total = 0.0;
        for (wi, ci) in w.iter().zip(&c) {
            total += wi;
            r.push(ci / wi * total);
        }
        let mut records = Vec::new();
        let mut start = 0;
        while start < r.len() {
            // largest index attaining the maximum over the remaining links
            let mut best = start;
            for i in start..r.len() {
                if r[i] >= r[best] {
                    best = i;
                }
            }
            records.push(best + 1);
            start = best + 1;
        }
        ParallelProfile {
            order,
            weights: w,
            capacities: c,
            r,
            records,
        }
    }

    /// Profile of a network with one supply node, one demand node and links only between them.
    pub fn from_network(net: &Network) -> Result<Self> {
        let ctrl = net.controlled_nodes();
        if net.node_count() != 2 || ctrl.len() != 2 || net.link_count() == 0 {
            return Err(Error::InvalidNetwork(
                "a parallel network has exactly two controlled nodes".into(),
            ));
        }
        let has_both =
            net.roles().contains(&NodeRole::Supply) && net.roles().contains(&NodeRole::Demand);
        if !has_both {
            return Err(Error::InvalidNetwork(
                "a parallel network joins one supply and one demand node".into(),
            ));
        }
        let w: Vec<f64> = net.links().iter().map(|l| l.weight).collect();
        let c: Vec<f64> = net.links().iter().map(|l| l.capacity).collect();
        Ok(ParallelProfile::new(&w, &c))
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `R` at a one-based record point.
    pub fn record_value(&self, k: usize) -> f64 {
        self.r[self.records[k] - 1]
    }

    /// Number of sorted links that survive one step with supply `p` on the first `k` links. The
    /// survivors always form a prefix.
    pub fn survivors(&self, k: usize, p: f64) -> usize {
        if k == 0 {
            return 0;
        }
        let total: f64 = self.weights[..k].iter().sum();
        (0..k)
            .take_while(|&i| (p * self.weights[i] / total).abs() <= self.capacities[i] + EPS_CAP)
            .count()
    }

    /// Active prefix sizes of the uncontrolled cascade `k_0 = |E|, k_1, …` up to its fixpoint
    /// (or until every link is lost).
    pub fn uncontrolled(&self, p: f64) -> Vec<usize> {
        let mut out = vec![self.len()];
        loop {
            let k = *out.last().unwrap();
            if k == 0 {
                return out;
            }
            let next = self.survivors(k, p);
            if next == k {
                return out;
            }
            out.push(next);
        }
    }

    /// Stage thresholds `N_1 ≥ … ≥ N_m`. For record points that support `p` it is one more than
    /// the number of steps the uncontrolled cascade needs to settle; otherwise one more than the
    /// number of steps until at most `o_k` links remain.
    pub fn thresholds(&self, p: f64) -> Vec<usize> {
        let prefix = self.uncontrolled(p);
        let settle = prefix.len() - 1;
        (0..self.records.len())
            .map(|k| {
                if self.record_value(k) + EPS_CAP >= p {
                    1 + settle
                } else {
                    let o = self.records[k];
                    1 + prefix.iter().position(|&kt| kt <= o).unwrap_or(settle)
                }
            })
            .collect()
    }
}

/// Prefix size at the last stage when `p0` is held for `hold` stages and `z` afterwards over `n`
/// stages, or `None` when `z` is not carried there.
fn one_shot_end(
    profile: &ParallelProfile,
    p0: f64,
    hold: usize,
    z: f64,
    n: usize,
) -> Option<usize> {
    let mut k = profile.len();
    for t in 0..n - 1 {
        let u = if t < hold { p0 } else { z };
        if k == 0 {
            break;
        }
        k = profile.survivors(k, u);
    }
    let last = if n - 1 < hold { p0 } else { z };
    let carried = if k == 0 {
        last == 0.0
    } else {
        profile.survivors(k, last) == k
    };
    carried.then_some(k)
}

/// Optimal supply sequence `u^0, …, u^{N−1}` for initial supply `p0 > 0`: hold `p0` while the
/// cascade sheds links by itself, then shed once and hold the shed level.
///
/// The threshold rule (shed to `min{R_{o_j}, p0}` from stage `N_j − 2`) can shed one stage too
/// early, and when the uncontrolled cascade jumps past `o_j` it sheds too late, so the stage and
/// level are chosen by running the prefix dynamics: the level is `p0` or some `R_i`, since the
/// final prefix `[k]` carries exactly the supplies up to `R_k`. Ties go to the earliest stage.
pub fn parallel_optimal(profile: &ParallelProfile, p0: f64, n: usize) -> Vec<f64> {
    assert!(
        p0 > 0.0 && n >= 1,
        "parallel control needs p0 > 0 and N ≥ 1"
    );
    let mut levels: Vec<f64> = profile.r.iter().copied().filter(|&r| r < p0).collect();
    levels.push(p0);
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let mut best = (0.0, 0);
    for hold in 0..n {
        if let Some(&z) = levels
            .iter()
            .find(|&&z| one_shot_end(profile, p0, hold, z, n).is_some())
        {
            if z > best.0 {
                best = (z, hold);
            }
        }
    }
    let (shed, hold) = best;
    (0..n).map(|t| if t < hold { p0 } else { shed }).collect()
}

/// Optimal objective `2·u^{N−1}` of a parallel network (supply plus served demand).
pub fn parallel_value(profile: &ParallelProfile, p0: f64, n: usize) -> f64 {
    2.0 * parallel_optimal(profile, p0, n)[n - 1]
}
