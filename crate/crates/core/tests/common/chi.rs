//! Oracles for the tent-function algebra and the tree and parallel solvers.

use cascade_core::chi::{
    chi, tree_reduce_rooted, ChiPiece, Interval, IntervalSet, IntervalSetF64, ParallelProfile,
    PiecewiseChi, PiecewiseChiF64, ReducedTree, StarInput,
};
use cascade_core::{bundled, simulate_controls, Instance, Network, NetworkState};
use rand::Rng;

/// Pieces `(lo, hi, top)` of a random piecewise χ function on up to three disjoint intervals,
/// with each top inside its interval.
pub fn random_pieces<R: Rng>(rng: &mut R) -> Vec<(f64, f64, (f64, f64))> {
    let k = rng.gen_range(1..=3);
    let mut x = rng.gen_range(-4.0..0.0);
    let mut out = Vec::new();
    for _ in 0..k {
        let lo = x;
        let hi = lo
            + if rng.gen_bool(0.15) {
                0.0
            } else {
                rng.gen_range(0.2..2.5)
            };
        let t = rng.gen_range(lo..=hi);
        out.push((lo, hi, (t, rng.gen_range(-2.0..4.0))));
        x = hi + rng.gen_range(0.1..2.0);
    }
    out
}

pub fn to_input(pieces: &[(f64, f64, (f64, f64))]) -> StarInput<f64> {
    let g = PiecewiseChiF64::from_pieces(
        pieces
            .iter()
            .map(|&(lo, hi, t)| ChiPiece::new(lo, hi, t))
            .collect(),
    );
    let d = IntervalSetF64::from_intervals(
        pieces
            .iter()
            .map(|&(lo, hi, _)| Interval::new(lo, hi))
            .collect(),
    );
    (g, d)
}

/// Value of a piece list at `x`: the largest χ among pieces containing `x`.
pub fn eval_pieces(pieces: &[(f64, f64, (f64, f64))], x: f64) -> Option<f64> {
    pieces
        .iter()
        .filter(|(lo, hi, _)| *lo - 1e-12 <= x && x <= *hi + 1e-12)
        .map(|&(_, _, t)| chi(t, x))
        .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v))))
}

/// Points where a piece list may change slope: interval ends and tops.
pub fn breakpoints(pieces: &[(f64, f64, (f64, f64))]) -> Vec<f64> {
    pieces
        .iter()
        .flat_map(|&(lo, hi, t)| [lo, hi, t.0])
        .collect()
}

/// `max Σ g_j(x_j)` over `Σ x_j = z` by enumerating the vertices of the arrangement of
/// breakpoint lines, on which a piecewise linear objective attains its maximum.
pub fn brute_star(inputs: &[Vec<(f64, f64, (f64, f64))>], z: f64) -> Option<f64> {
    let bps: Vec<Vec<f64>> = inputs.iter().map(|p| breakpoints(p)).collect();
    let total = |xs: &[f64]| -> Option<f64> {
        let mut s = 0.0;
        for (p, &x) in inputs.iter().zip(xs) {
            s += eval_pieces(p, x)?;
        }
        Some(s)
    };
    let mut best: Option<f64> = None;
    let mut consider = |xs: &[f64]| {
        if let Some(v) = total(xs) {
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    };
    match inputs.len() {
        1 => consider(&[z]),
        2 => {
            for &a in &bps[0] {
                consider(&[a, z - a]);
            }
            for &b in &bps[1] {
                consider(&[z - b, b]);
            }
        }
        3 => {
            for &a in &bps[0] {
                for &b in &bps[1] {
                    consider(&[a, b, z - a - b]);
                }
                for &c in &bps[2] {
                    consider(&[a, z - a - c, c]);
                }
            }
            for &b in &bps[1] {
                for &c in &bps[2] {
                    consider(&[z - b - c, b, c]);
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

/// Dense grid of `z` covering the hull of the sum of domains with a margin.
pub fn z_grid(inputs: &[StarInput<f64>], points: usize) -> Vec<f64> {
    let lo: f64 = inputs.iter().map(|(_, d)| d.min().unwrap()).sum::<f64>() - 0.5;
    let hi: f64 = inputs.iter().map(|(_, d)| d.max().unwrap()).sum::<f64>() + 0.5;
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

pub fn merge_example() -> (
    PiecewiseChiF64,
    IntervalSetF64,
    PiecewiseChiF64,
    IntervalSetF64,
) {
    let g1 = PiecewiseChi::from_pieces(vec![
        ChiPiece::new(-4.0, -2.0, (-3.0, 4.0)),
        ChiPiece::new(-1.5, 0.0, (-1.0, 2.0)),
        ChiPiece::new(0.0, 1.5, (1.0, 2.0)),
        ChiPiece::new(2.0, 4.0, (3.0, 4.0)),
    ]);
    let x1 = IntervalSet::from_intervals(vec![
        Interval::new(-4.0, -2.0),
        Interval::new(-1.5, 1.5),
        Interval::new(2.0, 4.0),
    ]);
    let g2 = PiecewiseChi::from_pieces(vec![
        ChiPiece::new(-4.0, 0.0, (-3.0, 4.0)),
        ChiPiece::new(0.0, 4.0, (3.0, 4.0)),
    ]);
    let x2 = IntervalSet::single(-4.0, 4.0);
    (g1, x1, g2, x2)
}

/// Best level over one-shot controls of a parallel network, by simulation: shed at stage `t1`
/// to a level from the candidate set.
pub fn brute_parallel(
    net: &Network,
    prof: &ParallelProfile,
    p0: f64,
    n: usize,
    constant_only: bool,
) -> f64 {
    let mut levels: Vec<f64> = prof.r.iter().copied().filter(|&r| r <= p0).collect();
    levels.push(p0);
    levels.extend((0..=100).map(|i| p0 * i as f64 / 100.0));
    let st = NetworkState::initial(net, vec![p0, -p0]);
    let mut best = 0.0f64;
    let stages = if constant_only { 1 } else { n };
    for t1 in 0..stages {
        for &z in &levels {
            if z <= best {
                continue;
            }
            let controls: Vec<Vec<f64>> = (0..n)
                .map(|t| if t < t1 { vec![p0, -p0] } else { vec![z, -z] })
                .collect();
            if let Ok((_, true)) = simulate_controls(net, &st, &controls) {
                best = z;
            }
        }
    }
    best
}

pub fn tree_node(net: &Network, name: &str) -> usize {
    net.node_index(name).unwrap()
}

/// The companion network with its tree rooted at node 16.
pub fn companion() -> (Instance, ReducedTree) {
    let inst = bundled::ieee39_tree();
    let tree = tree_reduce_rooted(&inst.net, &inst.active(), tree_node(&inst.net, "16")).unwrap();
    (inst, tree)
}

/// Published output functions of the companion tree: node, top point and domain.
pub fn companion_table() -> Vec<(&'static str, (f64, f64), Vec<(f64, f64)>)> {
    let mut rows = vec![
        ("16", (0.0, 36.0), vec![(-18.0, 17.0)]),
        (
            "6",
            (1.5, 18.5),
            vec![(-8.5, -7.987), (-5.326, 5.326), (7.987, 9.0)],
        ),
        ("17", (2.0, 8.0), vec![(-3.0, 5.0)]),
        ("2", (1.0, 5.0), vec![(-2.0, 3.0)]),
        ("19", (-1.0, 5.0), vec![(-3.0, 2.0)]),
        ("31", (10.0, 10.0), vec![(0.0, 10.0)]),
        ("38", (2.0, 2.0), vec![(0.0, 2.0)]),
    ];
    for v in ["30", "33", "34", "36", "37", "39"] {
        rows.push((v, (1.0, 1.0), vec![(0.0, 1.0)]));
    }
    rows
}

pub fn domain_close(d: &IntervalSetF64, want: &[(f64, f64)], tol: f64) -> bool {
    d.parts().len() == want.len()
        && d.parts()
            .iter()
            .zip(want)
            .all(|(p, &(lo, hi))| (p.lo - lo).abs() <= tol && (p.hi - hi).abs() <= tol)
}

/// Largest deviation of `out` from the brute-force star over a `z` grid. A domain disagreement
/// counts as infinite unless the grid point is within round-off of a domain end.
pub fn star_error(
    raw: &[Vec<(f64, f64, (f64, f64))>],
    out: &PiecewiseChiF64,
    points: usize,
) -> f64 {
    let inputs: Vec<StarInput<f64>> = raw.iter().map(|p| to_input(p)).collect();
    let mut worst = 0.0f64;
    for z in z_grid(&inputs, points) {
        match (brute_star(raw, z), out.eval(z)) {
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            (None, None) => {}
            _ => {
                let near = out.domain().contains(z - 1e-9) || out.domain().contains(z + 1e-9);
                if !near {
                    return f64::INFINITY;
                }
            }
        }
    }
    worst
}
