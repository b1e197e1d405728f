//! Random polytopes and convex-hull oracles for the sweep operators.

use cascade_core::geometry::{clip, hypercube_of, Hyperplane, IncidenceGraph};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{brute_force_facets_3d, facet_inequalities, hrep_score, same_plane};

pub fn random_positive_simplex(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..4)
        .map(|_| (0..3).map(|_| rng.gen_range(0.2..5.0)).collect())
        .collect()
}

pub fn random_clipped_box(rng: &mut ChaCha8Rng) -> IncidenceGraph {
    let lo: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|&l| l + rng.gen_range(1.0..4.0)).collect();
    let mut g = hypercube_of(&[1.0, 1.0, 1.0])
        .map_coords(|x| (0..3).map(|i| lo[i] + x[i] * (hi[i] - lo[i])).collect());
    for _ in 0..2 {
        let n: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..3)
            .map(|i| lo[i] + rng.gen_range(0.3..0.7) * (hi[i] - lo[i]))
            .collect();
        let off: f64 = n.iter().zip(&c).map(|(a, b)| a * b).sum();
        let h = Hyperplane::new(n.clone(), off).unwrap();
        g = clip(&g, &h, -h.orientation(&n)).unwrap();
    }
    g
}

pub fn sweep_points(vs: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let mut pts = vs.to_vec();
    for v in vs {
        let mut p = v.clone();
        p[k] = 0.0;
        pts.push(p);
    }
    pts
}

pub fn cube_points(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    for v in vs {
        for mask in 0..8 {
            pts.push(
                (0..3)
                    .map(|i| if mask & (1 << i) != 0 { v[i] } else { 0.0 })
                    .collect(),
            );
        }
    }
    pts
}

/// Index in `own` of the facet opposite vertex `opp` of the simplex.
pub fn own_index(vs: &[Vec<f64>], own: &[(Vec<f64>, f64)], opp: usize) -> usize {
    own.iter()
        .position(|(n, o)| {
            (0..4)
                .filter(|&v| v != opp)
                .all(|v| (n.iter().zip(&vs[v]).map(|(a, b)| a * b).sum::<f64>() - o).abs() < 1e-7)
        })
        .unwrap()
}

/// Sampled points of the bounding region where the lattice and the convex hull of
/// `oracle_points` disagree on membership, or `None` when their facet counts differ.
pub fn membership_violations(
    g: &IncidenceGraph,
    oracle_points: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
    samples: usize,
) -> Option<usize> {
    let oracle = brute_force_facets_3d(oracle_points, 1e-9);
    let lattice = facet_inequalities(g);
    if lattice.len() != oracle.len() {
        return None;
    }
    let hi: Vec<f64> = (0..3)
        .map(|i| oracle_points.iter().map(|p| p[i]).fold(0.0, f64::max) + 0.5)
        .collect();
    let mut violations = 0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..3).map(|i| rng.gen_range(-0.5..hi[i])).collect();
        let a = hrep_score(&lattice, &x);
        let b = hrep_score(&oracle, &x);
        if (a < -1e-7 && b > 1e-7) || (a > 1e-7 && b < -1e-7) {
            violations += 1;
        }
    }
    Some(violations)
}

/// Facets of the sweep of simplex `vs` along axis `k`, classified by rule: every facet whose
/// normal has a positive `k` component persists, and the vertical plane through an edge is a
/// facet exactly when one of the two simplex facets at the edge is such a top facet. Returns the
/// facets of the brute-force hull and the list of rule violations.
pub fn sweep_facet_rule_violations(
    vs: &[Vec<f64>],
    k: usize,
) -> (Vec<(Vec<f64>, f64)>, Vec<String>) {
    let g = super::simplex(vs);
    let swept = brute_force_facets_3d(&sweep_points(vs, k), 1e-9);
    let own = facet_inequalities(&g);
    let top: Vec<bool> = own.iter().map(|(n, _)| n[k] > 1e-9).collect();
    let mut bad = Vec::new();
    for ((n, o), &t) in own.iter().zip(&top) {
        let present = swept.iter().any(|(m, p)| same_plane(m, *p, n, *o, 1e-7));
        if present != t {
            bad.push(format!("facet {n:?} top={t}"));
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            // facets opposite the two other vertices contain edge {i, j}
            let tops_on_edge = (0..4)
                .filter(|&f| f != i && f != j)
                .filter(|&opp| top[own_index(vs, &own, opp)])
                .count();
            let boundary = tops_on_edge == 1;
            let e = [
                vs[i][0] - vs[j][0],
                vs[i][1] - vs[j][1],
                vs[i][2] - vs[j][2],
            ];
            let mut ek = [0.0; 3];
            ek[k] = 1.0;
            let n = [
                e[1] * ek[2] - e[2] * ek[1],
                e[2] * ek[0] - e[0] * ek[2],
                e[0] * ek[1] - e[1] * ek[0],
            ];
            let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let n: Vec<f64> = n.iter().map(|x| x / nn).collect();
            let off: f64 = n.iter().zip(&vs[i]).map(|(a, b)| a * b).sum();
            let neg: Vec<f64> = n.iter().map(|x| -x).collect();
            let present = swept.iter().any(|(m, p)| {
                same_plane(m, *p, &n, off, 1e-7) || same_plane(m, *p, &neg, -off, 1e-7)
            });
            if present != boundary {
                bad.push(format!("edge {i}-{j}: boundary={boundary}"));
            }
        }
    }
    (swept, bad)
}
