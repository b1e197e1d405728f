mod common;

use cascade_core::geometry::{
    clip, cube_of_polytope, hypercube_of, insert_hyperplane, insert_hyperplane_strict,
    lp_over_vertices, polytope_of_point, project_dir, slice, sweep_dir, CutOutcome, Hyperplane,
    IncidenceGraph, LatticeBuilder,
};
use cascade_core::Error;
use common::sweep::{
    cube_points, membership_violations, random_clipped_box, random_positive_simplex,
    sweep_facet_rule_violations, sweep_points,
};
use common::{facet_inequalities, simplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn segment(a: &[f64], b: &[f64]) -> IncidenceGraph {
    let mut bld = LatticeBuilder::new(a.len());
    let x = bld.vertex(a.to_vec());
    let y = bld.vertex(b.to_vec());
    bld.face(1, vec![x, y]);
    bld.finish()
}

fn unit_box(d: usize, side: f64) -> IncidenceGraph {
    hypercube_of(&vec![side; d])
}

fn assert_polytope_sane(g: &IncidenceGraph) {
    assert!(g.is_polytope(), "{}", g.dump());
    assert_eq!(g.euler_characteristic(), 1, "{}", g.dump());
    assert!(g.has_diamond_property(), "{}", g.dump());
    for f in g.faces() {
        for &s in &f.subfaces {
            assert_eq!(g.face(s).dim + 1, f.dim);
        }
        if f.dim >= 1 {
            assert!(f.subfaces.len() >= 2);
        }
    }
}

#[test]
fn point_lattice_is_a_single_vertex() {
    for x in [vec![0.0, 0.0, 0.0], vec![-5.0, -5.0, 0.0, 10.0]] {
        let g = polytope_of_point(&x);
        assert_eq!(g.len(), 1);
        assert_eq!(g.face(0).centroid, x);
    }
}

#[test]
fn hypercube_has_one_face_per_sign_vector() {
    for d in 1..=4 {
        let p: Vec<f64> = (0..d)
            .map(|i| if i % 2 == 0 { 1.5 + i as f64 } else { -2.0 })
            .collect();
        let g = hypercube_of(&p);
        assert_eq!(g.len(), 3usize.pow(d as u32));
        assert_polytope_sane(&g);
    }
    assert_eq!(hypercube_of(&[1.0]).f_vector(), vec![2, 1]);
    assert_eq!(hypercube_of(&[1.0, 2.0]).f_vector(), vec![4, 4, 1]);
    assert_eq!(hypercube_of(&[1.0, 2.0, 3.0]).f_vector(), vec![8, 12, 6, 1]);
}

#[test]
fn hypercube_layer_counts_match_enumeration() {
    // a k-face of the d-cube fixes d−k coordinates to one of two values
    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for d in 1..=4 {
        let g = hypercube_of(&vec![1.0; d]);
        let expect: Vec<usize> = (0..=d).map(|k| binom(d, k) * (1 << (d - k))).collect();
        assert_eq!(g.f_vector(), expect);
    }
}

#[test]
fn segment_sweep_is_a_quadrilateral() {
    let g = segment(&[1.0, 3.0], &[3.0, 1.5]);
    let s = sweep_dir(&g, 1).unwrap();
    assert_eq!(s.f_vector(), vec![4, 4, 1]);
    assert_polytope_sane(&s);
    let top = s.top();
    assert_eq!(s.face(top).subfaces.len(), 4);
    let p = project_dir(&g, 1).unwrap();
    let mut xs: Vec<Vec<f64>> = p.vertex_coords().into_iter().map(|x| x.to_vec()).collect();
    xs.sort_by(|a, b| a[0].total_cmp(&b[0]));
    assert_eq!(xs, vec![vec![1.0, 0.0], vec![3.0, 0.0]]);
}

#[test]
fn triangle_sweep_drops_the_bottom_facet() {
    let (a, b, c) = (vec![2.0, 3.0], vec![1.0, 1.0], vec![3.0, 1.5]);
    let g = simplex(&[a.clone(), b.clone(), c.clone()]);
    let s = sweep_dir(&g, 1).unwrap();
    assert_polytope_sane(&s);
    assert_eq!(s.f_vector(), vec![5, 5, 1]);
    let mut xs: Vec<Vec<f64>> = s.vertex_coords().into_iter().map(|x| x.to_vec()).collect();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    assert_eq!(
        xs,
        vec![
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![2.0, 3.0],
            vec![3.0, 0.0],
            vec![3.0, 1.5]
        ]
    );
    // the edge cb is gone, edges ab and ac persist
    let has_edge = |p: &[f64], q: &[f64]| {
        s.layer(1).iter().any(|&e| {
            let vs: Vec<&[f64]> = s.face(e).vertices.iter().map(|&v| s.coords(v)).collect();
            (vs[0] == p && vs[1] == q) || (vs[0] == q && vs[1] == p)
        })
    };
    assert!(has_edge(&a, &b) && has_edge(&a, &c));
    assert!(!has_edge(&b, &c));
    let cube = cube_of_polytope(&g).unwrap();
    assert_polytope_sane(&cube);
    // Π of the triangle: origin, (3,0), (3,1.5), (2,3), (0,3)
    assert_eq!(cube.f_vector(), vec![5, 5, 1]);
}

#[test]
fn sweep_inside_the_hyperplane_is_identity() {
    let g = simplex(&[
        vec![1.0, 0.0, 2.0],
        vec![2.0, 0.0, 1.0],
        vec![0.5, 0.0, 0.5],
    ]);
    let s = sweep_dir(&g, 1).unwrap();
    assert_eq!(s, g);
    assert_eq!(project_dir(&g, 1).unwrap(), g);
}

#[test]
fn sweep_rejects_negative_coordinates() {
    let g = segment(&[1.0, -1.0], &[2.0, 1.0]);
    assert!(matches!(
        sweep_dir(&g, 1),
        Err(Error::NegativeCoordinate { axis: 1, .. })
    ));
}

#[test]
fn cube_of_point_matches_hypercube() {
    for p in [
        vec![2.0, 3.0],
        vec![1.0, -2.0, 4.0],
        vec![-1.0, -1.0, 2.0, 0.5],
    ] {
        let a = cube_of_polytope(&polytope_of_point(&p)).unwrap();
        let b = hypercube_of(&p);
        assert_eq!(a.f_vector(), b.f_vector());
        assert_eq!(a.fingerprint(1e-9), b.fingerprint(1e-9));
        assert_polytope_sane(&a);
    }
}

#[test]
fn line_cuts_square_into_two_cells() {
    let g = unit_box(2, 1.0);
    let h = Hyperplane::new(vec![1.0, 1.0], 1.0).unwrap();
    let ins = insert_hyperplane(&g, &h);
    assert_eq!(ins.outcome, CutOutcome::Split);
    assert_eq!(ins.graph.cells().len(), 2);
    assert_eq!(ins.graph.f_vector(), vec![4, 5, 2]);
    let cut = slice(&g, &h).unwrap();
    assert_eq!(cut.f_vector(), vec![2, 1]);
    let half = clip(&g, &h, -1).unwrap();
    assert_eq!(half.f_vector(), vec![3, 3, 1]);
    assert_polytope_sane(&half);
}

#[test]
fn missing_hyperplane_leaves_lattice_unchanged() {
    let g = unit_box(3, 1.0);
    let h = Hyperplane::new(vec![1.0, 2.0, -0.5], 5.0).unwrap();
    let ins = insert_hyperplane(&g, &h);
    assert_eq!(ins.outcome, CutOutcome::Disjoint);
    assert_eq!(ins.graph.f_vector(), g.f_vector());
    assert_eq!(ins.graph.fingerprint(1e-12), g.fingerprint(1e-12));
    assert!(slice(&g, &h).is_none());
}

#[test]
fn supporting_hyperplane_is_tagged_not_split() {
    let g = unit_box(2, 1.0);
    let h = Hyperplane::new(vec![1.0, 1.0], 2.0).unwrap();
    let ins = insert_hyperplane(&g, &h);
    assert_eq!(ins.outcome, CutOutcome::Supporting);
    assert_eq!(ins.graph.f_vector(), g.f_vector());
    let tagged: Vec<usize> = (0..ins.graph.len())
        .filter(|&f| ins.graph.face(f).hyperplanes.contains(&ins.hyperplane))
        .collect();
    assert_eq!(tagged.len(), 1);
    assert_eq!(ins.graph.coords(tagged[0]), &[1.0, 1.0]);
    assert_eq!(
        insert_hyperplane_strict(&g, &h).unwrap_err(),
        Error::DegenerateCut
    );
}

#[test]
fn lp_over_unit_square() {
    let g = unit_box(2, 1.0);
    assert_eq!(
        lp_over_vertices(&g, &[1.0, 1.0]).unwrap(),
        (2.0, vec![1.0, 1.0])
    );
    assert_eq!(
        lp_over_vertices(&g, &[0.0, 0.0]).unwrap(),
        (0.0, vec![0.0, 0.0])
    );
    assert_eq!(
        lp_over_vertices(&g, &[0.0, 1.0]).unwrap(),
        (1.0, vec![0.0, 1.0])
    );
}

#[test]
fn lp_matches_grid_search_on_random_polytopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let mut g = unit_box(2, 4.0);
        let mut cuts = Vec::new();
        for _ in 0..3 {
            let n = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let off = n[0] * 2.0 + n[1] * 2.0 + rng.gen_range(0.1..1.5);
            let h = Hyperplane::new(n.clone(), off).unwrap();
            g = clip(&g, &h, -h.orientation(&n)).unwrap();
            cuts.push((n, off));
        }
        let obj = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let (v, _) = lp_over_vertices(&g, &obj).unwrap();
        let m = 400;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=m {
            for j in 0..=m {
                let x = [4.0 * i as f64 / m as f64, 4.0 * j as f64 / m as f64];
                if cuts.iter().all(|(n, o)| n[0] * x[0] + n[1] * x[1] <= *o) {
                    best = best.max(obj[0] * x[0] + obj[1] * x[1]);
                }
            }
        }
        assert!(
            v >= best - 1e-9 && v <= best + 2.0 * 4.0 / m as f64 * 2.0,
            "{v} vs {best}"
        );
    }
}

#[test]
fn empty_lattice_has_no_lp_value() {
    let g = LatticeBuilder::new(2).finish();
    assert_eq!(
        lp_over_vertices(&g, &[1.0, 0.0]).unwrap_err(),
        Error::EmptyPolytope
    );
}

#[test]
fn arrangement_cells_match_sampled_sign_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let mut g = unit_box(3, 1.0);
        let mut planes = Vec::new();
        for _ in 0..3 {
            let n: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..0.8)).collect();
            let off: f64 = n.iter().zip(&c).map(|(a, b)| a * b).sum();
            let h = Hyperplane::new(n, off).unwrap();
            g = insert_hyperplane(&g, &h).graph;
            planes.push(h);
        }
        let cells = g.cells();
        let signs = |x: &[f64]| -> Vec<i8> { planes.iter().map(|h| h.side(x)).collect() };
        let mut cell_signs: Vec<Vec<i8>> =
            cells.iter().map(|&c| signs(&g.face(c).centroid)).collect();
        assert!(cell_signs.iter().all(|s| s.iter().all(|&x| x != 0)));
        cell_signs.sort();
        let before = cell_signs.len();
        cell_signs.dedup();
        assert_eq!(before, cell_signs.len(), "two cells share a sign vector");
        for _ in 0..20000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s = signs(&x);
            if s.iter().all(|&v| v != 0) {
                assert!(
                    cell_signs.binary_search(&s).is_ok(),
                    "sampled sign vector {s:?} has no cell"
                );
            }
        }
        for &c in &cells {
            assert_polytope_sane(&g.below(c));
        }
    }
}

#[test]
fn arrangement_in_the_plane_counts_faces() {
    // three lines in general position through the interior of a large square
    let g0 = unit_box(2, 10.0);
    let lines = [([1.0, 0.2], 4.0), ([0.1, 1.0], 5.0), ([1.0, -1.0], 0.5)];
    let mut g = g0;
    for (n, o) in lines {
        g = insert_hyperplane(&g, &Hyperplane::new(n.to_vec(), o).unwrap()).graph;
    }
    assert_eq!(g.cells().len(), 7);
    let interior: usize = g
        .layer(0)
        .into_iter()
        .filter(|&v| g.coords(v).iter().all(|&x| x > 1e-9 && x < 10.0 - 1e-9))
        .count();
    assert_eq!(interior, 3);
}

fn check_membership(
    g: &IncidenceGraph,
    oracle_points: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
    samples: usize,
) {
    match membership_violations(g, oracle_points, rng, samples) {
        Some(v) => assert_eq!(v, 0),
        None => panic!("facet count differs\n{}", g.dump()),
    }
}

#[test]
fn sweep_membership_matches_convex_hull_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for inst in 0..20 {
        let (g, vs) = if inst % 2 == 0 {
            let vs = random_positive_simplex(&mut rng);
            (simplex(&vs), vs)
        } else {
            let g = random_clipped_box(&mut rng);
            let vs: Vec<Vec<f64>> = g.vertex_coords().into_iter().map(|x| x.to_vec()).collect();
            (g, vs)
        };
        for k in 0..3 {
            let s = sweep_dir(&g, k).unwrap();
            assert_polytope_sane(&s);
            check_membership(&s, &sweep_points(&vs, k), &mut rng, 10_000);
        }
        let cube = cube_of_polytope(&g).unwrap();
        assert_polytope_sane(&cube);
        check_membership(&cube, &cube_points(&vs), &mut rng, 10_000);
    }
}

#[test]
fn sweep_facets_follow_top_facet_and_boundary_ridge_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let vs = random_positive_simplex(&mut rng);
        let k = rng.gen_range(0..3);
        let s = sweep_dir(&simplex(&vs), k).unwrap();
        let (swept, bad) = sweep_facet_rule_violations(&vs, k);
        assert!(bad.is_empty(), "{bad:?}");
        assert_eq!(facet_inequalities(&s).len(), swept.len());
    }
}

#[test]
fn lattice_dump_lists_layers() {
    let g = segment(&[0.0, 1.0], &[1.0, 0.0]);
    let text = g.dump();
    assert_eq!(text, "layer 0\n  0 dim=0 at (0.000000, 1.000000)\n  1 dim=0 at (1.000000, 0.000000)\nlayer 1\n  2 dim=1 sub=[0, 1]\n");
}
