use std::f64::consts::PI;

use circlepat::ising_sembed::*;
use circlepat::kasteleyn::{assign_signs, face_weights_from_edges, partition_function};
use circlepat::plane_graph::PlaneGraph;
use circlepat::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

/// Spin sum written out directly, independent of the library.
fn ising_z(n: usize, edges: &[[usize; 2]], x: &[f64]) -> f64 {
    let mut z = 0.0;
    for mask in 0..1u32 << n {
        let s = |v: usize| if mask >> v & 1 == 1 { -1.0 } else { 1.0 };
        z += edges.iter().zip(x).map(|(&[u, v], &xe)| 1.0 + xe * s(u) * s(v)).product::<f64>();
    }
    z
}

fn small_graphs() -> Vec<(Vec<[usize; 2]>, Vec<Complex64>)> {
    vec![
        (vec![[0, 1]], vec![c(0.0, 0.0), c(1.0, 0.0)]),
        (vec![[0, 1], [1, 2]], vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)]),
        (vec![[0, 1], [1, 2], [2, 0]], vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]),
        (vec![[0, 1], [1, 2], [2, 3]], vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(2.0, 1.0)]),
        (vec![[0, 1], [1, 2], [1, 3]], vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(1.0, 1.0)]),
    ]
}

#[test]
fn theta_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let x: f64 = rng.gen_range(0.01..0.99);
        let g = PlaneGraph::from_positions(vec![[0, 1]], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let ising = IsingInstance::new(g, vec![x]).unwrap();
        assert!(((ising.theta(0) / 2.0).tan() - x).abs() < 1e-12);
    }
}

#[test]
fn rejects_parameters_outside_unit_interval() {
    for x in [0.0, 1.0, -0.2, f64::NAN] {
        let g = PlaneGraph::from_positions(vec![[0, 1]], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(IsingInstance::new(g, vec![x]), Err(Error::InvalidWeight { .. })));
    }
}

#[test]
fn single_edge_quad_weights() {
    let x = (PI / 8.0).tan();
    let g = PlaneGraph::from_positions(vec![[0, 1]], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let d = dubedat_graph(&IsingInstance::new(g, vec![x]).unwrap()).unwrap();
    let h = 0.5f64.sqrt();
    let mut quad: Vec<f64> = d.weights[..4].to_vec();
    quad.sort_by(f64::total_cmp);
    for (w, want) in quad.iter().zip([h, h, h, h]) {
        assert!((w - want).abs() < 1e-15);
    }
    assert!(d.weights[4..].iter().all(|&w| w == 1.0));
    // 4 corners, 4 sides, 2 connectors; quad, two digons and the outer face
    assert_eq!(d.map.n_vertices(), 4);
    assert_eq!(d.map.n_edges(), 6);
    assert_eq!(d.map.n_faces(), 4);
    assert_eq!(d.map.face_degree(d.vertex_face[0]), 2);
    assert_eq!(d.map.face_degree(d.face_face[0]), 4);
}

#[test]
fn square_cell_face_degrees() {
    let (ising, _) = isoradial_square_lattice(3, 3, PI / 2.0).unwrap();
    let d = dubedat_graph(&ising).unwrap();
    let g = ising.graph();
    assert_eq!(d.map.n_faces(), g.n_vertices() + g.n_edges() + g.n_faces());
    for v in 0..g.n_vertices() {
        assert_eq!(d.map.face_degree(d.vertex_face[v]), 2 * g.incident(v).len());
    }
    // the centre vertex has degree 4
    assert_eq!(d.map.face_degree(d.vertex_face[4]), 8);
    for f in 0..g.n_bounded_faces() {
        assert_eq!(d.map.face_degree(d.face_face[f]), 8);
    }
    for e in 0..g.n_edges() {
        assert_eq!(d.map.face_degree(d.edge_face[e]), 4);
    }
}

#[test]
fn single_edge_partition_function() {
    // matchings: two connectors or vertex sides, (1 + cos)^2, or both face
    // sides, sin^2; together 2 (1 + cos theta) = 4 / (1 + x^2)
    for x in [0.1, 0.4, 0.9] {
        let g = PlaneGraph::from_positions(vec![[0, 1]], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let d = dubedat_graph(&IsingInstance::new(g, vec![x]).unwrap()).unwrap();
        let z = d.partition_function_brute();
        assert!((z - 4.0 / (1.0 + x * x)).abs() < 1e-12);
    }
}

#[test]
fn dimer_partition_function_is_squared_ising() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (edges, pos) in small_graphs() {
        for _ in 0..20 {
            let x: Vec<f64> = edges.iter().map(|_| rng.gen_range(0.05..0.95)).collect();
            let g = PlaneGraph::from_positions(edges.clone(), &pos).unwrap();
            let ising = IsingInstance::new(g, x.clone()).unwrap();
            let d = dubedat_graph(&ising).unwrap();
            let zd = d.partition_function_brute();
            let k = assign_signs(&d.map, &d.weights).unwrap();
            let zk = partition_function(&d.map, &k).unwrap();
            assert!((zd - zk).abs() < 1e-12 * zd);
            let zi = ising_z(pos.len(), &edges, &x);
            let local: f64 = x.iter().map(|xe| 1.0 + xe * xe).product::<f64>() * 2f64.powi(pos.len() as i32);
            assert!((zd * local - zi * zi).abs() < 1e-12 * zi * zi, "{zd} {zi}");
        }
    }
}

#[test]
fn critical_square_lattice_passes_all_checks() {
    let (ising, s) = isoradial_square_lattice(5, 5, PI / 2.0).unwrap();
    for e in 0..ising.graph().n_edges() {
        assert!((ising.x(e) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }
    let r = validate_sembedding(&s, &ising).unwrap();
    assert!(r.passes(1e-9), "{r:?}");
    assert_eq!(r.edges_checked, ising.graph().n_edges());
    assert!(r.degenerate.is_empty());
}

#[test]
fn isoradial_lattices_pass_all_checks() {
    for phi in [0.4, 1.0, 2.0, 2.8] {
        let (ising, s) = isoradial_square_lattice(4, 6, phi).unwrap();
        let r = validate_sembedding(&s, &ising).unwrap();
        assert!(r.passes(1e-9), "{phi}: {r:?}");
        assert!(r.bisector < 1e-12);
    }
}

#[test]
fn perturbed_incenter_is_reported() {
    let (ising, mut s) = isoradial_square_lattice(4, 4, PI / 2.0).unwrap();
    s.edges[5] += c(1e-3, 0.0);
    let r = validate_sembedding(&s, &ising).unwrap();
    assert!(!r.passes(1e-9));
    let m = r.max_residual();
    assert!(m > 1e-4 && m < 1e-2, "{r:?}");
    assert!(matches!(sembedding_to_centers(&s, &ising, 1e-9), Err(Error::Incidence(_))));
}

#[test]
fn centers_reproduce_dubedat_face_weights() {
    for phi in [PI / 2.0, 1.2] {
        let (ising, s) = isoradial_square_lattice(4, 5, phi).unwrap();
        let out = sembedding_to_centers(&s, &ising, 1e-9).unwrap();
        let g = ising.graph();
        // interior vertices, all bounded faces, all edges
        assert_eq!(out.compared, [6, g.n_bounded_faces(), g.n_edges()]);
        assert!(out.weight_mismatch < 1e-8, "{}", out.weight_mismatch);
        assert!(out.angle_defect < 1e-9);
        let comb = face_weights_from_edges(&out.dimer.map, &out.dimer.weights).unwrap();
        for e in 0..g.n_edges() {
            let t = ising.theta(e);
            let want = (t.cos() / t.sin()).powi(2);
            assert!((comb.get(out.dimer.edge_face[e]) - want).abs() < 1e-12 * want);
        }
    }
}

#[test]
fn critical_centers_form_square_grid() {
    let (ising, s) = isoradial_square_lattice(3, 4, PI / 2.0).unwrap();
    let out = sembedding_to_centers(&s, &ising, 1e-9).unwrap();
    let step = 0.5f64.sqrt() / 2.0;
    for z in out.centers.iter().flatten() {
        for v in [z.re / step, z.im / step] {
            assert!((v - v.round()).abs() < 1e-12);
        }
    }
    // rhombi are squares, so every edge face has weight cot^2(pi/4) = 1
    for e in 0..ising.graph().n_edges() {
        assert!((out.edge_face_weight(e).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_edge_face_weight_is_cot_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let theta = rng.gen_range(0.05..1.5);
        let (ising, s) = single_edge(theta).unwrap();
        let out = sembedding_to_centers(&s, &ising, 1e-9).unwrap();
        let want = (theta.cos() / theta.sin()).powi(2);
        assert!((out.edge_face_weight(0).unwrap() - want).abs() < 1e-12 * want.max(1.0));
        assert!((out.combinatorial[out.dimer.edge_face[0]] - want).abs() < 1e-12 * want.max(1.0));
    }
}

#[test]
fn degenerate_edge_is_flagged() {
    let x = (PI / 4.0 - 1e-8).tan();
    let g = PlaneGraph::from_positions(vec![[0, 1]], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let ising = IsingInstance::new(g, vec![x]).unwrap();
    assert_eq!(ising.degenerate_edges(), vec![0]);
    let d = dubedat_graph(&ising).unwrap();
    let w = face_weights_from_edges(&d.map, &d.weights).unwrap();
    assert!(w.get(d.edge_face[0]) < 1e-12);
}

#[test]
fn tree_edges_without_outer_points_are_skipped() {
    let (ising, mut s) = single_edge(0.6).unwrap();
    s.outer_sides.clear();
    let r = validate_sembedding(&s, &ising).unwrap();
    assert_eq!(r.edges_checked, 0);
    assert_eq!(r.edges_skipped, vec![0]);
}

#[test]
fn spec_round_trip() {
    let (ising, s) = isoradial_square_lattice(3, 3, 1.0).unwrap();
    let text = serde_json::to_string(&ising.to_spec()).unwrap();
    let back = IsingInstance::from_spec(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.xs(), ising.xs());
    assert_eq!(back.graph().edges(), ising.graph().edges());
    let r = validate_sembedding(&s, &back).unwrap();
    assert!(r.passes(1e-9));
    let s2: SEmbedding = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(s2, s);
}
