use circlepat::families;
use circlepat::kasteleyn::{
    assign_signs, enumerate_matchings, face_weights_from_edges, face_weights_from_matrix, partition_function,
    KasteleynMatrix, SignConvention,
};
use circlepat::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn small_partition_functions() {
    for (map, z) in [(families::four_cycle(), 2.0), (families::grid_patch(2, 3), 3.0), (families::cube(), 9.0)] {
        let w = vec![1.0; map.n_edges()];
        let k = assign_signs(&map, &w).unwrap();
        assert!((partition_function(&map, &k).unwrap() - z).abs() < 1e-10);
        let count = enumerate_matchings(&map, &w).len();
        assert_eq!(count as f64, z);
    }
}

#[test]
fn determinant_matches_enumeration_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let map = families::random_planar_bipartite(14, &mut rng);
        let w: Vec<f64> = (0..map.n_edges()).map(|_| rng.gen_range(0.2..3.0)).collect();
        let k = assign_signs(&map, &w).unwrap();
        let z = partition_function(&map, &k).unwrap();
        let oracle: f64 = enumerate_matchings(&map, &w).iter().map(|m| m.weight).sum();
        assert!((z - oracle).abs() <= 1e-10 * oracle.max(1.0), "{z} vs {oracle}");
    }
}

#[test]
fn matchings_are_distinct_and_perfect() {
    let map = families::cube();
    let ms = enumerate_matchings(&map, &vec![1.0; map.n_edges()]);
    for m in &ms {
        let mut covered: Vec<usize> = m.edges.iter().flat_map(|&e| map.edge(e)).collect();
        covered.sort();
        assert_eq!(covered, (0..8).collect::<Vec<_>>());
    }
    let mut sets: Vec<Vec<usize>> = ms.iter().map(|m| { let mut e = m.edges.clone(); e.sort(); e }).collect();
    sets.sort();
    sets.dedup();
    assert_eq!(sets.len(), 9);
}

#[test]
fn forced_edge_is_in_every_matching() {
    use circlepat::graphcore::{Color, CombMap};
    // 4-cycle 0-1-2-3 with a pendant path 1-4-5; vertex 5 has degree 1
    let colors = vec![Color::White, Color::Black, Color::White, Color::Black, Color::White, Color::Black];
    let edges = vec![[0, 1], [2, 1], [2, 3], [0, 3], [4, 1], [4, 5]];
    let pos: Vec<Complex64> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (2.0, 0.0), (3.0, 0.0)]
        .iter()
        .map(|&(x, y)| Complex64::new(x, y))
        .collect();
    let map = CombMap::from_planar_positions(colors, edges, &pos).unwrap();
    let ms = enumerate_matchings(&map, &vec![1.0; map.n_edges()]);
    assert_eq!(ms.len(), 2);
    assert!(ms.iter().all(|m| m.edges.contains(&5)));
    let k = assign_signs(&map, &vec![1.0; map.n_edges()]).unwrap();
    assert!((partition_function(&map, &k).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn cube_face_condition_holds() {
    let map = families::cube();
    let k = assign_signs(&map, &[1.0; 12]).unwrap();
    let x = face_weights_from_matrix(&map, &k).unwrap();
    for f in map.bounded_faces() {
        assert!((x.get(f) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn grid_face_condition_holds() {
    let map = families::grid_patch(4, 4);
    let k = assign_signs(&map, &vec![1.0; map.n_edges()]).unwrap();
    assert!(face_weights_from_matrix(&map, &k).is_ok());
}

#[test]
fn torus_signs_satisfy_every_face() {
    for map in [families::square_torus(4, 4), families::hex_torus(3, 3), families::square_torus_unit()] {
        let k = assign_signs(&map, &vec![1.0; map.n_edges()]).unwrap();
        let x = face_weights_from_matrix(&map, &k).unwrap();
        assert!(x.0.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }
}

#[test]
fn sign_choice_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let map = families::random_planar_bipartite(14, &mut rng);
    let w: Vec<f64> = (0..map.n_edges()).map(|_| rng.gen_range(0.5..2.0)).collect();
    let k1 = assign_signs(&map, &w).unwrap();
    // another admissible choice: flip every edge at a random set of vertices
    let flip: Vec<f64> = (0..map.n_vertices()).map(|_| if rng.gen_bool(0.5) { -1.0 } else { 1.0 }).collect();
    let entries = map
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &[a, b])| k1.entries[e] * flip[a] * flip[b])
        .collect();
    let k2 = KasteleynMatrix::from_entries(&map, entries, SignConvention::Real);
    let z1 = partition_function(&map, &k1).unwrap();
    let z2 = partition_function(&map, &k2).unwrap();
    assert!((z1 - z2).abs() < 1e-10 * z1);
    assert_eq!(face_weights_from_matrix(&map, &k1).unwrap().0.len(), face_weights_from_matrix(&map, &k2).unwrap().0.len());
    for f in map.bounded_faces() {
        let a = face_weights_from_matrix(&map, &k1).unwrap().get(f);
        let b = face_weights_from_matrix(&map, &k2).unwrap().get(f);
        assert!((a - b).abs() < 1e-12 * a);
    }
}

#[test]
fn non_kasteleyn_matrix_is_rejected() {
    let map = families::four_cycle();
    let k = KasteleynMatrix::from_entries(&map, vec![Complex64::new(1.0, 0.0); 4], SignConvention::Real);
    assert!(face_weights_from_matrix(&map, &k).is_err());
}

#[test]
fn cube_with_four_thirds_face() {
    let map = families::cube();
    let mut x = vec![1.0; map.n_faces()];
    x[4] = 4.0 / 3.0;
    let w = circlepat::kasteleyn::edge_weights_from_faces(&map, &x).unwrap();
    let k = assign_signs(&map, &w).unwrap();
    let back = face_weights_from_matrix(&map, &k).unwrap();
    assert!((back.get(4) - 4.0 / 3.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn gauge_leaves_face_weights_unchanged(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (map, _) = families::random_quadrangulation(12, &mut rng);
        let w: Vec<f64> = (0..map.n_edges()).map(|_| rng.gen_range(0.2..5.0)).collect();
        let k = assign_signs(&map, &w).unwrap();
        let x0 = face_weights_from_edges(&map, &w).unwrap();
        let gw: Vec<Complex64> = map.whites().iter().map(|_| Complex64::from_polar(rng.gen_range(0.3..3.0), rng.gen_range(-3.0..3.0))).collect();
        let gb: Vec<Complex64> = map.blacks().iter().map(|_| Complex64::from_polar(rng.gen_range(0.3..3.0), rng.gen_range(-3.0..3.0))).collect();
        let kg = k.gauge(&map, &gw, &gb);
        let x1 = face_weights_from_matrix(&map, &kg).unwrap();
        for f in map.bounded_faces() {
            prop_assert!((x0.get(f) - x1.get(f)).abs() <= 1e-12 * x0.get(f).max(1.0) * 10.0);
        }
        // positive real gauge on edge weights
        let gv: Vec<f64> = (0..map.n_vertices()).map(|_| rng.gen_range(0.3..3.0)).collect();
        let w2: Vec<f64> = map.edges().iter().enumerate().map(|(e, &[a, b])| w[e] * gv[a] * gv[b]).collect();
        let x2 = face_weights_from_edges(&map, &w2).unwrap();
        for f in map.bounded_faces() {
            prop_assert!((x0.get(f) - x2.get(f)).abs() <= 1e-12 * x0.get(f).max(1.0));
        }
    }
}
