use circlepat::graphcore::Color;
use circlepat::resistor_networks::*;
use circlepat::{Complex64, Error};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

fn origin() -> Complex64 {
    c(0.0, 0.0)
}

/// Gauss-Seidel relaxation of the Dirichlet problem, run to a fixed point.
fn relaxed_tutte(net: &Network, polygon: &[Complex64]) -> Vec<Complex64> {
    let mut f = vec![origin(); net.n_vertices()];
    for (i, &v) in net.boundary().iter().enumerate() {
        f[v] = polygon[i];
    }
    let mut nbrs = vec![Vec::new(); net.n_vertices()];
    for (e, &[u, v]) in net.edges().iter().enumerate() {
        nbrs[u].push((v, net.conductance(e)));
        nbrs[v].push((u, net.conductance(e)));
    }
    for _ in 0..20000 {
        let mut change: f64 = 0.0;
        for v in 0..net.n_vertices() {
            if net.is_boundary(v) {
                continue;
            }
            let total: f64 = nbrs[v].iter().map(|x| x.1).sum();
            let new = nbrs[v].iter().map(|&(w, cw)| f[w] * cw).sum::<Complex64>() / total;
            change = change.max((new - f[v]).norm());
            f[v] = new;
        }
        if change < 1e-15 {
            break;
        }
    }
    f
}

#[test]
fn triangle_with_center_embeds_at_barycenter() {
    let net = star_network([1.0; 6]).unwrap();
    let tri = [c(0.0, 0.0), c(3.0, 0.0), c(1.0, 2.0)];
    let fig = tutte_embed(&net, &tri, origin()).unwrap();
    assert!((fig.f[3] - c(4.0 / 3.0, 2.0 / 3.0)).norm() < 1e-14);
    assert!(fig.residuals.max() < 1e-12);
}

#[test]
fn square_with_center_embeds_at_center() {
    let edges = vec![[0, 1], [1, 2], [2, 3], [3, 0], [4, 0], [4, 1], [4, 2], [4, 3]];
    let faces = vec![vec![4, 0, 1], vec![4, 1, 2], vec![4, 2, 3], vec![4, 3, 0]];
    let net = Network::from_faces(5, edges, vec![1.0; 8], &faces, vec![0, 1, 2, 3]).unwrap();
    let sq = [c(0.0, 0.0), c(2.0, 0.0), c(2.0, 2.0), c(0.0, 2.0)];
    let fig = tutte_embed(&net, &sq, origin()).unwrap();
    assert!((fig.f[4] - c(1.0, 1.0)).norm() < 1e-14);
}

#[test]
fn random_networks_have_small_residuals_and_match_relaxation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let rows = rng.gen_range(3..=5);
        let cols = rng.gen_range(3..=6);
        let (net, _) = random_grid_network(rows, cols, 0.2, 5.0, &mut rng).unwrap();
        assert!(net.n_vertices() <= 30);
        let poly = regular_polygon(net.boundary().len());
        let fig = tutte_embed(&net, &poly, c(0.3, -0.2)).unwrap();
        let r = fig.residuals;
        assert!(r.harmonic < 1e-10 && r.dual_harmonic < 1e-10 && r.rotation < 1e-10, "{r:?}");
        let relaxed = relaxed_tutte(&net, &poly);
        for (a, b) in fig.f.iter().zip(&relaxed) {
            assert!((a - b).norm() < 1e-11);
        }
        // Primal and dual edges are perpendicular, lengths scale by c.
        for e in 0..net.n_edges() {
            let [u, v] = net.edge(e);
            let [l, rr] = net.sides(e);
            let df = fig.f[v] - fig.f[u];
            let dg = fig.g[l] - fig.g[rr];
            assert!((df * dg.conj()).re.abs() < 1e-12 * df.norm() * dg.norm());
            assert!((dg.norm() - net.conductance(e) * df.norm()).abs() < 1e-12 * dg.norm().max(1.0));
        }
    }
}

#[test]
fn dual_root_is_pinned() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (net, _) = random_grid_network(3, 4, 0.5, 2.0, &mut rng).unwrap();
    let poly = regular_polygon(net.boundary().len());
    let a = tutte_embed(&net, &poly, origin()).unwrap();
    let root = c(1.5, 2.5);
    let b = tutte_embed(&net, &poly, root).unwrap();
    assert_eq!(b.g[net.n_bounded_faces()], root);
    for (x, y) in a.g.iter().zip(&b.g) {
        assert!((x + root - y).norm() < 1e-12);
    }
}

#[test]
fn disconnected_interior_is_singular() {
    // Vertex 4 sits inside face 0-1-2 joined only to vertex 5, which is
    // joined only to it.
    let edges = vec![[0, 1], [1, 2], [2, 0], [4, 5]];
    let pos = [c(0.0, 0.0), c(4.0, 0.0), c(2.0, 3.0), c(9.0, 9.0), c(1.8, 1.0), c(2.2, 1.0)];
    let res = Network::from_positions(edges, vec![1.0; 4], &pos, vec![0, 1, 2]);
    // A dangling piece has the same face on both sides of its edge.
    assert!(matches!(res, Err(Error::InvalidMap(_))));
    let edges = vec![[0, 1], [1, 2], [2, 0], [3, 0], [3, 1], [3, 2], [4, 3]];
    let pos = [c(0.0, 0.0), c(4.0, 0.0), c(2.0, 3.0), c(2.0, 1.0), c(9.0, 9.0)];
    assert!(Network::from_positions(edges, vec![1.0; 7], &pos, vec![0, 1, 2]).is_err());
}

#[test]
fn bad_polygons_and_boundaries_are_rejected() {
    let net = star_network([1.0; 6]).unwrap();
    let clockwise = [c(0.0, 0.0), c(1.0, 2.0), c(3.0, 0.0)];
    assert!(matches!(tutte_embed(&net, &clockwise, origin()), Err(Error::Degenerate(_))));
    let edges = vec![[0, 1], [1, 2], [2, 0], [3, 0], [3, 1], [3, 2]];
    let faces = vec![vec![3, 0, 1], vec![3, 1, 2], vec![3, 2, 0]];
    let res = Network::from_faces(4, edges.clone(), vec![1.0; 6], &faces, vec![0, 2, 1]);
    assert!(matches!(res, Err(Error::InvalidMap(_))));
    let res = Network::from_faces(4, edges, vec![1.0, -1.0, 1.0, 1.0, 1.0, 1.0], &faces, vec![0, 1, 2]);
    assert!(matches!(res, Err(Error::InvalidWeight { edge: 1, .. })));
}

#[test]
fn temperley_graph_of_a_triangle() {
    let edges = vec![[0, 1], [1, 2], [2, 0]];
    let net = Network::from_faces(3, edges, vec![1.0, 2.0, 3.0], &[vec![0, 1, 2]], vec![0, 1, 2]).unwrap();
    let h = temperley_graph(&net).unwrap();
    let whites = (0..h.map.n_vertices()).filter(|&v| h.map.color(v) == Color::White).count();
    assert_eq!(whites, 3);
    assert_eq!(h.map.n_vertices() - whites, 3 + 2);
    assert_eq!(h.map.n_faces(), 6);
    assert!((0..h.map.n_faces()).all(|f| h.map.face_degree(f) == 4));
}

/// `c_e' / c_e` read off the corner face `v, e, d, e'` directly.
fn corner_ratio(h: &TemperleyGraph, net: &Network, f: usize) -> f64 {
    let halves = h.map.face_halves(f);
    let start = halves.iter().position(|&x| h.map.origin(x) < net.n_vertices()).unwrap();
    let e_first = h.map.dest(halves[start]);
    let e_last = h.map.origin(halves[(start + 3) % 4]);
    let edge_of = |w: usize| (0..net.n_edges()).find(|&e| h.white(e) == w).unwrap();
    net.conductance(edge_of(e_last)) / net.conductance(edge_of(e_first))
}

#[test]
fn temperley_face_weights_are_conductance_ratios() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let (net, _) = random_grid_network(3, 4, 0.3, 3.0, &mut rng).unwrap();
        for h in [temperley_graph(&net).unwrap(), temperley_graph_split(&net).unwrap()] {
            assert_eq!(h.map.n_faces(), h.corners.len());
            for f in 0..h.map.n_faces() {
                if h.map.face_degree(f) != 4 || h.map.is_outer(f) {
                    continue;
                }
                let want = corner_ratio(&h, &net, f);
                assert!((h.x.get(f) - want).abs() < 1e-14 * want, "{} vs {want}", h.x.get(f));
            }
        }
    }
}

fn permanent(m: &DMatrix<f64>) -> f64 {
    fn rec(m: &DMatrix<f64>, row: usize, used: &mut Vec<bool>) -> f64 {
        if row == m.nrows() {
            return 1.0;
        }
        let mut s = 0.0;
        for col in 0..m.ncols() {
            if !used[col] && m[(row, col)] != 0.0 {
                used[col] = true;
                s += m[(row, col)] * rec(m, row + 1, used);
                used[col] = false;
            }
        }
        s
    }
    rec(m, 0, &mut vec![false; m.ncols()])
}

#[test]
fn temperley_dimers_count_weighted_spanning_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..5 {
        let (net, _) = random_grid_network(3, 3, 0.3, 3.0, &mut rng).unwrap();
        let h = temperley_graph(&net).unwrap();
        // Remove network vertex 0 and the outer black vertex.
        let removed = [0, h.dual_vertex(net.n_bounded_faces())];
        let blacks: Vec<usize> = (0..h.map.n_vertices()).filter(|&v| h.map.color(v) == Color::Black && !removed.contains(&v)).collect();
        let whites: Vec<usize> = (0..h.map.n_vertices()).filter(|&v| h.map.color(v) == Color::White).collect();
        assert_eq!(blacks.len(), whites.len());
        let mut m = DMatrix::<f64>::zeros(whites.len(), blacks.len());
        for e in 0..h.map.n_edges() {
            let [w, b] = h.map.edge(e);
            if let (Some(i), Some(j)) = (whites.iter().position(|&x| x == w), blacks.iter().position(|&x| x == b)) {
                m[(i, j)] += h.weights[e];
            }
        }
        let dimers = permanent(&m);
        // Matrix-tree theorem on the reduced Laplacian.
        let n = net.n_vertices();
        let mut lap = DMatrix::<f64>::zeros(n, n);
        for (e, &[u, v]) in net.edges().iter().enumerate() {
            let ce = net.conductance(e);
            lap[(u, u)] += ce;
            lap[(v, v)] += ce;
            lap[(u, v)] -= ce;
            lap[(v, u)] -= ce;
        }
        let trees = lap.view((1, 1), (n - 1, n - 1)).into_owned().determinant();
        assert!((dimers - trees).abs() < 1e-9 * trees, "{dimers} vs {trees}");
    }
}

#[test]
fn temperley_pattern_is_a_circle_pattern_with_network_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let rows = rng.gen_range(3..=5);
        let cols = rng.gen_range(3..=5);
        let (net, _) = random_grid_network(rows, cols, 0.2, 5.0, &mut rng).unwrap();
        let poly = regular_polygon(net.boundary().len());
        let fig = tutte_embed(&net, &poly, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
        let p = temperley_pattern(&net, &fig).unwrap();
        let r = p.report;
        assert!(r.concyclicity < 1e-10 && r.midpoint < 1e-10 && r.right_angle < 1e-10, "{r:?}");
        assert!(r.weight_mismatch < 1e-9, "{r:?}");
        assert!(r.faces_compared > 0);
        // Independent check of the commuting square on every interior face.
        let single = temperley_graph(&net).unwrap();
        for (f, x) in p.induced_weights().iter().enumerate() {
            let Some(x) = x else { continue };
            let (v, d) = p.graph.corners[f];
            let cf = single.face_of_corner(v, d.min(net.n_bounded_faces())).unwrap();
            let want = corner_ratio(&single, &net, cf);
            assert!((x - want).abs() < 1e-9 * want);
        }
    }
}

#[test]
fn white_points_are_feet_of_perpendiculars() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let (net, _) = random_grid_network(4, 4, 0.5, 2.0, &mut rng).unwrap();
    let poly = regular_polygon(net.boundary().len());
    let fig = tutte_embed(&net, &poly, origin()).unwrap();
    let p = temperley_pattern(&net, &fig).unwrap();
    for e in 0..net.n_edges() {
        let [u, v] = net.edge(e);
        let [l, _] = net.sides(e);
        let z = p.points[p.graph.white(e)];
        let (a, b) = (fig.f[u], fig.f[v]);
        let t = ((fig.g[l] - a) * (b - a).conj()).re / (b - a).norm_sqr();
        let foot = a + (b - a) * t;
        assert!((z - foot).norm() < 1e-10 * fig.scale());
    }
}

fn random_triangle<R: Rng>(rng: &mut R) -> [Complex64; 3] {
    loop {
        let t: [Complex64; 3] = std::array::from_fn(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        let area = ((t[1] - t[0]) * (t[2] - t[0]).conj()).im;
        if area < -0.5 {
            return t;
        }
    }
}

#[test]
fn symmetric_star_gives_the_symmetric_point() {
    let net = star_network([1.0; 6]).unwrap();
    let fig = tutte_embed(&net, &regular_polygon(3), origin()).unwrap();
    let p = temperley_pattern(&net, &fig).unwrap();
    let r = star_triangle_check(&net, &fig, &p, 3).unwrap();
    let faces_center = (0..3).map(|d| fig.g[d]).sum::<Complex64>() / 3.0;
    assert!((r.miquel_point - faces_center).norm() < 1e-12);
    assert!((r.steiner_point - faces_center).norm() < 1e-12);
    assert!(r.passes(1e-10), "{r:?}");
}

#[test]
fn random_stars_four_miquel_moves_reach_the_steiner_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let cond: [f64; 6] = std::array::from_fn(|_| rng.gen_range(0.2..5.0));
        let net = star_network(cond).unwrap();
        let tri = random_triangle(&mut rng);
        let fig = tutte_embed(&net, &tri, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
        let p = temperley_pattern(&net, &fig).unwrap();
        let r = star_triangle_check(&net, &fig, &p, 3).unwrap();
        assert!(r.concurrency < 1e-9, "{r:?}");
        assert!(r.gap < 1e-8, "{r:?}");
        assert!(r.network_gap < 1e-8 && r.network_spread < 1e-9, "{r:?}");
        assert!(r.move_concyclicity < 1e-9 && r.central_move_gap < 1e-8, "{r:?}");
    }
}

#[test]
fn star_triangle_rejects_other_vertices() {
    let net = star_network([1.0; 6]).unwrap();
    let fig = tutte_embed(&net, &regular_polygon(3), origin()).unwrap();
    let p = temperley_pattern(&net, &fig).unwrap();
    assert!(matches!(star_triangle_check(&net, &fig, &p, 0), Err(Error::Degenerate(_))));
}

#[test]
fn series_and_parallel_reductions() {
    let (e, cc) = merge_parallel(&[[0, 1], [1, 2], [1, 0]], &[1.0, 2.0, 3.0]);
    assert_eq!(e, vec![[0, 1], [1, 2]]);
    assert_eq!(cc, vec![4.0, 2.0]);
    let (e, cc) = merge_series(&[[0, 1], [1, 2], [2, 3]], &[2.0, 3.0, 1.0], 1).unwrap();
    assert_eq!(e, vec![[0, 2], [2, 3]]);
    assert!((cc[0] - 1.2).abs() < 1e-15);
    assert!(merge_series(&[[0, 1], [1, 2], [1, 3]], &[1.0; 3], 1).is_none());
}

#[test]
fn spec_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let (net, _) = random_grid_network(3, 3, 0.5, 2.0, &mut rng).unwrap();
    let spec = net.to_spec();
    let back = Network::from_spec(&spec).unwrap();
    let poly = regular_polygon(net.boundary().len());
    let a = tutte_embed(&net, &poly, origin()).unwrap();
    let b = tutte_embed(&back, &poly, origin()).unwrap();
    for (x, y) in a.f.iter().zip(&b.f) {
        assert!((x - y).norm() < 1e-13);
    }
    let json = serde_json::to_string(&spec).unwrap();
    let again: NetworkSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(again, spec);
}
