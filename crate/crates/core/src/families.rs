//! Standard graphs used throughout: the 4-cycle, the cube graph, square-grid
//! patches, torus lattices and random planar quadrangulations.

use num_complex::Complex64;
use rand::Rng;

use crate::graphcore::{Color, CombMap};

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

fn checker(i: usize, j: usize) -> Color {
    if (i + j).is_multiple_of(2) {
        Color::White
    } else {
        Color::Black
    }
}

/// Vertices `w1 = 0, b1 = 1, w2 = 2, b2 = 3` counterclockwise around one face.
pub fn four_cycle() -> CombMap {
    let colors = vec![Color::White, Color::Black, Color::White, Color::Black];
    CombMap::from_vertex_faces(colors, &[vec![0, 1, 2, 3]]).expect("4-cycle")
}

/// Cube graph: outer square `0,1,2,3` (`w1,b1,w2,b2`), inner square
/// `4,5,6,7`, spokes `i -- i + 4`. Face 4 of the returned map is the inner
/// square; faces 0..4 are the trapezoids.
pub fn cube() -> CombMap {
    let colors = vec![
        Color::White,
        Color::Black,
        Color::White,
        Color::Black,
        Color::Black,
        Color::White,
        Color::Black,
        Color::White,
    ];
    let faces = vec![
        vec![0, 1, 5, 4],
        vec![1, 2, 6, 5],
        vec![2, 3, 7, 6],
        vec![3, 0, 4, 7],
        vec![4, 5, 6, 7],
    ];
    CombMap::from_vertex_faces(colors, &faces).expect("cube graph")
}

/// Planar vertex grid with `rows x cols` vertices; vertex `(r, c)` has id
/// `r * cols + c` and is white when `r + c` is even.
pub fn grid_patch(rows: usize, cols: usize) -> CombMap {
    let colors = (0..rows * cols).map(|k| checker(k / cols, k % cols)).collect();
    let mut faces = Vec::new();
    for r in 0..rows - 1 {
        for col in 0..cols - 1 {
            let v = r * cols + col;
            faces.push(vec![v, v + 1, v + cols + 1, v + cols]);
        }
    }
    CombMap::from_vertex_faces(colors, &faces).expect("grid patch")
}

/// Square grid on an `m x n` torus (`m`, `n` even); vertex `(i, j)` has id
/// `i + m * j`. Edge `2k` is horizontal and edge `2k + 1` vertical at vertex
/// `k`. Face `(i, j)` has lower-left corner `(i, j)`.
pub fn square_torus(m: usize, n: usize) -> CombMap {
    assert!(m.is_multiple_of(2) && n.is_multiple_of(2) && m > 0 && n > 0, "square torus needs even sides");
    let id = |i: usize, j: usize| (i % m) + m * (j % n);
    let colors: Vec<Color> = (0..m * n).map(|k| checker(k % m, k / m)).collect();
    let mut edges = Vec::new();
    let mut offsets = Vec::new();
    for j in 0..n {
        for i in 0..m {
            let v = id(i, j);
            for (di, dj) in [(1usize, 0usize), (0, 1)] {
                let u = id(i + di, j + dj);
                let wrap = [(i + di == m) as i32, (j + dj == n) as i32];
                if colors[v] == Color::White {
                    edges.push([v, u]);
                    offsets.push(wrap);
                } else {
                    edges.push([u, v]);
                    offsets.push([-wrap[0], -wrap[1]]);
                }
            }
        }
    }
    let pos: Vec<Complex64> = (0..m * n).map(|k| c((k % m) as f64, (k / m) as f64)).collect();
    CombMap::from_periodic_positions(colors, edges, offsets, &pos, [c(m as f64, 0.0), c(0.0, n as f64)])
        .expect("square torus")
}

/// Smallest square-lattice fundamental domain: one white, one black vertex
/// and four edges, periods `(1, 1)` and `(1, -1)`.
pub fn square_torus_unit() -> CombMap {
    let colors = vec![Color::White, Color::Black];
    let edges = vec![[0, 1]; 4];
    let offsets = vec![[0, 0], [-1, -1], [0, -1], [-1, 0]];
    let pos = [c(0.0, 0.0), c(1.0, 0.0)];
    CombMap::from_periodic_positions(colors, edges, offsets, &pos, [c(1.0, 1.0), c(1.0, -1.0)])
        .expect("unit square torus")
}

/// Honeycomb on an `m x n` torus. Cell `(i, j)` holds white `2(i + m j)`
/// and black `2(i + m j) + 1`; each white vertex has three edges.
pub fn hex_torus(m: usize, n: usize) -> CombMap {
    let p1 = c(3f64.sqrt(), 0.0);
    let p2 = c(3f64.sqrt() / 2.0, 1.5);
    let cell = |i: usize, j: usize| i + m * j;
    let mut colors = Vec::new();
    let mut pos = Vec::new();
    for j in 0..n {
        for i in 0..m {
            let w = p1 * i as f64 + p2 * j as f64;
            colors.push(Color::White);
            pos.push(w);
            colors.push(Color::Black);
            pos.push(w + c(0.0, 1.0));
        }
    }
    let mut edges = Vec::new();
    let mut offsets = Vec::new();
    for j in 0..n as i64 {
        for i in 0..m as i64 {
            let w = 2 * cell(i as usize, j as usize);
            for (di, dj) in [(0i64, 0i64), (0, -1), (1, -1)] {
                let (bi, bj) = (i + di, j + dj);
                let (qi, ri) = (bi.div_euclid(m as i64), bi.rem_euclid(m as i64));
                let (qj, rj) = (bj.div_euclid(n as i64), bj.rem_euclid(n as i64));
                edges.push([w, 2 * cell(ri as usize, rj as usize) + 1]);
                offsets.push([qi as i32, qj as i32]);
            }
        }
    }
    let periods = [p1 * m as f64, p2 * n as f64];
    CombMap::from_periodic_positions(colors, edges, offsets, &pos, periods).expect("hex torus")
}

/// Random planar quadrangulation grown from the 4-cycle by two local moves:
/// inserting a degree-2 vertex across a face, and expanding a face into a
/// cube-like ring of five faces. Returns the map and the straight-line
/// positions used to build it.
pub fn random_quadrangulation<R: Rng>(max_vertices: usize, rng: &mut R) -> (CombMap, Vec<Complex64>) {
    let mut colors = vec![Color::White, Color::Black, Color::White, Color::Black];
    let mut pos = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
    let mut faces: Vec<[usize; 4]> = vec![[0, 1, 2, 3]];
    loop {
        let room = max_vertices.saturating_sub(colors.len());
        if room == 0 {
            break;
        }
        let fi = rng.gen_range(0..faces.len());
        let f = faces[fi];
        let centroid = f.iter().map(|&v| pos[v]).sum::<Complex64>() / 4.0;
        if room >= 4 && rng.gen_bool(0.5) {
            let base = colors.len();
            for k in 0..4 {
                colors.push(colors[f[k]].other());
                pos.push(centroid + (pos[f[k]] - centroid) * 0.5);
            }
            let inner = [base, base + 1, base + 2, base + 3];
            faces.swap_remove(fi);
            for k in 0..4 {
                let l = (k + 1) % 4;
                faces.push([f[k], f[l], inner[l], inner[k]]);
            }
            faces.push(inner);
        } else {
            let x = colors.len();
            let s = rng.gen_range(0..2);
            colors.push(colors[f[s]].other());
            // pull the new vertex toward one of the remaining corners so the
            // two new faces keep positive area
            let toward = f[s + 1];
            pos.push(centroid * 0.6 + pos[toward] * 0.4);
            let (a, b, cc, d) = (f[s], f[s + 1], f[s + 2], f[(s + 3) % 4]);
            faces[fi] = [a, b, cc, x];
            faces.push([a, x, cc, d]);
        }
    }
    let cycles: Vec<Vec<usize>> = faces.iter().map(|f| f.to_vec()).collect();
    let map = CombMap::from_vertex_faces(colors, &cycles).expect("quadrangulation");
    (map, pos)
}

/// Random balanced quadrangulation: starting from the 4-cycle, `rings`
/// randomly chosen faces are each expanded into a ring of five faces.
pub fn random_ring_quadrangulation<R: Rng>(rings: usize, rng: &mut R) -> CombMap {
    let mut colors = vec![Color::White, Color::Black, Color::White, Color::Black];
    let mut faces: Vec<[usize; 4]> = vec![[0, 1, 2, 3]];
    for _ in 0..rings {
        let fi = rng.gen_range(0..faces.len());
        let f = faces.swap_remove(fi);
        let base = colors.len();
        for k in 0..4 {
            colors.push(colors[f[k]].other());
        }
        let inner = [base, base + 1, base + 2, base + 3];
        for k in 0..4 {
            let l = (k + 1) % 4;
            faces.push([f[k], f[l], inner[l], inner[k]]);
        }
        faces.push(inner);
    }
    let cycles: Vec<Vec<usize>> = faces.iter().map(|f| f.to_vec()).collect();
    CombMap::from_vertex_faces(colors, &cycles).expect("ring quadrangulation")
}

/// Removes edge `e`, merging its two bounded side faces. Returns `None` if
/// either side is the outer face or both sides are the same face.
pub fn delete_edge(map: &CombMap, e: usize) -> Option<CombMap> {
    let (h, t) = (2 * e, 2 * e + 1);
    if map.face(h) == map.face(t) || map.is_outer(map.face(h)) || map.is_outer(map.face(t)) {
        return None;
    }
    let mut spec = map.to_spec();
    let fa = map.face(h);
    let fb = map.face(t);
    // merged cycle as half-edges: walk the union skipping h and t
    let mut merged = Vec::new();
    let mut g = map.next(h);
    let start = g;
    loop {
        if g == h || g == t {
            g = map.next(g ^ 1);
        } else {
            merged.push(g);
            g = map.next(g);
        }
        if g == start {
            break;
        }
        if merged.len() > map.n_halves() {
            return None;
        }
    }
    let relabel = |old: usize| if old > e { old - 1 } else { old };
    let first = merged.iter().position(|h| h % 2 == 0)?;
    let merged_edges: Vec<usize> = (0..merged.len()).map(|i| relabel(merged[(first + i) % merged.len()] / 2)).collect();
    let bounded: Vec<usize> = map.bounded_faces().collect();
    let mut faces = Vec::new();
    for (k, f) in bounded.iter().enumerate() {
        if *f == fa {
            faces.push(merged_edges.clone());
        } else if *f == fb {
            continue;
        } else {
            faces.push(spec.faces[k].iter().map(|&x| relabel(x)).collect());
        }
    }
    spec.edges.remove(e);
    spec.faces = faces;
    spec.outer = spec.outer.map(|o| o.into_iter().map(relabel).collect());
    CombMap::from_spec(&spec).ok()
}

/// Random bipartite planar graph with as many white as black vertices: a
/// random quadrangulation with some edges between bounded faces removed.
pub fn random_planar_bipartite<R: Rng>(max_vertices: usize, rng: &mut R) -> CombMap {
    let mut map = loop {
        let (m, _) = random_quadrangulation(max_vertices, rng);
        if m.whites().len() == m.blacks().len() {
            break m;
        }
    };
    let deletions = rng.gen_range(0..=map.n_bounded_faces() / 2);
    for _ in 0..deletions {
        let e = rng.gen_range(0..map.n_edges());
        if let Some(m) = delete_edge(&map, e) {
            map = m;
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::Surface;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cube_counts() {
        let m = cube();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (8, 12, 6));
        assert_eq!(m.face_degree(m.outer_face().unwrap()), 4);
        assert_eq!(m.face_degree(4), 4);
    }

    #[test]
    fn torus_counts() {
        let m = square_torus(2, 2);
        assert_eq!(m.surface(), Surface::Torus);
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (4, 8, 4));
        let u = square_torus_unit();
        assert_eq!((u.n_vertices(), u.n_edges(), u.n_faces()), (2, 4, 2));
        let h = hex_torus(1, 1);
        assert_eq!((h.n_vertices(), h.n_edges(), h.n_faces()), (2, 3, 1));
        assert_eq!(h.face_degree(0), 6);
    }

    #[test]
    fn quadrangulations_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (m, _) = random_quadrangulation(20, &mut rng);
            m.validate().unwrap();
            assert!(m.bounded_faces().all(|f| m.face_degree(f) == 4));
        }
    }

    #[test]
    fn deletion_merges_faces() {
        let m = cube();
        let e = (0..m.n_edges()).find(|&e| !m.is_boundary_edge(e)).unwrap();
        let d = delete_edge(&m, e).unwrap();
        assert_eq!(d.n_faces(), m.n_faces() - 1);
        assert!(d.bounded_faces().any(|f| d.face_degree(f) == 6));
    }
}
