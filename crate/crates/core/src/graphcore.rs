//! Half-edge combinatorial maps for bipartite graphs on the disk or the torus.
//!
//! Every edge `e` joins a white vertex to a black vertex and owns two
//! half-edges: `2e` runs white to black, `2e + 1` runs black to white, so the
//! twin of `h` is `h ^ 1`. Faces are orbits of `next`, which walks the
//! boundary of the face lying to the left of a half-edge counterclockwise.
//! Rotation around a vertex follows from `next` and `twin`:
//! `rot_next(h) = twin(prev(h))` is the next outgoing half-edge
//! counterclockwise around `origin(h)`.
//!
//! Torus maps carry an integer offset per edge: the black endpoint of edge
//! `e` sits in the fundamental domain `c + offset[e]` when the white endpoint
//! sits in `c`. These offsets are the homology labels used by the spectral
//! code.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-edge index.
pub type Half = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Disk,
    Torus,
}

/// Plain description of a map, as read from or written to JSON.
///
/// `faces` are cycles of edge ids with the face on the left; the first edge
/// of each cycle is traversed from its white to its black endpoint. On the
/// disk only bounded faces are listed and the outer face is derived, unless
/// `outer` gives it explicitly (needed when a vertex touches the outer face
/// more than once).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub surface: Surface,
    pub colors: Vec<Color>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology: Option<Vec<[i32; 2]>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombMap {
    surface: Surface,
    colors: Vec<Color>,
    edges: Vec<[usize; 2]>,
    homology: Vec<[i32; 2]>,
    next: Vec<Half>,
    prev: Vec<Half>,
    face_of: Vec<usize>,
    faces: Vec<Vec<Half>>,
    outer: Option<usize>,
    vertex_half: Vec<Half>,
    color_index: Vec<usize>,
    whites: Vec<usize>,
    blacks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigzagLoop {
    pub halves: Vec<Half>,
}

impl ZigzagLoop {
    pub fn edges(&self) -> Vec<usize> {
        self.halves.iter().map(|h| h / 2).collect()
    }

    pub fn len(&self) -> usize {
        self.halves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halves.is_empty()
    }
}

impl CombMap {
    /// Builds a map from face cycles of edge ids (see [`MapSpec`]).
    pub fn from_spec(spec: &MapSpec) -> Result<Self> {
        let ne = spec.edges.len();
        check_edges(&spec.colors, &spec.edges)?;
        let mut next = vec![usize::MAX; 2 * ne];
        let mut used = vec![false; 2 * ne];
        let mut add_face = |fi: usize, cyc: &[usize], next: &mut Vec<Half>| -> Result<Half> {
            if cyc.is_empty() || cyc.len() % 2 == 1 {
                return Err(Error::NonBipartiteFace { face: fi });
            }
            let halves: Vec<Half> = cyc
                .iter()
                .enumerate()
                .map(|(i, &e)| if e >= ne { usize::MAX } else { 2 * e + (i % 2) })
                .collect();
            if halves.contains(&usize::MAX) {
                return Err(Error::InvalidMap(format!("face {fi} references a missing edge")));
            }
            for i in 0..halves.len() {
                let h = halves[i];
                let g = halves[(i + 1) % halves.len()];
                if dest_of(&spec.edges, h) != origin_of(&spec.edges, g) {
                    return Err(Error::InvalidMap(format!("face {fi} is not a closed walk")));
                }
                if used[h] {
                    return Err(Error::EdgeMultiplicity { edge: h / 2, count: 3 });
                }
                used[h] = true;
                next[h] = g;
            }
            Ok(halves[0])
        };
        let mut firsts = Vec::new();
        for (fi, cyc) in spec.faces.iter().enumerate() {
            firsts.push(add_face(fi, cyc, &mut next)?);
        }
        let mut outer_half = None;
        match (spec.surface, &spec.outer) {
            (Surface::Torus, Some(_)) => {
                return Err(Error::InvalidMap("torus maps have no outer face".into()))
            }
            (Surface::Disk, Some(cyc)) => {
                outer_half = Some(add_face(spec.faces.len(), cyc, &mut next)?);
            }
            (Surface::Disk, None) => {
                outer_half = derive_outer(&spec.edges, spec.colors.len(), &used, &mut next)?;
            }
            (Surface::Torus, None) => {}
        }
        if let Some(h) = next.iter().position(|&n| n == usize::MAX) {
            return Err(Error::EdgeMultiplicity { edge: h / 2, count: 1 });
        }
        let homology = match (&spec.homology, spec.surface) {
            (Some(hl), _) => {
                if hl.len() != ne {
                    return Err(Error::InvalidMap("homology label count differs from edge count".into()));
                }
                hl.clone()
            }
            (None, Surface::Disk) => vec![[0, 0]; ne],
            (None, Surface::Torus) => {
                return Err(Error::InvalidMap("torus maps need homology labels".into()))
            }
        };
        let mut order: Vec<Half> = firsts;
        if let Some(h) = outer_half {
            order.push(h);
        }
        Self::assemble(spec.surface, spec.colors.clone(), spec.edges.clone(), homology, next, &order, outer_half)
    }

    /// Builds a map from a counterclockwise rotation system (outgoing
    /// half-edges around each vertex). On the disk `outer_half` must lie on
    /// the outer face.
    pub fn from_rotation(
        surface: Surface,
        colors: Vec<Color>,
        edges: Vec<[usize; 2]>,
        rotation: &[Vec<Half>],
        homology: Option<Vec<[i32; 2]>>,
        outer_half: Option<Half>,
    ) -> Result<Self> {
        check_edges(&colors, &edges)?;
        let ne = edges.len();
        if rotation.len() != colors.len() {
            return Err(Error::InvalidMap("rotation system size differs from vertex count".into()));
        }
        let mut rot_prev = vec![usize::MAX; 2 * ne];
        for (v, rot) in rotation.iter().enumerate() {
            for (i, &h) in rot.iter().enumerate() {
                if h >= 2 * ne || origin_of(&edges, h) != v || rot_prev[h] != usize::MAX {
                    return Err(Error::InvalidMap(format!("bad rotation at vertex {v}")));
                }
                rot_prev[h] = rot[(i + rot.len() - 1) % rot.len()];
            }
        }
        if rot_prev.contains(&usize::MAX) {
            return Err(Error::InvalidMap("rotation system misses half-edges".into()));
        }
        let next: Vec<Half> = (0..2 * ne).map(|h| rot_prev[h ^ 1]).collect();
        let homology = homology.unwrap_or_else(|| vec![[0, 0]; ne]);
        if surface == Surface::Disk && outer_half.is_none() {
            return Err(Error::InvalidMap("disk maps need an outer half-edge".into()));
        }
        Self::assemble(surface, colors, edges, homology, next, &[], outer_half)
    }

    /// Builds a planar map from vertex positions; the rotation is read off
    /// the edge directions and the outer face is the one with negative area.
    pub fn from_planar_positions(colors: Vec<Color>, edges: Vec<[usize; 2]>, pos: &[Complex64]) -> Result<Self> {
        let dirs: Vec<Complex64> = (0..2 * edges.len())
            .map(|h| pos[dest_of(&edges, h)] - pos[origin_of(&edges, h)])
            .collect();
        check_edges(&colors, &edges)?;
        let rotation = rotation_from_directions(colors.len(), &edges, &dirs);
        let next = rotation_next(&edges, &rotation);
        Self::from_next_with_area(colors, edges, next, pos)
    }

    fn from_next_with_area(colors: Vec<Color>, edges: Vec<[usize; 2]>, next: Vec<Half>, pos: &[Complex64]) -> Result<Self> {
        let mut seen = vec![false; next.len()];
        let mut outer = None;
        let mut best = 0.0;
        let mut n_faces = 0;
        let mut first = None;
        for h0 in 0..next.len() {
            if seen[h0] {
                continue;
            }
            let mut area = 0.0;
            let mut h = h0;
            loop {
                seen[h] = true;
                let a = pos[origin_of(&edges, h)];
                let b = pos[dest_of(&edges, h)];
                area += a.re * b.im - a.im * b.re;
                h = next[h];
                if h == h0 {
                    break;
                }
            }
            if area < best {
                best = area;
                outer = Some(h0);
            }
            n_faces += 1;
            first.get_or_insert(h0);
        }
        // a tree has a single face of zero area
        if n_faces == 1 {
            outer = first;
        }
        let ne = edges.len();
        Self::assemble(Surface::Disk, colors, edges, vec![[0, 0]; ne], next, &[], outer)
    }

    /// Builds a torus map from positions of one fundamental domain, the
    /// period vectors and the per-edge domain offsets.
    pub fn from_periodic_positions(
        colors: Vec<Color>,
        edges: Vec<[usize; 2]>,
        offsets: Vec<[i32; 2]>,
        pos: &[Complex64],
        periods: [Complex64; 2],
    ) -> Result<Self> {
        let dirs: Vec<Complex64> = (0..2 * edges.len())
            .map(|h| {
                let e = h / 2;
                let [w, b] = edges[e];
                let d = offsets[e];
                let shift = periods[0] * d[0] as f64 + periods[1] * d[1] as f64;
                let v = pos[b] + shift - pos[w];
                if h % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let rotation = rotation_from_directions(colors.len(), &edges, &dirs);
        Self::from_rotation(Surface::Torus, colors, edges, &rotation, Some(offsets), None)
    }

    /// Builds a simple planar map from bounded faces given as counterclockwise
    /// vertex cycles. Edges are numbered in order of first appearance.
    pub fn from_vertex_faces(colors: Vec<Color>, faces: &[Vec<usize>]) -> Result<Self> {
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut cycles = Vec::new();
        for (fi, cyc) in faces.iter().enumerate() {
            if cyc.len() % 2 == 1 || cyc.is_empty() {
                return Err(Error::NonBipartiteFace { face: fi });
            }
            if cyc.iter().any(|&v| v >= colors.len()) {
                return Err(Error::InvalidMap(format!("face {fi} references a missing vertex")));
            }
            let start = (0..cyc.len())
                .find(|&i| colors[cyc[i]] == Color::White)
                .ok_or(Error::NonBipartiteFace { face: fi })?;
            let mut list = Vec::new();
            for k in 0..cyc.len() {
                let a = cyc[(start + k) % cyc.len()];
                let b = cyc[(start + k + 1) % cyc.len()];
                if colors[a] == colors[b] {
                    return Err(Error::NonBipartiteFace { face: fi });
                }
                let key = if colors[a] == Color::White { (a, b) } else { (b, a) };
                let id = *ids.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                list.push(id);
            }
            cycles.push(list);
        }
        Self::from_spec(&MapSpec {
            surface: Surface::Disk,
            colors,
            edges,
            faces: cycles,
            outer: None,
            homology: None,
        })
    }

    fn assemble(
        surface: Surface,
        colors: Vec<Color>,
        edges: Vec<[usize; 2]>,
        homology: Vec<[i32; 2]>,
        next: Vec<Half>,
        face_order: &[Half],
        outer_half: Option<Half>,
    ) -> Result<Self> {
        let nh = next.len();
        let mut prev = vec![usize::MAX; nh];
        for (h, &n) in next.iter().enumerate() {
            if n >= nh || prev[n] != usize::MAX {
                return Err(Error::InvalidMap("next is not a permutation".into()));
            }
            prev[n] = h;
        }
        let mut face_of = vec![usize::MAX; nh];
        let mut faces: Vec<Vec<Half>> = Vec::new();
        let starts = face_order.iter().copied().chain(0..nh);
        for h0 in starts {
            if face_of[h0] != usize::MAX {
                continue;
            }
            let f = faces.len();
            let mut cyc = Vec::new();
            let mut h = h0;
            loop {
                face_of[h] = f;
                cyc.push(h);
                h = next[h];
                if h == h0 {
                    break;
                }
            }
            // canonical starting point: the smallest white-to-black half-edge
            let start = (0..cyc.len())
                .filter(|&i| cyc[i] % 2 == 0)
                .min_by_key(|&i| cyc[i])
                .unwrap_or(0);
            cyc.rotate_left(start);
            faces.push(cyc);
        }
        let outer = outer_half.map(|h| face_of[h]);
        let nv = colors.len();
        let mut vertex_half = vec![usize::MAX; nv];
        for h in 0..nh {
            let v = origin_of(&edges, h);
            if vertex_half[v] == usize::MAX {
                vertex_half[v] = h;
            }
        }
        if let Some(v) = vertex_half.iter().position(|&h| h == usize::MAX) {
            return Err(Error::InvalidMap(format!("vertex {v} is isolated")));
        }
        let mut whites = Vec::new();
        let mut blacks = Vec::new();
        let mut color_index = vec![0; nv];
        for (v, c) in colors.iter().enumerate() {
            match c {
                Color::White => {
                    color_index[v] = whites.len();
                    whites.push(v);
                }
                Color::Black => {
                    color_index[v] = blacks.len();
                    blacks.push(v);
                }
            }
        }
        let map = CombMap {
            surface,
            colors,
            edges,
            homology,
            next,
            prev,
            face_of,
            faces,
            outer,
            vertex_half,
            color_index,
            whites,
            blacks,
        };
        map.validate()?;
        Ok(map)
    }

    /// Checks the structural invariants: permutation axioms, bipartiteness,
    /// a single vertex orbit per vertex, the Euler formula and vanishing
    /// homology face sums.
    pub fn validate(&self) -> Result<()> {
        let nh = self.next.len();
        for h in 0..nh {
            if self.origin(self.next[h]) != self.dest(h) {
                return Err(Error::InvalidMap(format!("next({h}) does not start where {h} ends")));
            }
        }
        for (e, &[w, b]) in self.edges.iter().enumerate() {
            if self.colors[w] != Color::White || self.colors[b] != Color::Black {
                return Err(Error::InvalidMap(format!("edge {e} is not white-black")));
            }
        }
        // every vertex must be a single rotation orbit
        let mut seen = vec![false; nh];
        let mut orbits = 0usize;
        for h0 in 0..nh {
            if seen[h0] {
                continue;
            }
            orbits += 1;
            let mut h = h0;
            loop {
                seen[h] = true;
                h = self.rot_next(h);
                if h == h0 {
                    break;
                }
            }
        }
        if orbits != self.colors.len() {
            return Err(Error::InvalidMap("a vertex is pinched (several rotation orbits)".into()));
        }
        let chi = self.colors.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64;
        let expected = match self.surface {
            Surface::Disk => 2,
            Surface::Torus => 0,
        };
        if chi != expected {
            return Err(Error::Euler { found: chi, expected });
        }
        if self.surface == Surface::Disk && self.outer.is_none() {
            return Err(Error::InvalidMap("disk map without an outer face".into()));
        }
        if self.surface == Surface::Torus {
            for (f, cyc) in self.faces.iter().enumerate() {
                let mut s = [0i32; 2];
                for &h in cyc {
                    let d = self.offset(h);
                    s[0] += d[0];
                    s[1] += d[1];
                }
                if s != [0, 0] {
                    return Err(Error::InvalidMap(format!("homology labels do not sum to zero around face {f}")));
                }
            }
        }
        Ok(())
    }

    pub fn to_spec(&self) -> MapSpec {
        let cycle = |f: usize| -> Vec<usize> {
            let cyc = &self.faces[f];
            let start = cyc.iter().position(|h| h % 2 == 0).unwrap_or(0);
            (0..cyc.len()).map(|i| cyc[(start + i) % cyc.len()] / 2).collect()
        };
        let faces = self.bounded_faces().map(cycle).collect();
        MapSpec {
            surface: self.surface,
            colors: self.colors.clone(),
            edges: self.edges.clone(),
            faces,
            outer: self.outer.map(cycle),
            homology: match self.surface {
                Surface::Disk => None,
                Surface::Torus => Some(self.homology.clone()),
            },
        }
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }
    pub fn n_vertices(&self) -> usize {
        self.colors.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_halves(&self) -> usize {
        self.next.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn color(&self, v: usize) -> Color {
        self.colors[v]
    }
    pub fn colors(&self) -> &[Color] {
        &self.colors
    }
    /// Edge endpoints as `[white, black]`.
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn whites(&self) -> &[usize] {
        &self.whites
    }
    pub fn blacks(&self) -> &[usize] {
        &self.blacks
    }
    /// Position of a vertex within its color class (row/column index).
    pub fn color_index(&self, v: usize) -> usize {
        self.color_index[v]
    }
    pub fn origin(&self, h: Half) -> usize {
        origin_of(&self.edges, h)
    }
    pub fn dest(&self, h: Half) -> usize {
        dest_of(&self.edges, h)
    }
    pub fn twin(&self, h: Half) -> Half {
        h ^ 1
    }
    pub fn next(&self, h: Half) -> Half {
        self.next[h]
    }
    pub fn prev(&self, h: Half) -> Half {
        self.prev[h]
    }
    /// Next outgoing half-edge counterclockwise around `origin(h)`.
    pub fn rot_next(&self, h: Half) -> Half {
        self.prev[h] ^ 1
    }
    /// Next outgoing half-edge clockwise around `origin(h)`.
    pub fn rot_prev(&self, h: Half) -> Half {
        self.next[h ^ 1]
    }
    /// Face to the left of `h`.
    pub fn face(&self, h: Half) -> usize {
        self.face_of[h]
    }
    /// Half-edges of face `f` in counterclockwise order.
    pub fn face_halves(&self, f: usize) -> &[Half] {
        &self.faces[f]
    }
    pub fn face_degree(&self, f: usize) -> usize {
        self.faces[f].len()
    }
    pub fn outer_face(&self) -> Option<usize> {
        self.outer
    }
    pub fn is_outer(&self, f: usize) -> bool {
        self.outer == Some(f)
    }
    pub fn bounded_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(move |&f| Some(f) != self.outer)
    }
    pub fn n_bounded_faces(&self) -> usize {
        self.faces.len() - usize::from(self.outer.is_some())
    }
    /// Outgoing half-edges around `v`, counterclockwise.
    pub fn outgoing(&self, v: usize) -> Vec<Half> {
        let h0 = self.vertex_half[v];
        let mut out = vec![h0];
        let mut h = self.rot_next(h0);
        while h != h0 {
            out.push(h);
            h = self.rot_next(h);
        }
        out
    }
    pub fn degree(&self, v: usize) -> usize {
        self.outgoing(v).len()
    }
    /// Domain offset of the black endpoint relative to the white one.
    pub fn edge_offset(&self, e: usize) -> [i32; 2] {
        self.homology[e]
    }
    /// Signed domain offset of the endpoint of `h` relative to its origin.
    pub fn offset(&self, h: Half) -> [i32; 2] {
        let d = self.homology[h / 2];
        if h.is_multiple_of(2) {
            d
        } else {
            [-d[0], -d[1]]
        }
    }
    /// Whether the edge lies on the outer face.
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.outer.is_some_and(|o| self.face_of[2 * e] == o || self.face_of[2 * e + 1] == o)
    }

    /// One step of a zigzag walk: maximal left turn on arriving at a white
    /// vertex, maximal right turn on arriving at a black vertex.
    pub fn zigzag_step(&self, h: Half) -> Half {
        match self.colors[self.dest(h)] {
            Color::White => self.next[h],
            Color::Black => self.rot_next(h ^ 1),
        }
    }

    /// All directed zigzag loops; every half-edge lies in exactly one.
    pub fn directed_zigzags(&self) -> Vec<ZigzagLoop> {
        let nh = self.n_halves();
        let mut seen = vec![false; nh];
        let mut loops = Vec::new();
        for h0 in 0..nh {
            if seen[h0] {
                continue;
            }
            let mut halves = Vec::new();
            let mut h = h0;
            loop {
                seen[h] = true;
                halves.push(h);
                h = self.zigzag_step(h);
                if h == h0 {
                    break;
                }
            }
            loops.push(ZigzagLoop { halves });
        }
        loops
    }

    /// Zigzag loops with reversed duplicates removed. A loop and its reversal
    /// both satisfy the turning rule only when every vertex on it has degree 2.
    pub fn zigzag_loops(&self) -> Vec<ZigzagLoop> {
        let all = self.directed_zigzags();
        let mut loop_of = vec![0usize; self.n_halves()];
        for (i, l) in all.iter().enumerate() {
            for &h in &l.halves {
                loop_of[h] = i;
            }
        }
        let mut keep = Vec::new();
        for (i, l) in all.iter().enumerate() {
            let rev = loop_of[l.halves[0] ^ 1];
            let is_reversal = rev != i
                && all[rev].len() == l.len()
                && l.halves.iter().all(|&h| loop_of[h ^ 1] == rev);
            if is_reversal && rev < i {
                continue;
            }
            keep.push(l.clone());
        }
        keep
    }

    /// The underlying uncolored map.
    pub fn rot_map(&self) -> RotMap {
        RotMap { next: self.next.clone() }
    }

    /// Dual map. On the disk this is the dual of the graph augmented by a
    /// vertex at infinity joined to every outer vertex, so the dual has one
    /// vertex per bounded face, one per outer edge, and an outer face whose
    /// degree equals the outer face degree of the map.
    pub fn dual(&self) -> RotMap {
        match self.outer {
            None => self.rot_map().dual(),
            Some(_) => self.augmented().dual(),
        }
    }

    /// The map with a vertex at infinity joined to each outer vertex. New
    /// half-edges come after the original ones: for the `i`th half-edge `o_i`
    /// on the outer face, half-edges `n + 2i` (origin of `o_i` to infinity)
    /// and `n + 2i + 1` (back).
    pub fn augmented(&self) -> RotMap {
        let o = self.outer.expect("augmented() needs a disk map");
        let outer = &self.faces[o];
        let n = self.n_halves();
        let k = outer.len();
        let mut next = self.next.clone();
        next.resize(n + 2 * k, 0);
        for i in 0..k {
            let j = (i + 1) % k;
            let oi = outer[i];
            let x_j = n + 2 * j;
            let x_i_back = n + 2 * i + 1;
            next[oi] = x_j;
            next[x_j] = x_i_back;
            next[x_i_back] = oi;
        }
        RotMap { next }
    }
}

/// An uncolored map given by `next`, with `twin(h) = h ^ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotMap {
    pub next: Vec<Half>,
}

impl RotMap {
    pub fn n_halves(&self) -> usize {
        self.next.len()
    }

    fn prev(&self) -> Vec<Half> {
        let mut p = vec![0; self.next.len()];
        for (h, &n) in self.next.iter().enumerate() {
            p[n] = h;
        }
        p
    }

    fn orbits(perm: &[Half]) -> Vec<Vec<Half>> {
        let mut seen = vec![false; perm.len()];
        let mut out = Vec::new();
        for h0 in 0..perm.len() {
            if seen[h0] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut h = h0;
            while !seen[h] {
                seen[h] = true;
                cyc.push(h);
                h = perm[h];
            }
            out.push(cyc);
        }
        out
    }

    pub fn faces(&self) -> Vec<Vec<Half>> {
        Self::orbits(&self.next)
    }

    /// Vertex orbits of `rot_next(h) = twin(prev(h))`.
    pub fn vertices(&self) -> Vec<Vec<Half>> {
        let p = self.prev();
        let rot: Vec<Half> = (0..self.next.len()).map(|h| p[h] ^ 1).collect();
        Self::orbits(&rot)
    }

    pub fn euler(&self) -> i64 {
        self.vertices().len() as i64 - (self.next.len() / 2) as i64 + self.faces().len() as i64
    }

    /// Dual map on the same half-edge set: the dual half-edge `h*` crosses
    /// `h` from its left face to its right face. Vertices of the dual are the
    /// faces, faces of the dual are the vertices.
    pub fn dual(&self) -> RotMap {
        let p = self.prev();
        let next = (0..self.next.len()).map(|h| p[h ^ 1]).collect();
        RotMap { next }
    }

    /// Orientation-preserving isomorphism test (maps `next` to `next` and
    /// `twin` to `twin`), trying every root image.
    pub fn is_isomorphic(&self, other: &RotMap) -> bool {
        let n = self.next.len();
        if n != other.next.len() {
            return false;
        }
        if n == 0 {
            return true;
        }
        'root: for r in 0..n {
            let mut img = vec![usize::MAX; n];
            let mut used = vec![false; n];
            let mut stack = vec![(0usize, r)];
            while let Some((a, b)) = stack.pop() {
                if img[a] != usize::MAX {
                    if img[a] != b {
                        continue 'root;
                    }
                    continue;
                }
                if used[b] {
                    continue 'root;
                }
                img[a] = b;
                used[b] = true;
                stack.push((self.next[a], other.next[b]));
                stack.push((a ^ 1, b ^ 1));
            }
            if img.iter().all(|&x| x != usize::MAX) {
                return true;
            }
        }
        false
    }
}

fn origin_of(edges: &[[usize; 2]], h: Half) -> usize {
    edges[h / 2][h % 2]
}

fn dest_of(edges: &[[usize; 2]], h: Half) -> usize {
    edges[h / 2][1 - h % 2]
}

fn check_edges(colors: &[Color], edges: &[[usize; 2]]) -> Result<()> {
    for (e, &[w, b]) in edges.iter().enumerate() {
        if w >= colors.len() || b >= colors.len() {
            return Err(Error::InvalidMap(format!("edge {e} references a missing vertex")));
        }
        if colors[w] != Color::White || colors[b] != Color::Black {
            return Err(Error::InvalidMap(format!("edge {e} must be listed as [white, black]")));
        }
    }
    Ok(())
}

fn rotation_from_directions(nv: usize, edges: &[[usize; 2]], dirs: &[Complex64]) -> Vec<Vec<Half>> {
    let mut rot: Vec<Vec<Half>> = vec![Vec::new(); nv];
    for h in 0..2 * edges.len() {
        rot[origin_of(edges, h)].push(h);
    }
    for r in &mut rot {
        r.sort_by(|&a, &b| dirs[a].arg().total_cmp(&dirs[b].arg()));
    }
    rot
}

fn rotation_next(edges: &[[usize; 2]], rotation: &[Vec<Half>]) -> Vec<Half> {
    let mut rot_prev = vec![0; 2 * edges.len()];
    for rot in rotation {
        for (i, &h) in rot.iter().enumerate() {
            rot_prev[h] = rot[(i + rot.len() - 1) % rot.len()];
        }
    }
    (0..2 * edges.len()).map(|h| rot_prev[h ^ 1]).collect()
}

/// Completes `next` on the outer face for a disk whose bounded faces have
/// been filled in. Each boundary vertex must touch the outer face once.
fn derive_outer(edges: &[[usize; 2]], nv: usize, used: &[bool], next: &mut [Half]) -> Result<Option<Half>> {
    let nh = used.len();
    let mut prev = vec![usize::MAX; nh];
    for h in 0..nh {
        if used[h] {
            prev[next[h]] = h;
        }
    }
    let mut gaps = vec![0usize; nv];
    let mut first = None;
    for h in 0..nh {
        if used[h] {
            continue;
        }
        if !used[h ^ 1] {
            return Err(Error::InvalidMap(format!("edge {} lies on no listed face", h / 2)));
        }
        gaps[origin_of(edges, h)] += 1;
        first.get_or_insert(h);
    }
    if let Some(v) = gaps.iter().position(|&g| g > 1) {
        return Err(Error::InvalidMap(format!(
            "vertex {v} touches the outer face more than once; give the outer face explicitly"
        )));
    }
    for h in 0..nh {
        if used[h] {
            continue;
        }
        // walk counterclockwise around dest(h) from twin(h) to the uncovered slot
        let mut g = h ^ 1;
        let mut steps = 0;
        loop {
            let p = prev[g];
            if p == usize::MAX {
                return Err(Error::InvalidMap("inconsistent outer face".into()));
            }
            g = p ^ 1;
            if !used[g] {
                break;
            }
            steps += 1;
            if steps > nh {
                return Err(Error::InvalidMap("inconsistent outer face".into()));
            }
        }
        next[h] = g;
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn four_cycle_counts() {
        let m = families::four_cycle();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (4, 4, 2));
        assert_eq!(m.face_degree(m.outer_face().unwrap()), 4);
    }

    #[test]
    fn rotation_matches_next() {
        let m = families::cube();
        for h in 0..m.n_halves() {
            assert_eq!(m.rot_prev(m.rot_next(h)), h);
            assert_eq!(m.origin(m.rot_next(h)), m.origin(h));
        }
    }

    #[test]
    fn four_cycle_zigzag() {
        let m = families::four_cycle();
        let z = m.zigzag_loops();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].len(), 4);
        assert_eq!(m.directed_zigzags().len(), 2);
    }

    #[test]
    fn outer_face_must_be_simple() {
        // two squares sharing a single vertex
        let colors = vec![Color::White, Color::Black, Color::White, Color::Black, Color::Black, Color::White, Color::Black];
        let faces = vec![vec![0, 1, 2, 3], vec![0, 4, 5, 6]];
        assert!(CombMap::from_vertex_faces(colors, &faces).is_err());
    }

    #[test]
    fn rejects_odd_face() {
        let colors = vec![Color::White, Color::Black, Color::White];
        assert!(matches!(
            CombMap::from_vertex_faces(colors, &[vec![0, 1, 2]]),
            Err(Error::NonBipartiteFace { .. })
        ));
    }

    #[test]
    fn spec_round_trip() {
        let m = families::cube();
        let again = CombMap::from_spec(&m.to_spec()).unwrap();
        assert_eq!(again.to_spec(), m.to_spec());
    }
}
