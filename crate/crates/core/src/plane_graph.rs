//! Embedded planar graphs (not necessarily bipartite), stored through their
//! edge subdivision: a bipartite map whose black vertices are the graph
//! vertices and whose white vertices are edge midpoints. Faces of the
//! subdivision are the faces of the graph.
//!
//! Faces are numbered with the bounded faces first (in the order of
//! `CombMap::bounded_faces`) and the outer face last.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graphcore::{Color, CombMap, Half};

#[derive(Clone, Debug)]
pub struct PlaneGraph {
    n: usize,
    edges: Vec<[usize; 2]>,
    sub: CombMap,
    /// Per edge `[u, v]`: subdivision half-edges `u -> mid` and `v -> mid`.
    to_mid: Vec<[Half; 2]>,
    face_id: Vec<usize>,
    n_bounded: usize,
}

impl PlaneGraph {
    /// Graph from bounded faces given as counterclockwise vertex cycles.
    /// Every edge must border a bounded face.
    pub fn from_faces(n: usize, edges: Vec<[usize; 2]>, faces: &[Vec<usize>]) -> Result<Self> {
        check_edges(n, &edges)?;
        let ids: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().flat_map(|(e, &[u, v])| [((u, v), e), ((v, u), e)]).collect();
        let mut cycles = Vec::new();
        for (fi, cyc) in faces.iter().enumerate() {
            let mut sub = Vec::new();
            for k in 0..cyc.len() {
                let (a, b) = (cyc[k], cyc[(k + 1) % cyc.len()]);
                let e = ids.get(&(a, b)).ok_or_else(|| Error::InvalidMap(format!("face {fi} uses missing edge {a}-{b}")))?;
                sub.push(a);
                sub.push(n + e);
            }
            cycles.push(sub);
        }
        let sub = CombMap::from_vertex_faces(subdivision_colors(n, edges.len()), &cycles)?;
        if sub.n_edges() != 2 * edges.len() {
            return Err(Error::InvalidMap("every edge must border a bounded face".into()));
        }
        let mut to_mid = vec![[usize::MAX; 2]; edges.len()];
        for s in 0..sub.n_edges() {
            let [m, x] = sub.edge(s);
            let e = m - n;
            let side = if x == edges[e][0] { 0 } else { 1 };
            to_mid[e][side] = 2 * s + 1;
        }
        Ok(Self::assemble(n, edges, sub, to_mid))
    }

    /// Graph from a straight-line planar drawing.
    pub fn from_positions(edges: Vec<[usize; 2]>, pos: &[Complex64]) -> Result<Self> {
        let n = pos.len();
        check_edges(n, &edges)?;
        let mut sub_edges = Vec::with_capacity(2 * edges.len());
        let mut sub_pos = pos.to_vec();
        for (e, &[u, v]) in edges.iter().enumerate() {
            sub_edges.push([n + e, u]);
            sub_edges.push([n + e, v]);
            sub_pos.push((pos[u] + pos[v]) / 2.0);
        }
        let sub = CombMap::from_planar_positions(subdivision_colors(n, edges.len()), sub_edges, &sub_pos)?;
        let to_mid = (0..edges.len()).map(|e| [4 * e + 1, 4 * e + 3]).collect();
        Ok(Self::assemble(n, edges, sub, to_mid))
    }

    fn assemble(n: usize, edges: Vec<[usize; 2]>, sub: CombMap, to_mid: Vec<[Half; 2]>) -> Self {
        let n_bounded = sub.n_bounded_faces();
        let mut face_id = vec![n_bounded; sub.n_faces()];
        for (i, f) in sub.bounded_faces().enumerate() {
            face_id[f] = i;
        }
        PlaneGraph { n, edges, sub, to_mid, face_id, n_bounded }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Bounded faces plus the outer face.
    pub fn n_faces(&self) -> usize {
        self.n_bounded + 1
    }

    pub fn n_bounded_faces(&self) -> usize {
        self.n_bounded
    }

    pub fn outer_face(&self) -> usize {
        self.n_bounded
    }

    /// The edge subdivision map.
    pub fn subdivision(&self) -> &CombMap {
        &self.sub
    }

    /// Subdivision half-edges from the endpoints of `e` to its midpoint.
    pub fn to_mid(&self, e: usize) -> [Half; 2] {
        self.to_mid[e]
    }

    /// Face on the left of a subdivision half-edge.
    pub fn face_of_half(&self, h: Half) -> usize {
        self.face_id[self.sub.face(h)]
    }

    /// Faces `[left, right]` of edge `e` traversed from its first to its
    /// second endpoint.
    pub fn sides(&self, e: usize) -> [usize; 2] {
        let [hu, hv] = self.to_mid[e];
        [self.face_of_half(hu), self.face_of_half(hv)]
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let [a, b] = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Incident edges of `v` in counterclockwise order.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        self.sub.outgoing(v).into_iter().map(|h| self.sub.dest(h) - self.n).collect()
    }

    /// Boundary of face `f` as `(vertex, edge)` pairs: the walk leaves each
    /// vertex along the edge, with the face on the left. Counterclockwise
    /// for bounded faces, clockwise around the graph for the outer face.
    pub fn face_walk(&self, f: usize) -> Vec<(usize, usize)> {
        let sf = if f == self.n_bounded {
            self.sub.outer_face().expect("outer face")
        } else {
            self.sub.bounded_faces().nth(f).expect("bounded face")
        };
        self.sub
            .face_halves(sf)
            .iter()
            .filter(|&&h| self.sub.color(self.sub.origin(h)) == Color::Black)
            .map(|&h| (self.sub.origin(h), self.sub.dest(h) - self.n))
            .collect()
    }

    /// Vertices of face `f` in walk order.
    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        self.face_walk(f).into_iter().map(|x| x.0).collect()
    }

    /// Bounded faces as counterclockwise vertex cycles.
    pub fn face_cycles(&self) -> Vec<Vec<usize>> {
        (0..self.n_bounded).map(|f| self.face_vertices(f)).collect()
    }
}

fn subdivision_colors(n: usize, ne: usize) -> Vec<Color> {
    let mut colors = vec![Color::Black; n];
    colors.extend(std::iter::repeat_n(Color::White, ne));
    colors
}

fn check_edges(n: usize, edges: &[[usize; 2]]) -> Result<()> {
    for (e, &[u, v]) in edges.iter().enumerate() {
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidMap(format!("bad edge {e}: {u}-{v}")));
        }
    }
    Ok(())
}
