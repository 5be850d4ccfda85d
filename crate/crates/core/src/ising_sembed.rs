//! Ising models, their Dubédat dimer graphs and s-embeddings.
//!
//! Each Ising edge `e = [u, v]` becomes a quadrilateral with corners
//! `4e + 0` (at `u`, left side), `4e + 1` (at `u`, right side),
//! `4e + 2` (at `v`, right side) and `4e + 3` (at `v`, left side), listed
//! counterclockwise when `u` is drawn on the left and the left face on top.
//! Corners on the left of an outgoing edge are white. Quadrilateral sides
//! facing a vertex carry `cos theta`, sides facing a face carry `sin theta`,
//! and connectors between consecutive corners around a vertex carry 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcore::{Color, CombMap, Half, Surface};
use crate::kasteleyn::{enumerate_matchings, face_weights_from_edges};
use crate::planar_embed::face_weight_from_positions;
use crate::plane_graph::PlaneGraph;

/// `cos theta` below this marks an edge as degenerate.
pub const DEGENERATE_COS: f64 = 1e-6;

/// JSON form of an Ising instance: a plane graph given by faces or by a
/// straight-line drawing, with one parameter per edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingSpec {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug)]
pub struct IsingInstance {
    graph: PlaneGraph,
    x: Vec<f64>,
}

impl IsingInstance {
    pub fn new(graph: PlaneGraph, x: Vec<f64>) -> Result<Self> {
        if x.len() != graph.n_edges() {
            return Err(Error::InvalidMap(format!("{} parameters for {} edges", x.len(), graph.n_edges())));
        }
        for (e, &xe) in x.iter().enumerate() {
            if !(xe > 0.0 && xe < 1.0) {
                return Err(Error::InvalidWeight { edge: e, value: xe });
            }
        }
        Ok(IsingInstance { graph, x })
    }

    /// Instance with parameters given through `theta_e = 2 atan x_e`.
    pub fn from_thetas(graph: PlaneGraph, theta: &[f64]) -> Result<Self> {
        Self::new(graph, theta.iter().map(|t| (t / 2.0).tan()).collect())
    }

    pub fn from_spec(spec: &IsingSpec) -> Result<Self> {
        let graph = match (&spec.faces, &spec.positions) {
            (Some(faces), _) => PlaneGraph::from_faces(spec.vertices, spec.edges.clone(), faces)?,
            (None, Some(pos)) => {
                if pos.len() != spec.vertices {
                    return Err(Error::Schema { path: "positions".into(), message: format!("expected {} positions", spec.vertices) });
                }
                let pos: Vec<Complex64> = pos.iter().map(|p| Complex64::new(p[0], p[1])).collect();
                PlaneGraph::from_positions(spec.edges.clone(), &pos)?
            }
            (None, None) => return Err(Error::Schema { path: "faces".into(), message: "either faces or positions is required".into() }),
        };
        Self::new(graph, spec.x.clone())
    }

    pub fn to_spec(&self) -> IsingSpec {
        IsingSpec {
            vertices: self.graph.n_vertices(),
            edges: self.graph.edges().to_vec(),
            x: self.x.clone(),
            faces: Some(self.graph.face_cycles()),
            positions: None,
        }
    }

    pub fn graph(&self) -> &PlaneGraph {
        &self.graph
    }

    pub fn x(&self, e: usize) -> f64 {
        self.x[e]
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn theta(&self, e: usize) -> f64 {
        2.0 * self.x[e].atan()
    }

    /// Edges whose `cos theta` is numerically zero.
    pub fn degenerate_edges(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&e| self.theta(e).cos() < DEGENERATE_COS).collect()
    }

    /// `sum over spins of prod_e (1 + x_e s_u s_v)`, by enumeration.
    pub fn partition_function_brute(&self) -> f64 {
        let n = self.graph.n_vertices();
        assert!(n < 25, "too many spins to enumerate");
        let mut z = 0.0;
        for mask in 0u32..(1u32 << n) {
            let spin = |v: usize| if mask >> v & 1 == 1 { -1.0 } else { 1.0 };
            z += self
                .graph
                .edges()
                .iter()
                .zip(&self.x)
                .map(|(&[u, v], &x)| 1.0 + x * spin(u) * spin(v))
                .product::<f64>();
        }
        z
    }
}

/// Which object of the Ising graph a face of the dimer graph stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceKind {
    Vertex(usize),
    Face(usize),
    Edge(usize),
}

#[derive(Clone, Debug)]
pub struct DubedatGraph {
    pub map: CombMap,
    pub weights: Vec<f64>,
    /// Indexed by dimer face.
    pub kinds: Vec<FaceKind>,
    pub edge_face: Vec<usize>,
    pub vertex_face: Vec<usize>,
    /// Indexed by Ising face, outer face last.
    pub face_face: Vec<usize>,
}

impl DubedatGraph {
    /// Sum of weighted perfect matchings, by enumeration.
    pub fn partition_function_brute(&self) -> f64 {
        enumerate_matchings(&self.map, &self.weights).iter().map(|m| m.weight).sum()
    }
}

/// Corner of edge `e` at its endpoint `v`, on the left or right of the
/// edge leaving `v`.
fn corner(graph: &PlaneGraph, e: usize, v: usize, left: bool) -> usize {
    let first = graph.edge(e)[0] == v;
    4 * e
        + match (first, left) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
}

pub fn dubedat_graph(ising: &IsingInstance) -> Result<DubedatGraph> {
    let g = &ising.graph;
    let ne = g.n_edges();
    let nc = 4 * ne;
    let colors: Vec<Color> = (0..nc).map(|c| if c % 2 == 0 { Color::White } else { Color::Black }).collect();
    // sides s0..s3 of each quadrilateral, as [white, black]
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for e in 0..ne {
        let t = ising.theta(e);
        let q = 4 * e;
        edges.extend([[q + 2, q + 1], [q + 2, q + 3], [q, q + 3], [q, q + 1]]);
        weights.extend([t.sin(), t.cos(), t.sin(), t.cos()]);
    }
    // connector leaving the left corner of each outgoing edge
    let mut conn_out = vec![usize::MAX; nc];
    let mut conn_in = vec![usize::MAX; nc];
    for v in 0..g.n_vertices() {
        let inc = g.incident(v);
        for k in 0..inc.len() {
            let w = corner(g, inc[k], v, true);
            let b = corner(g, inc[(k + 1) % inc.len()], v, false);
            conn_out[w] = edges.len();
            conn_in[b] = edges.len();
            edges.push([w, b]);
            weights.push(1.0);
        }
    }
    if (0..nc).any(|c| (if c % 2 == 0 { conn_out[c] } else { conn_in[c] }) == usize::MAX) {
        return Err(Error::InvalidMap("every vertex needs an edge".into()));
    }
    let side = |e: usize, k: usize| 4 * e + k;
    let mut rotation: Vec<Vec<Half>> = Vec::with_capacity(nc);
    for e in 0..ne {
        let q = 4 * e;
        rotation.push(vec![2 * side(e, 2), 2 * conn_out[q], 2 * side(e, 3)]);
        rotation.push(vec![2 * side(e, 0) + 1, 2 * side(e, 3) + 1, 2 * conn_in[q + 1] + 1]);
        rotation.push(vec![2 * side(e, 1), 2 * side(e, 0), 2 * conn_out[q + 2]]);
        rotation.push(vec![2 * conn_in[q + 3] + 1, 2 * side(e, 2) + 1, 2 * side(e, 1) + 1]);
    }
    let outer = g.outer_face();
    let outer_half = (0..ne)
        .find_map(|e| {
            let [l, r] = g.sides(e);
            if l == outer {
                Some(2 * side(e, 2))
            } else if r == outer {
                Some(2 * side(e, 0))
            } else {
                None
            }
        })
        .ok_or_else(|| Error::InvalidMap("no edge on the outer face".into()))?;
    let map = CombMap::from_rotation(Surface::Disk, colors, edges, &rotation, None, Some(outer_half))?;
    let mut kinds = vec![FaceKind::Edge(usize::MAX); map.n_faces()];
    let mut edge_face = vec![0; ne];
    let mut vertex_face = vec![0; g.n_vertices()];
    let mut face_face = vec![0; g.n_faces()];
    for e in 0..ne {
        let [u, v] = g.edge(e);
        let [l, r] = g.sides(e);
        let fq = map.face(2 * side(e, 2) + 1);
        let fu = map.face(2 * side(e, 3) + 1);
        let fv = map.face(2 * side(e, 1) + 1);
        let fl = map.face(2 * side(e, 2));
        let fr = map.face(2 * side(e, 0));
        edge_face[e] = fq;
        vertex_face[u] = fu;
        vertex_face[v] = fv;
        face_face[l] = fl;
        face_face[r] = fr;
        kinds[fq] = FaceKind::Edge(e);
        kinds[fu] = FaceKind::Vertex(u);
        kinds[fv] = FaceKind::Vertex(v);
        kinds[fl] = FaceKind::Face(l);
        kinds[fr] = FaceKind::Face(r);
    }
    Ok(DubedatGraph { map, weights, kinds, edge_face, vertex_face, face_face })
}

/// Positions on the vertices, faces and edges of an Ising graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SEmbedding {
    pub vertices: Vec<Complex64>,
    /// One entry per face, outer face last; the outer entry is usually `None`.
    pub faces: Vec<Option<Complex64>>,
    pub edges: Vec<Complex64>,
    /// Per edge, `[left, right]` points standing in for the outer face on
    /// that side. May be empty.
    #[serde(default)]
    pub outer_sides: Vec<[Option<Complex64>; 2]>,
}

impl SEmbedding {
    /// Dual point on the left (`side = 0`) or right (`side = 1`) of `e`.
    pub fn dual(&self, graph: &PlaneGraph, e: usize, side: usize) -> Option<Complex64> {
        let f = graph.sides(e)[side];
        self.faces[f].or_else(|| {
            if f == graph.outer_face() {
                self.outer_sides.get(e).and_then(|s| s[side])
            } else {
                None
            }
        })
    }

    fn check_shape(&self, graph: &PlaneGraph) -> Result<()> {
        let bad = |path: &str, n: usize| Error::Schema { path: path.into(), message: format!("expected {n} entries") };
        if self.vertices.len() != graph.n_vertices() {
            return Err(bad("vertices", graph.n_vertices()));
        }
        if self.faces.len() != graph.n_faces() {
            return Err(bad("faces", graph.n_faces()));
        }
        if self.edges.len() != graph.n_edges() {
            return Err(bad("edges", graph.n_edges()));
        }
        if !self.outer_sides.is_empty() && self.outer_sides.len() != graph.n_edges() {
            return Err(bad("outer_sides", graph.n_edges()));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        let pts: Vec<Complex64> = self.vertices.iter().chain(self.faces.iter().flatten()).copied().collect();
        let mut s: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                s = s.max((a - b).norm());
            }
        }
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }
}

/// Largest residuals of the s-embedding conditions over the checked edges.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SEmbeddingReport {
    /// Spread of the distances from the edge point to the four side lines.
    pub tangential: f64,
    /// Angle bisector condition at all four quadrilateral corners.
    pub bisector: f64,
    /// `sin^2 theta` at the dual corners and `cos^2 theta` at the primal ones.
    pub sin_cos: f64,
    /// `tan^2 theta` against the ratio of corner distances.
    pub tan_squared: f64,
    /// Distance from `pi` of the argument of the edge-face quotient.
    pub edge_argument: f64,
    /// `cos^2 / sin^2` against the edge-face weight.
    pub edge_weight: f64,
    /// Product formula for tangential quadrilaterals.
    pub pitot: f64,
    pub edges_checked: usize,
    /// Edges with a side on the outer face and no point for it.
    pub edges_skipped: Vec<usize>,
    pub degenerate: Vec<usize>,
}

impl SEmbeddingReport {
    pub fn max_residual(&self) -> f64 {
        [self.tangential, self.bisector, self.sin_cos, self.tan_squared, self.edge_argument, self.edge_weight, self.pitot]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn line_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    crate::geom::line_distance(z, a, b)
}

fn arg_gap(a: Complex64, b: Complex64) -> f64 {
    (a / b).arg().abs()
}

/// Residuals of the conditions satisfied by one edge. `p` lists the
/// quadrilateral `[v0 black, v0 white, v1 black, v1 white]` and `se` its
/// incenter. Lengths are relative to `scale`.
fn check_edge(theta: f64, p: [Complex64; 4], se: Complex64, scale: f64, rep: &mut SEmbeddingReport) {
    let d: Vec<f64> = (0..4).map(|i| line_distance(se, p[i], p[(i + 1) % 4])).collect();
    let dmax = d.iter().copied().fold(0.0, f64::max);
    let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
    rep.tangential = rep.tangential.max((dmax - dmin) / scale);
    let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
    for i in 0..4 {
        let (prev, here, next) = (p[(i + 3) % 4], p[i], p[(i + 1) % 4]);
        let a = (se - here) / (prev - here);
        let b = (next - here) / (se - here);
        rep.bisector = rep.bisector.max(arg_gap(a, b));
        let ratio = (se - here).norm_sqr() / ((next - here).norm() * (prev - here).norm());
        let want = if i % 2 == 1 { s2 } else { c2 };
        rep.sin_cos = rep.sin_cos.max((want - ratio).abs());
    }
    let r: Vec<f64> = p.iter().map(|&z| (z - se).norm()).collect();
    let (black, white) = (r[0] * r[2], r[1] * r[3]);
    rep.tan_squared = rep.tan_squared.max(rel(theta.tan().powi(2), white / black));
    let q = (p[0] - se) * (p[2] - se) / ((p[1] - se) * (p[3] - se));
    rep.edge_argument = rep.edge_argument.max(std::f64::consts::PI - q.arg().abs());
    rep.edge_weight = rep.edge_weight.max(rel(c2 / s2, black / white));
    let lhs = (p[2] - p[1]).norm() * (p[0] - p[1]).norm();
    let rhs = r[1] / r[3] * (white + black);
    rep.pitot = rep.pitot.max((lhs - rhs).abs() / (scale * scale));
}

/// Checks the tangential-quadrilateral condition and the identities that
/// make an s-embedding a circle-center embedding of the Dubédat graph.
pub fn validate_sembedding(s: &SEmbedding, ising: &IsingInstance) -> Result<SEmbeddingReport> {
    let g = &ising.graph;
    s.check_shape(g)?;
    let scale = s.scale();
    let mut rep = SEmbeddingReport { degenerate: ising.degenerate_edges(), ..Default::default() };
    for e in 0..g.n_edges() {
        let [u, v] = g.edge(e);
        match (s.dual(g, e, 1), s.dual(g, e, 0)) {
            (Some(right), Some(left)) => {
                check_edge(ising.theta(e), [s.vertices[u], right, s.vertices[v], left], s.edges[e], scale, &mut rep);
                rep.edges_checked += 1;
            }
            _ => rep.edges_skipped.push(e),
        }
    }
    Ok(rep)
}

/// Circle centers on the dual of the Dubédat graph read off an s-embedding,
/// with the comparison of geometric and combinatorial face weights.
#[derive(Clone, Debug)]
pub struct IsingCenters {
    pub dimer: DubedatGraph,
    /// Indexed by dimer face.
    pub centers: Vec<Option<Complex64>>,
    /// Face weight from the centers, per dimer face with all neighbors placed.
    pub geometric: Vec<Option<f64>>,
    pub combinatorial: Vec<f64>,
    pub weight_mismatch: f64,
    /// Largest relative imaginary part of the geometric face weights.
    pub angle_defect: f64,
    /// Faces compared, by kind: vertex, face, edge.
    pub compared: [usize; 3],
    pub report: SEmbeddingReport,
}

impl IsingCenters {
    /// Face weight of the quadrilateral of edge `e` computed from centers.
    pub fn edge_face_weight(&self, e: usize) -> Option<f64> {
        self.geometric[self.dimer.edge_face[e]]
    }
}

/// Places every face of the Dubédat graph at the s-embedding point of the
/// vertex, face or edge it stands for, after validating `s` to `tol`.
pub fn sembedding_to_centers(s: &SEmbedding, ising: &IsingInstance, tol: f64) -> Result<IsingCenters> {
    let report = validate_sembedding(s, ising)?;
    if !report.passes(tol) {
        return Err(Error::Incidence(report.max_residual()));
    }
    let g = &ising.graph;
    let dimer = dubedat_graph(ising)?;
    let map = &dimer.map;
    let centers: Vec<Option<Complex64>> = dimer
        .kinds
        .iter()
        .map(|k| match *k {
            FaceKind::Vertex(v) => Some(s.vertices[v]),
            FaceKind::Face(f) => s.faces[f],
            FaceKind::Edge(e) => Some(s.edges[e]),
        })
        .collect();
    // point across a dimer half-edge; face sides on the outer face use the
    // per-edge stand-ins
    let across = |h: Half| -> Option<Complex64> {
        let f = map.face(h ^ 1);
        if let Some(z) = centers[f] {
            return Some(z);
        }
        let e = h / 2 / 4;
        match (h / 2 % 4, dimer.kinds[f]) {
            (2, FaceKind::Face(_)) if e < g.n_edges() => s.dual(g, e, 0),
            (0, FaceKind::Face(_)) if e < g.n_edges() => s.dual(g, e, 1),
            _ => None,
        }
    };
    let combinatorial = face_weights_from_edges(map, &dimer.weights)?.0;
    let mut geometric = vec![None; map.n_faces()];
    let mut mismatch: f64 = 0.0;
    let mut defect: f64 = 0.0;
    let mut compared = [0; 3];
    for f in map.bounded_faces() {
        let Some(u) = centers[f] else { continue };
        let pts: Option<Vec<Complex64>> = map.face_halves(f).iter().map(|&h| across(h)).collect();
        let Some(pts) = pts else { continue };
        let halves = map.face_halves(f).to_vec();
        let lookup = |h: Half| pts[halves.iter().position(|&k| k == h).expect("half on face")];
        let (x, imag) = face_weight_from_positions(map, f, u, lookup);
        geometric[f] = Some(x);
        mismatch = mismatch.max(rel(x, combinatorial[f]));
        defect = defect.max(imag);
        compared[match dimer.kinds[f] {
            FaceKind::Vertex(_) => 0,
            FaceKind::Face(_) => 1,
            FaceKind::Edge(_) => 2,
        }] += 1;
    }
    Ok(IsingCenters { dimer, centers, geometric, combinatorial, weight_mismatch: mismatch, angle_defect: defect, compared, report })
}

/// Square lattice with `rows x cols` vertices whose quadrilaterals are
/// rhombi of angle `phi`: edges along the first axis get `theta = phi / 2`,
/// edges along the second get `theta = (pi - phi) / 2`. `phi = pi / 2` is
/// the critical square lattice, `x = sqrt 2 - 1`. Boundary edges get their
/// outer dual point from the missing rhombus.
pub fn isoradial_square_lattice(rows: usize, cols: usize, phi: f64) -> Result<(IsingInstance, SEmbedding)> {
    if rows < 2 || cols < 2 {
        return Err(Error::Degenerate("need at least a 2x2 grid".into()));
    }
    if !(phi > 0.0 && phi < std::f64::consts::PI) {
        return Err(Error::Degenerate(format!("rhombus angle {phi} out of range")));
    }
    let (a, b) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let id = |i: usize, j: usize| j * cols + i;
    let pos: Vec<Complex64> = (0..rows).flat_map(|j| (0..cols).map(move |i| Complex64::new(a * i as f64, b * j as f64))).collect();
    let mut edges = Vec::new();
    let mut theta = Vec::new();
    for j in 0..rows {
        for i in 0..cols {
            if i + 1 < cols {
                edges.push([id(i, j), id(i + 1, j)]);
                theta.push(phi / 2.0);
            }
            if j + 1 < rows {
                edges.push([id(i, j), id(i, j + 1)]);
                theta.push((std::f64::consts::PI - phi) / 2.0);
            }
        }
    }
    let graph = PlaneGraph::from_positions(edges, &pos)?;
    let ising = IsingInstance::from_thetas(graph, &theta)?;
    let g = &ising.graph;
    let mut faces: Vec<Option<Complex64>> = (0..g.n_bounded_faces())
        .map(|f| {
            let vs = g.face_vertices(f);
            Some(vs.iter().map(|&v| pos[v]).sum::<Complex64>() / vs.len() as f64)
        })
        .collect();
    faces.push(None);
    let mid: Vec<Complex64> = g.edges().iter().map(|&[u, v]| (pos[u] + pos[v]) / 2.0).collect();
    let outer = g.outer_face();
    let outer_sides = (0..g.n_edges())
        .map(|e| {
            let [l, r] = g.sides(e);
            let mirror = |f: usize| faces[f].map(|z| 2.0 * mid[e] - z);
            [if l == outer { mirror(r) } else { None }, if r == outer { mirror(l) } else { None }]
        })
        .collect();
    let s = SEmbedding { vertices: pos, faces, edges: mid, outer_sides };
    Ok((ising, s))
}

/// Ising instance on a straight-line drawing with every edge given the
/// same parameter.
pub fn uniform_instance(edges: Vec<[usize; 2]>, pos: &[Complex64], x: f64) -> Result<IsingInstance> {
    let n = edges.len();
    IsingInstance::new(PlaneGraph::from_positions(edges, pos)?, vec![x; n])
}

/// Tangential quadrilateral for a single edge: primal corners at `-1` and
/// `1`, dual corners at `-i tan theta` and `i tan theta`, incenter 0.
pub fn single_edge(theta: f64) -> Result<(IsingInstance, SEmbedding)> {
    let pos = [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)];
    let ising = IsingInstance::from_thetas(PlaneGraph::from_positions(vec![[0, 1]], &pos)?, &[theta])?;
    let t = theta.tan();
    let s = SEmbedding {
        vertices: pos.to_vec(),
        faces: vec![None],
        edges: vec![Complex64::new(0.0, 0.0)],
        outer_sides: vec![[Some(Complex64::new(0.0, t)), Some(Complex64::new(0.0, -t))]],
    };
    Ok((ising, s))
}
