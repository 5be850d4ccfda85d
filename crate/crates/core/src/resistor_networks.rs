//! Planar resistor networks: harmonic (Tutte) embeddings, reciprocal dual
//! figures, Temperley's bipartite graph with its circle pattern, and the
//! star-triangle move seen as four Miquel moves.
//!
//! Dual vertices are the bounded faces (in the order of
//! `CombMap::bounded_faces`) followed by one outer vertex per boundary arc:
//! arc `i` sits between boundary vertices `i` and `i + 1`.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::graphcore::{Color, CombMap, Half, Surface};
use crate::plane_graph::PlaneGraph;
use crate::kasteleyn::{self, FaceWeights};
use crate::miquel_dynamics;
use crate::planar_embed;

/// Plain description of a network. The planar structure comes either from
/// bounded faces (counterclockwise vertex cycles) or from straight-line
/// vertex positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub conductances: Vec<f64>,
    /// Boundary vertices in counterclockwise order.
    pub boundary: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug)]
pub struct Network {
    graph: PlaneGraph,
    conductance: Vec<f64>,
    boundary: Vec<usize>,
    /// Dual vertex on the left of each subdivision half-edge.
    dual_of_half: Vec<usize>,
    n: usize,
    n_bounded: usize,
}

impl Network {
    pub fn from_spec(spec: &NetworkSpec) -> Result<Self> {
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
        Self::new(graph, spec.conductances.clone(), spec.boundary.clone())
    }

    pub fn to_spec(&self) -> NetworkSpec {
        NetworkSpec {
            vertices: self.n,
            edges: self.graph.edges().to_vec(),
            conductances: self.conductance.clone(),
            boundary: self.boundary.clone(),
            faces: Some(self.graph.face_cycles()),
            positions: None,
        }
    }

    /// Network from bounded faces given as counterclockwise vertex cycles.
    pub fn from_faces(n: usize, edges: Vec<[usize; 2]>, conductance: Vec<f64>, faces: &[Vec<usize>], boundary: Vec<usize>) -> Result<Self> {
        Self::new(PlaneGraph::from_faces(n, edges, faces)?, conductance, boundary)
    }

    /// Network from a straight-line planar drawing.
    pub fn from_positions(edges: Vec<[usize; 2]>, conductance: Vec<f64>, pos: &[Complex64], boundary: Vec<usize>) -> Result<Self> {
        Self::new(PlaneGraph::from_positions(edges, pos)?, conductance, boundary)
    }

    pub fn new(graph: PlaneGraph, conductance: Vec<f64>, boundary: Vec<usize>) -> Result<Self> {
        if conductance.len() != graph.n_edges() {
            return Err(Error::InvalidMap(format!("{} conductances for {} edges", conductance.len(), graph.n_edges())));
        }
        for (e, &ce) in conductance.iter().enumerate() {
            if !(ce > 0.0) || !ce.is_finite() {
                return Err(Error::InvalidWeight { edge: e, value: ce });
            }
        }
        if boundary.len() < 3 {
            return Err(Error::InvalidMap("need at least three boundary vertices".into()));
        }
        let sub = graph.subdivision();
        let outer = sub.outer_face().ok_or_else(|| Error::InvalidMap("network has no outer face".into()))?;
        // The outer walk runs clockwise around the network, so it meets the
        // boundary vertices in reverse order.
        let walk: Vec<Half> = sub.face_halves(outer).to_vec();
        let pos_in_b: HashMap<usize, usize> = boundary.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if pos_in_b.len() != boundary.len() {
            return Err(Error::InvalidMap("repeated boundary vertex".into()));
        }
        let start = walk
            .iter()
            .position(|&h| sub.origin(h) == boundary[0])
            .ok_or_else(|| Error::InvalidMap(format!("boundary vertex {} is not on the outer face", boundary[0])))?;
        let k = boundary.len();
        let n_bounded = graph.n_bounded_faces();
        let mut dual_of_half: Vec<usize> = (0..sub.n_halves()).map(|h| graph.face_of_half(h)).collect();
        let mut arc = k - 1;
        let mut expected = 0;
        let mut seen = 0;
        for s in 0..walk.len() {
            let h = walk[(start + s) % walk.len()];
            let v = sub.origin(h);
            if let Some(&i) = pos_in_b.get(&v) {
                if i != expected {
                    return Err(Error::InvalidMap(format!("boundary vertex {v} is out of counterclockwise order")));
                }
                seen += 1;
                arc = (i + k - 1) % k;
                expected = arc;
            }
            dual_of_half[h] = n_bounded + arc;
        }
        if seen != k {
            return Err(Error::InvalidMap("boundary vertices must each touch the outer face once".into()));
        }
        let n = graph.n_vertices();
        let net = Network { graph, conductance, boundary, dual_of_half, n, n_bounded };
        for e in 0..net.n_edges() {
            let [l, r] = net.sides(e);
            if l == r {
                return Err(Error::InvalidMap(format!("edge {e} has the same face on both sides")));
            }
        }
        Ok(net)
    }

    pub fn graph(&self) -> &PlaneGraph {
        &self.graph
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.graph.n_edges()
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.graph.edge(e)
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        self.graph.edges()
    }

    pub fn conductance(&self, e: usize) -> f64 {
        self.conductance[e]
    }

    pub fn conductances(&self) -> &[f64] {
        &self.conductance
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.contains(&v)
    }

    /// Number of dual vertices: bounded faces plus one per boundary arc.
    pub fn n_dual(&self) -> usize {
        self.n_bounded + self.boundary.len()
    }

    pub fn n_bounded_faces(&self) -> usize {
        self.n_bounded
    }

    /// Dual vertices `[left, right]` of edge `e` traversed from its first to
    /// its second endpoint.
    pub fn sides(&self, e: usize) -> [usize; 2] {
        let [hu, hv] = self.graph.to_mid(e);
        [self.dual_of_half[hu], self.dual_of_half[hv]]
    }

    /// Incident edges of `v` in counterclockwise order.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        self.graph.incident(v)
    }

    /// Edges around dual vertex `d` in counterclockwise order.
    pub fn dual_incident(&self, d: usize) -> Vec<usize> {
        if d < self.n_bounded {
            return self.graph.face_walk(d).into_iter().map(|x| x.1).collect();
        }
        let sub = self.graph.subdivision();
        let walk = sub.face_halves(sub.outer_face().expect("outer face"));
        let start = walk.iter().position(|&h| sub.origin(h) == self.boundary[0]).expect("boundary on outer face");
        (0..walk.len())
            .map(|s| walk[(start + s) % walk.len()])
            .filter(|&h| self.dual_of_half[h] == d && sub.color(sub.origin(h)) == Color::Black)
            .map(|h| sub.dest(h) - self.n)
            .collect()
    }

    /// Vertices of bounded face `d` in counterclockwise order.
    pub fn face_vertices(&self, d: usize) -> Vec<usize> {
        self.graph.face_vertices(d)
    }

    fn neighbor(&self, e: usize, v: usize) -> usize {
        self.graph.other_end(e, v)
    }
}

/// Harmonic embedding of the network and its dual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalFigure {
    /// Primal positions per vertex.
    pub f: Vec<Complex64>,
    /// Dual positions per dual vertex.
    pub g: Vec<Complex64>,
    pub residuals: FigureResiduals,
}

/// Relative residuals of a reciprocal figure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureResiduals {
    /// Laplacian of `f` at interior vertices.
    pub harmonic: f64,
    /// Laplacian of `g` for inverse conductances at bounded faces.
    pub dual_harmonic: f64,
    /// Mismatch of `g(left) - g(right) = i c (f(v) - f(u))` over all edges.
    pub rotation: f64,
}

impl FigureResiduals {
    pub fn max(&self) -> f64 {
        self.harmonic.max(self.dual_harmonic).max(self.rotation)
    }
}

impl ReciprocalFigure {
    pub fn scale(&self) -> f64 {
        geom::diameter(&self.f).max(geom::diameter(&self.g)).max(1e-300)
    }
}

/// Tutte embedding with the boundary on a convex polygon, and its dual
/// integrated by the rotation rule from `dual_root` at the outer dual vertex
/// between the first two boundary vertices.
pub fn tutte_embed(net: &Network, polygon: &[Complex64], dual_root: Complex64) -> Result<ReciprocalFigure> {
    let k = net.boundary.len();
    if polygon.len() != k {
        return Err(Error::Degenerate(format!("{} polygon corners for {k} boundary vertices", polygon.len())));
    }
    if !geom::is_convex_ccw(polygon, 1e-12) || geom::signed_area(polygon) <= 0.0 {
        return Err(Error::Degenerate("boundary polygon is not convex and counterclockwise".into()));
    }
    check_reaches_boundary(net)?;
    let mut slot = vec![usize::MAX; net.n];
    let interior: Vec<usize> = (0..net.n).filter(|v| !net.is_boundary(*v)).collect();
    for (i, &v) in interior.iter().enumerate() {
        slot[v] = i;
    }
    let mut f = vec![Complex64::new(0.0, 0.0); net.n];
    for (i, &v) in net.boundary.iter().enumerate() {
        f[v] = polygon[i];
    }
    let m = interior.len();
    if m > 0 {
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DMatrix::<f64>::zeros(m, 2);
        for (e, &[u, v]) in net.edges().iter().enumerate() {
            let c = net.conductance[e];
            for (x, y) in [(u, v), (v, u)] {
                if slot[x] == usize::MAX {
                    continue;
                }
                a[(slot[x], slot[x])] += c;
                if slot[y] == usize::MAX {
                    rhs[(slot[x], 0)] += c * f[y].re;
                    rhs[(slot[x], 1)] += c * f[y].im;
                } else {
                    a[(slot[x], slot[y])] -= c;
                }
            }
        }
        let sol = a.lu().solve(&rhs).ok_or_else(|| Error::Singular("network Laplacian".into()))?;
        for (i, &v) in interior.iter().enumerate() {
            f[v] = Complex64::new(sol[(i, 0)], sol[(i, 1)]);
        }
    }
    let g = integrate_dual(net, &f, dual_root)?;
    let residuals = figure_residuals(net, &f, &g);
    Ok(ReciprocalFigure { f, g, residuals })
}

fn check_reaches_boundary(net: &Network) -> Result<()> {
    let mut adj = vec![Vec::new(); net.n];
    for &[u, v] in net.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; net.n];
    let mut queue: VecDeque<usize> = net.boundary.iter().copied().collect();
    for &b in &net.boundary {
        seen[b] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(v) => Err(Error::Singular(format!("vertex {v} is not connected to the boundary"))),
        None => Ok(()),
    }
}

fn integrate_dual(net: &Network, f: &[Complex64], root: Complex64) -> Result<Vec<Complex64>> {
    let nd = net.n_dual();
    let mut adj: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); nd];
    for (e, &[u, v]) in net.edges().iter().enumerate() {
        let [l, r] = net.sides(e);
        let d = Complex64::i() * net.conductance[e] * (f[v] - f[u]);
        adj[r].push((l, d));
        adj[l].push((r, -d));
    }
    let mut g: Vec<Option<Complex64>> = vec![None; nd];
    let start = net.n_bounded;
    g[start] = Some(root);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        let gx = g[x].expect("visited");
        for &(y, d) in &adj[x] {
            if g[y].is_none() {
                g[y] = Some(gx + d);
                queue.push_back(y);
            }
        }
    }
    g.into_iter().map(|p| p.ok_or_else(|| Error::InvalidMap("dual graph is disconnected".into()))).collect()
}

fn figure_residuals(net: &Network, f: &[Complex64], g: &[Complex64]) -> FigureResiduals {
    let mut lap = vec![Complex64::new(0.0, 0.0); net.n];
    let mut mass = vec![0.0; net.n];
    let mut dlap = vec![Complex64::new(0.0, 0.0); net.n_dual()];
    let mut dmass = vec![0.0; net.n_dual()];
    let mut rotation: f64 = 0.0;
    let scale = geom::diameter(f).max(1e-300);
    for (e, &[u, v]) in net.edges().iter().enumerate() {
        let c = net.conductance[e];
        let df = f[v] - f[u];
        lap[u] += c * df;
        lap[v] -= c * df;
        mass[u] += c * df.norm();
        mass[v] += c * df.norm();
        let [l, r] = net.sides(e);
        let dg = g[l] - g[r];
        dlap[r] += dg / c;
        dlap[l] -= dg / c;
        dmass[r] += dg.norm() / c;
        dmass[l] += dg.norm() / c;
        rotation = rotation.max((dg - Complex64::i() * c * df).norm() / (c * scale));
    }
    let harmonic = (0..net.n)
        .filter(|v| !net.is_boundary(*v))
        .map(|v| lap[v].norm() / mass[v].max(1e-300))
        .fold(0.0, f64::max);
    let dual_harmonic = (0..net.n_bounded).map(|d| dlap[d].norm() / dmass[d].max(1e-300)).fold(0.0, f64::max);
    FigureResiduals { harmonic, dual_harmonic, rotation }
}

/// How the outer face enters Temperley's graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OuterFace {
    /// One black vertex for the whole outer face.
    Single,
    /// One black vertex per boundary arc, as in the dual of a reciprocal
    /// figure.
    Split,
}

/// Temperley's bipartite graph: black vertices are network vertices
/// (`0..n`) followed by dual vertices, white vertices are network edges.
/// Every face is a quadrilateral `v, e, d, e'` around a corner `(v, d)`.
#[derive(Clone, Debug)]
pub struct TemperleyGraph {
    pub map: CombMap,
    /// Conductance on edges from a white vertex to its network endpoints,
    /// 1 on edges to dual vertices.
    pub weights: Vec<f64>,
    /// Face weights `X = c_e' / c_e` for the corner face `v, e, d, e'`
    /// listed counterclockwise.
    pub x: FaceWeights,
    /// Corner `(vertex, dual vertex)` of each face; the dual vertex is
    /// numbered as in the network (outer arcs collapse to one id when the
    /// outer face is single).
    pub corners: Vec<(usize, usize)>,
    pub outer: OuterFace,
    n_vertices: usize,
    n_dual: usize,
    corner_face: HashMap<(usize, usize), usize>,
}

impl TemperleyGraph {
    pub fn white(&self, e: usize) -> usize {
        self.n_vertices + self.n_dual + e
    }

    pub fn dual_vertex(&self, d: usize) -> usize {
        self.n_vertices + d
    }

    /// Face at corner `(v, d)`, if it is unique.
    pub fn face_of_corner(&self, v: usize, d: usize) -> Option<usize> {
        self.corner_face.get(&(v, d)).copied()
    }
}

/// Temperley's graph of a network with one outer black vertex.
pub fn temperley_graph(net: &Network) -> Result<TemperleyGraph> {
    build_temperley(net, OuterFace::Single)
}

/// Temperley's graph with the outer face split into boundary arcs.
pub fn temperley_graph_split(net: &Network) -> Result<TemperleyGraph> {
    build_temperley(net, OuterFace::Split)
}

fn build_temperley(net: &Network, outer: OuterFace) -> Result<TemperleyGraph> {
    let n = net.n;
    let ne = net.n_edges();
    let collapse = |d: usize| match outer {
        OuterFace::Split => d,
        OuterFace::Single => d.min(net.n_bounded),
    };
    let nd = match outer {
        OuterFace::Split => net.n_dual(),
        OuterFace::Single => net.n_bounded + 1,
    };
    let white = |e: usize| n + nd + e;
    let mut colors = vec![Color::Black; n + nd];
    colors.extend(std::iter::repeat_n(Color::White, ne));
    // Edge 4e + k joins white e to: its first endpoint, its second
    // endpoint, its left dual vertex, its right dual vertex.
    let mut edges = Vec::with_capacity(4 * ne);
    let mut weights = Vec::with_capacity(4 * ne);
    for (e, &[u, v]) in net.edges().iter().enumerate() {
        let [l, r] = net.sides(e);
        for (b, w) in [(u, net.conductance[e]), (v, net.conductance[e]), (n + collapse(l), 1.0), (n + collapse(r), 1.0)] {
            edges.push([white(e), b]);
            weights.push(w);
        }
    }
    let mut rotation: Vec<Vec<Half>> = vec![Vec::new(); n + nd + ne];
    for (v, rot) in rotation.iter_mut().enumerate().take(n) {
        for e in net.incident(v) {
            let k = if net.edge(e)[0] == v { 0 } else { 1 };
            rot.push(2 * (4 * e + k) + 1);
        }
    }
    let arc_edges: Vec<Vec<usize>> = (0..net.n_dual()).map(|d| net.dual_incident(d)).collect();
    // The outer walk meets the arcs in decreasing order.
    let order = (0..net.n_bounded).chain((net.n_bounded..net.n_dual()).rev());
    for d in order {
        let id = n + collapse(d);
        for &e in &arc_edges[d] {
            let [l, _] = net.sides(e);
            let k = if l == d { 2 } else { 3 };
            rotation[id].push(2 * (4 * e + k) + 1);
        }
    }
    for e in 0..ne {
        // Counterclockwise around the midpoint: second endpoint, left
        // face, first endpoint, right face.
        rotation[white(e)] = vec![2 * (4 * e + 1), 2 * (4 * e + 2), 2 * (4 * e), 2 * (4 * e + 3)];
    }
    // The sector after the last edge around the first outer vertex is
    // outside everything.
    let first_outer = n + collapse(net.n_bounded);
    let outer_half = *rotation[first_outer].last().ok_or_else(|| Error::InvalidMap("empty outer face".into()))?;
    let map = CombMap::from_rotation(Surface::Disk, colors, edges, &rotation, None, Some(outer_half))?;
    let mut corners = Vec::with_capacity(map.n_faces());
    let mut corner_face = HashMap::new();
    let mut repeated = Vec::new();
    for f in 0..map.n_faces() {
        let blacks: Vec<usize> = map.face_halves(f).iter().map(|&h| map.origin(h)).filter(|&x| x < n + nd).collect();
        let v = blacks.iter().copied().find(|&x| x < n);
        let d = blacks.iter().copied().find(|&x| x >= n);
        let corner = match (v, d) {
            (Some(v), Some(d)) if blacks.len() == 2 => (v, d - n),
            _ => (usize::MAX, usize::MAX),
        };
        if corner_face.insert(corner, f).is_some() {
            repeated.push(corner);
        }
        corners.push(corner);
    }
    for c in repeated {
        corner_face.remove(&c);
    }
    let x = kasteleyn::face_weights_from_edges(&map, &weights)?;
    Ok(TemperleyGraph { map, weights, x, corners, outer, n_vertices: n, n_dual: nd, corner_face })
}

/// Circle pattern on Temperley's graph (outer face split) built from a
/// reciprocal figure.
#[derive(Clone, Debug)]
pub struct TemperleyPattern {
    pub graph: TemperleyGraph,
    /// Position of every vertex of the graph.
    pub points: Vec<Complex64>,
    /// Circumcenter of every bounded face (`None` for the outer face).
    pub centers: Vec<Option<Complex64>>,
    pub report: PatternReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    /// Largest relative spread of the distances from a face circumcenter to
    /// its four vertices.
    pub concyclicity: f64,
    /// Largest distance between a circumcenter and the midpoint of the two
    /// black vertices of its face, relative to the scale.
    pub midpoint: f64,
    /// Largest `|cos|` of the angle between a primal edge and its dual edge.
    pub right_angle: f64,
    /// Largest relative difference between the face weights induced by the
    /// circumcenters and the conductance ratios, over faces whose four
    /// neighbors are bounded.
    pub weight_mismatch: f64,
    pub faces_compared: usize,
}

impl PatternReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.concyclicity < tol && self.midpoint < tol && self.right_angle < tol && self.weight_mismatch < tol
    }
}

impl TemperleyPattern {
    pub fn scale(&self) -> f64 {
        geom::diameter(&self.points).max(1e-300)
    }

    /// Circumcenter of the face at corner `(v, d)`.
    pub fn corner_center(&self, v: usize, d: usize) -> Option<Complex64> {
        self.graph.face_of_corner(v, d).and_then(|f| self.centers[f])
    }

    /// Face weights induced by the circumcenters; `None` where a neighbor
    /// is the outer face.
    pub fn induced_weights(&self) -> Vec<Option<f64>> {
        let map = &self.graph.map;
        (0..map.n_faces())
            .map(|f| {
                let u = self.centers[f]?;
                let halves = map.face_halves(f);
                if halves.iter().any(|&h| self.centers[map.face(h ^ 1)].is_none()) {
                    return None;
                }
                let (x, _) = planar_embed::face_weight_from_positions(map, f, u, |h| self.centers[map.face(h ^ 1)].expect("bounded"));
                Some(x)
            })
            .collect()
    }
}

/// Places network vertices at `f`, dual vertices at `g`, and each edge's
/// white vertex at the crossing of the primal and dual lines.
pub fn temperley_pattern(net: &Network, fig: &ReciprocalFigure) -> Result<TemperleyPattern> {
    let graph = temperley_graph_split(net)?;
    let combinatorial = temperley_graph(net)?;
    let n = net.n;
    let mut points: Vec<Complex64> = fig.f.clone();
    points.extend(&fig.g);
    let mut right_angle: f64 = 0.0;
    for (e, &[u, v]) in net.edges().iter().enumerate() {
        let [l, r] = net.sides(e);
        let (p, q) = (fig.f[u], fig.f[v]);
        let (a, b) = (fig.g[r], fig.g[l]);
        if (q - p).norm() == 0.0 || (b - a).norm() == 0.0 {
            return Err(Error::Degenerate(format!("edge {e} has zero length")));
        }
        let z = geom::line_intersection(p, q - p, a, b - a).ok_or_else(|| Error::Degenerate(format!("edge {e} is parallel to its dual")))?;
        right_angle = right_angle.max(((q - p) * (b - a).conj()).re.abs() / ((q - p).norm() * (b - a).norm()));
        points.push(z);
    }
    let scale = geom::diameter(&points).max(1e-300);
    let map = &graph.map;
    let mut centers = vec![None; map.n_faces()];
    let mut concyclicity: f64 = 0.0;
    let mut midpoint: f64 = 0.0;
    for f in map.bounded_faces() {
        let ring: Vec<Complex64> = map.face_halves(f).iter().map(|&h| points[map.origin(h)]).collect();
        // Circumcenter from a white vertex and the two blacks.
        let blacks: Vec<Complex64> = map.face_halves(f).iter().map(|&h| map.origin(h)).filter(|&x| map.color(x) == Color::Black).map(|x| points[x]).collect();
        let w = map.face_halves(f).iter().map(|&h| map.origin(h)).find(|&x| map.color(x) == Color::White).expect("white vertex");
        let c = geom::circumcenter(blacks[0], points[w], blacks[1]).ok_or_else(|| Error::Degenerate(format!("face {f} is degenerate")))?;
        let r = (blacks[0] - c).norm();
        for p in &ring {
            concyclicity = concyclicity.max(((p - c).norm() - r).abs() / scale);
        }
        midpoint = midpoint.max((c - (blacks[0] + blacks[1]) / 2.0).norm() / scale);
        centers[f] = Some(c);
    }
    let mut pattern = TemperleyPattern {
        graph,
        points,
        centers,
        report: PatternReport { concyclicity, midpoint, right_angle, weight_mismatch: 0.0, faces_compared: 0 },
    };
    let induced = pattern.induced_weights();
    let mut mismatch: f64 = 0.0;
    let mut compared = 0;
    for (f, x) in induced.iter().enumerate() {
        let Some(x) = x else { continue };
        let (v, d) = pattern.graph.corners[f];
        let d = if d >= net.n_bounded { net.n_bounded } else { d };
        let Some(cf) = combinatorial.face_of_corner(v, d) else { continue };
        let want = combinatorial.x.get(cf);
        mismatch = mismatch.max((x - want).abs() / want);
        compared += 1;
    }
    debug_assert!(n <= pattern.points.len());
    pattern.report.weight_mismatch = mismatch;
    pattern.report.faces_compared = compared;
    Ok(pattern)
}

/// One Miquel move on a cyclic face `p` with circumcenter `u`, where
/// `nbrs[i]` is the center of the circle across the side `p[i] p[i+1]`.
/// Returns the new points (`p[i]` reflected across the line through
/// `nbrs[i-1]` and `nbrs[i]`), their circumcenter, the concyclicity
/// residual of the new points, and the distance from the circumcenter to
/// the central move of `u`.
pub fn miquel_move(p: [Complex64; 4], u: Complex64, nbrs: [Complex64; 4]) -> Result<MiquelMove> {
    let q: [Complex64; 4] = std::array::from_fn(|i| geom::reflect(p[i], nbrs[(i + 3) % 4], nbrs[i]));
    let center = geom::circumcenter(q[0], q[1], q[2])
        .or_else(|| geom::circumcenter(q[0], q[2], q[3]))
        .ok_or_else(|| Error::Degenerate("Miquel points are collinear".into()))?;
    let r = (q[0] - center).norm();
    let scale = geom::diameter(&[p, q].concat()).max(1e-300);
    let concyclicity = q.iter().map(|z| ((z - center).norm() - r).abs()).fold(0.0, f64::max) / scale;
    let moved = miquel_dynamics::central_move(u, nbrs)?;
    Ok(MiquelMove { points: q, center, concyclicity, central_move_gap: (moved - center).norm() / scale })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiquelMove {
    pub points: [Complex64; 4],
    pub center: Complex64,
    pub concyclicity: f64,
    pub central_move_gap: f64,
}

/// Outcome of the star-triangle comparison at a degree-3 vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarTriangleReport {
    /// Point produced by the four Miquel moves.
    pub miquel_point: Complex64,
    /// Common point of the three perpendiculars (least squares).
    pub steiner_point: Complex64,
    /// Largest distance from the Steiner point to the three
    /// perpendiculars, relative to the scale.
    pub concurrency: f64,
    /// Dual vertex of the new triangle from the star-triangle conductances.
    pub network_point: Complex64,
    /// Spread of that dual vertex computed from each of the three faces.
    pub network_spread: f64,
    /// `|miquel - steiner| / scale`.
    pub gap: f64,
    /// `|network - steiner| / scale`.
    pub network_gap: f64,
    /// Largest concyclicity residual of the four moves.
    pub move_concyclicity: f64,
    /// Largest gap between a move's new circumcenter and the central move.
    pub central_move_gap: f64,
    pub scale: f64,
}

impl StarTriangleReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.gap < tol && self.network_gap < tol && self.concurrency < tol && self.network_spread < tol && self.move_concyclicity < tol && self.central_move_gap < tol
    }
}

/// Star-triangle move at interior vertex `s` of degree 3 whose three faces
/// are bounded. Roles by duality with a triangle: the faces around `s` are
/// `A, B, C`, `s` is `D'` and its neighbors are `B', C', A'`, so that the
/// edge `s C'` separates `A` from `B`.
pub fn star_triangle_check(net: &Network, fig: &ReciprocalFigure, pattern: &TemperleyPattern, s: usize) -> Result<StarTriangleReport> {
    if s >= net.n || net.is_boundary(s) {
        return Err(Error::Degenerate(format!("vertex {s} is not interior")));
    }
    let inc = net.incident(s);
    if inc.len() != 3 {
        return Err(Error::Degenerate(format!("vertex {s} has degree {}", inc.len())));
    }
    let nb: Vec<usize> = inc.iter().map(|&e| net.neighbor(e, s)).collect();
    // Face between consecutive edges inc[i], inc[i+1]: left of s -> nb[i].
    let face_after = |i: usize| {
        let e = inc[i];
        let [l, r] = net.sides(e);
        if net.edge(e)[0] == s {
            l
        } else {
            r
        }
    };
    let faces: Vec<usize> = (0..3).map(face_after).collect();
    if faces.iter().any(|&d| d >= net.n_bounded) || faces[0] == faces[1] || faces[1] == faces[2] || faces[0] == faces[2] {
        return Err(Error::Degenerate(format!("faces around vertex {s} must be distinct and bounded")));
    }
    let (fa, fb, fc) = (faces[0], faces[1], faces[2]);
    let (vb, vc, va) = (nb[0], nb[1], nb[2]);
    let g = |d: usize| fig.g[d];
    let f = |v: usize| fig.f[v];
    let white = |e: usize| pattern.points[pattern.graph.white(e)];
    let center = |v: usize, d: usize| pattern.corner_center(v, d).ok_or_else(|| Error::Degenerate(format!("no face at corner ({v}, {d})")));
    let (a, b, c) = (g(fa), g(fb), g(fc));
    let (d1, a1, b1, c1) = (f(s), f(va), f(vb), f(vc));
    let (wa, wb, wc) = (white(inc[2]), white(inc[0]), white(inc[1]));
    let (o_a, o_b, o_c) = (center(s, fa)?, center(s, fb)?, center(s, fc)?);
    let o_ac1 = center(vc, fa)?;
    let o_c1b = center(vc, fb)?;
    let o_ba1 = center(va, fb)?;
    let o_a1c = center(va, fc)?;
    let o_cb1 = center(vb, fc)?;
    let o_b1a = center(vb, fa)?;

    let m1 = miquel_move([d1, wa, c, wb], o_c, [o_b, o_a1c, o_cb1, o_a])?;
    let [c1_again, i_a1, c_foot, i_b1] = m1.points;
    let o = m1.center;
    let m2 = miquel_move([a, c1_again, i_b1, wb], o_a, [o_ac1, o, o_cb1, o_b1a])?;
    let [_, i_a, _, _] = m2.points;
    let o_b1 = m2.center;
    let m3 = miquel_move([b, wa, i_a1, wc], o_b, [o_ba1, o_a1c, o, o_c1b])?;
    let [_, _, _, i_b] = m3.points;
    let o_a1 = m3.center;
    let m4 = miquel_move([i_a, wc, i_b, c_foot], o, [o_ac1, o_c1b, o_a1, o_b1])?;
    let miquel_point = m4.points[3];

    let lines = [(a, Complex64::i() * (c1 - b1)), (b, Complex64::i() * (a1 - c1)), (c, Complex64::i() * (b1 - a1))];
    let steiner_point = least_squares_point(&lines)?;
    let mut pts = vec![a, b, c, a1, b1, c1, d1];
    pts.push(steiner_point);
    let scale = geom::diameter(&pts).max(1e-300);
    let concurrency = lines.iter().map(|&(p, d)| geom::line_distance(steiner_point, p, p + d)).fold(0.0, f64::max) / scale;

    // Star-triangle conductances: the new edge between the neighbors x, y
    // has c_sx c_sy / (c_sa + c_sb + c_sc); the new face lies on the side
    // of s, i.e. left of x -> y for the face after edge s x.
    let total: f64 = inc.iter().map(|&e| net.conductance[e]).sum();
    let from_face = |i: usize| {
        let j = (i + 1) % 3;
        let cxy = net.conductance[inc[i]] * net.conductance[inc[j]] / total;
        fig.g[faces[i]] + Complex64::i() * cxy * (fig.f[nb[j]] - fig.f[nb[i]])
    };
    let cands = [from_face(0), from_face(1), from_face(2)];
    let network_point = cands[0];
    let network_spread = cands.iter().map(|z| (z - network_point).norm()).fold(0.0, f64::max) / scale;

    let moves = [m1, m2, m3, m4];
    Ok(StarTriangleReport {
        miquel_point,
        steiner_point,
        concurrency,
        network_point,
        network_spread,
        gap: (miquel_point - steiner_point).norm() / scale,
        network_gap: (network_point - steiner_point).norm() / scale,
        move_concyclicity: moves.iter().map(|m| m.concyclicity).fold(0.0, f64::max),
        central_move_gap: moves.iter().map(|m| m.central_move_gap).fold(0.0, f64::max),
        scale,
    })
}

/// Least-squares common point of lines `p + t d`.
fn least_squares_point(lines: &[(Complex64, Complex64)]) -> Result<Complex64> {
    let mut a = DMatrix::<f64>::zeros(2, 2);
    let mut b = nalgebra::DVector::<f64>::zeros(2);
    for &(p, d) in lines {
        let nrm = Complex64::new(-d.im, d.re) / d.norm();
        let (nx, ny) = (nrm.re, nrm.im);
        let rhs = nx * p.re + ny * p.im;
        a[(0, 0)] += nx * nx;
        a[(0, 1)] += nx * ny;
        a[(1, 0)] += nx * ny;
        a[(1, 1)] += ny * ny;
        b[0] += nx * rhs;
        b[1] += ny * rhs;
    }
    let x = a.lu().solve(&b).ok_or_else(|| Error::Degenerate("perpendiculars are parallel".into()))?;
    Ok(Complex64::new(x[0], x[1]))
}

/// Merges parallel edges by adding their conductances. Edges keep the
/// position of their first occurrence.
pub fn merge_parallel(edges: &[[usize; 2]], c: &[f64]) -> (Vec<[usize; 2]>, Vec<f64>) {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out_e = Vec::new();
    let mut out_c = Vec::new();
    for (&[u, v], &ce) in edges.iter().zip(c) {
        let key = (u.min(v), u.max(v));
        match seen.get(&key) {
            Some(&i) => out_c[i] += ce,
            None => {
                seen.insert(key, out_e.len());
                out_e.push([u, v]);
                out_c.push(ce);
            }
        }
    }
    (out_e, out_c)
}

/// Replaces two edges in series through a degree-2 vertex `v` by one edge of
/// conductance `c1 c2 / (c1 + c2)`. Vertex `v` stays as an isolated index.
pub fn merge_series(edges: &[[usize; 2]], c: &[f64], v: usize) -> Option<(Vec<[usize; 2]>, Vec<f64>)> {
    let at: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].contains(&v)).collect();
    if at.len() != 2 {
        return None;
    }
    let other = |e: usize| if edges[e][0] == v { edges[e][1] } else { edges[e][0] };
    let (x, y) = (other(at[0]), other(at[1]));
    if x == y {
        return None;
    }
    let mut out_e = Vec::new();
    let mut out_c = Vec::new();
    for e in 0..edges.len() {
        if e == at[0] {
            out_e.push([x, y]);
            out_c.push(c[at[0]] * c[at[1]] / (c[at[0]] + c[at[1]]));
        } else if e != at[1] {
            out_e.push(edges[e]);
            out_c.push(c[e]);
        }
    }
    Some((out_e, out_c))
}

/// Square grid of `rows x cols` vertices, each cell split by a random
/// diagonal, with random conductances in `[lo, hi]`. The boundary is the
/// outer ring counterclockwise from the lower-left corner, and the drawing
/// is the unit-spaced grid.
pub fn random_grid_network<R: Rng>(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut R) -> Result<(Network, Vec<Complex64>)> {
    let id = |r: usize, c: usize| r * cols + c;
    let pos: Vec<Complex64> = (0..rows * cols).map(|k| Complex64::new((k % cols) as f64, (k / cols) as f64)).collect();
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push([id(r, c), id(r, c + 1)]);
            }
            if r + 1 < rows {
                edges.push([id(r, c), id(r + 1, c)]);
            }
            if r + 1 < rows && c + 1 < cols {
                if rng.gen_bool(0.5) {
                    edges.push([id(r, c), id(r + 1, c + 1)]);
                } else {
                    edges.push([id(r, c + 1), id(r + 1, c)]);
                }
            }
        }
    }
    let cond = (0..edges.len()).map(|_| rng.gen_range(lo..=hi)).collect();
    let mut boundary = Vec::new();
    boundary.extend((0..cols).map(|c| id(0, c)));
    boundary.extend((1..rows).map(|r| id(r, cols - 1)));
    boundary.extend((0..cols - 1).rev().map(|c| id(rows - 1, c)));
    boundary.extend((1..rows - 1).rev().map(|r| id(r, 0)));
    let net = Network::from_positions(edges, cond, &pos, boundary)?;
    Ok((net, pos))
}

/// Regular polygon with `k` corners on the unit circle, counterclockwise.
pub fn regular_polygon(k: usize) -> Vec<Complex64> {
    (0..k).map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / k as f64 - std::f64::consts::FRAC_PI_2)).collect()
}

/// A boundary triangle with one interior vertex joined to its corners.
/// Returns the network; vertex 3 is the star center.
pub fn star_network(conductances: [f64; 6]) -> Result<Network> {
    let edges = vec![[0, 1], [1, 2], [2, 0], [3, 0], [3, 1], [3, 2]];
    let faces = vec![vec![3, 0, 1], vec![3, 1, 2], vec![3, 2, 0]];
    Network::from_faces(4, edges, conductances.to_vec(), &faces, vec![0, 1, 2])
}
