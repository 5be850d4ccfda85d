//! Circle-center embeddings of planar bipartite graphs whose outer face has
//! degree 4.
//!
//! Given positive face weights and a convex quadrilateral `P`, a canonical
//! gauge `(G, F)` turns the Kasteleyn matrix into a divergence-free 1-form
//! `omega(wb) = G(w) K(w,b) F(b)`. Integrating it across edges places one
//! point per bounded face (the circle centers) and one point per boundary
//! edge (the corners of `P`).
//!
//! Conventions. Boundary vertices are `w1, b1, w2, b2` counterclockwise.
//! The corner dual to the boundary edge `w_i b_j` is `f_ij`; the quadrilateral
//! corners are `p0 = f12, p1 = f11, p2 = f21, p3 = f22` counterclockwise, with
//! sides `W1 = p1 - p0`, `B1 = p2 - p1`, `W2 = p3 - p2`, `B2 = p0 - p3`.

use std::collections::VecDeque;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::graphcore::{Color, CombMap, Half};
use crate::kasteleyn::{self, FaceWeights, KasteleynMatrix};
use crate::linalg::{self, CMat, CVec};

/// Tolerance on the residuals of the gauge equations, relative to the size
/// of the quadrilateral.
pub const GAUGE_TOL: f64 = 1e-9;
/// Tolerance on path dependence of the integrated form.
pub const PATH_TOL: f64 = 1e-8;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Directed sides of a convex counterclockwise quadrilateral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryQuad {
    pub w1: Complex64,
    pub b1: Complex64,
    pub w2: Complex64,
    pub b2: Complex64,
    /// Position of the corner `p0`.
    pub origin: Complex64,
}

impl BoundaryQuad {
    /// Quadrilateral from its corners `p0, p1, p2, p3` (counterclockwise).
    pub fn from_corners(p: [Complex64; 4]) -> Result<Self> {
        if !geom::is_convex_ccw(&p, 1e-12) || geom::signed_area(&p) <= 0.0 {
            return Err(Error::Degenerate("quadrilateral is not convex and counterclockwise".into()));
        }
        if (0..4).any(|i| p[i] == p[(i + 1) % 4]) {
            return Err(Error::Degenerate("quadrilateral has a repeated corner".into()));
        }
        Ok(BoundaryQuad { w1: p[1] - p[0], b1: p[2] - p[1], w2: p[3] - p[2], b2: p[0] - p[3], origin: p[0] })
    }

    pub fn unit_square() -> Self {
        let c = Complex64::new;
        Self::from_corners([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)]).expect("unit square")
    }

    pub fn corners(&self) -> [Complex64; 4] {
        let p0 = self.origin;
        let p1 = p0 + self.w1;
        let p2 = p1 + self.b1;
        [p0, p1, p2, p2 + self.w2]
    }

    /// Longest side length; residuals are measured relative to it.
    pub fn scale(&self) -> f64 {
        [self.w1, self.b1, self.w2, self.b2].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Index into `BoundaryQuad::corners` of the corner dual to edge `w_i b_j`
/// (zero-based `i`, `j`).
pub fn corner_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 1) => 0,
        (0, 0) => 1,
        (1, 0) => 2,
        _ => 3,
    }
}

/// The four boundary vertices and edges of a map with a degree-4 outer face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLabels {
    pub w: [usize; 2],
    pub b: [usize; 2],
    /// `edges[i][j]` is the boundary edge joining `w_i` and `b_j`.
    pub edges: [[usize; 2]; 2],
}

impl BoundaryLabels {
    /// Labels with `w1` the lowest-numbered white boundary vertex.
    pub fn from_map(map: &CombMap) -> Result<Self> {
        let o = map.outer_face().ok_or_else(|| Error::InvalidMap("map has no outer face".into()))?;
        let halves = map.face_halves(o);
        if halves.len() != 4 {
            return Err(Error::InvalidMap(format!("outer face has degree {}, expected 4", halves.len())));
        }
        let verts: Vec<usize> = halves.iter().map(|&h| map.origin(h)).collect();
        let mut uniq = verts.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != 4 {
            return Err(Error::InvalidMap("outer face is not a simple 4-cycle".into()));
        }
        // The outer face runs clockwise around the graph.
        let start = (0..4)
            .filter(|&k| map.color(verts[k]) == Color::White)
            .min_by_key(|&k| verts[k])
            .expect("outer face has a white vertex");
        let ccw: Vec<usize> = (0..4).map(|k| verts[(start + 4 - k) % 4]).collect();
        let halves_ccw: Vec<Half> = (0..4).map(|k| halves[(start + 4 - k - 1) % 4]).collect();
        // halves_ccw[k] joins ccw[k] and ccw[k + 1].
        let (w1, b1, w2, b2) = (ccw[0], ccw[1], ccw[2], ccw[3]);
        let e = |k: usize| halves_ccw[k] / 2;
        Ok(BoundaryLabels { w: [w1, w2], b: [b1, b2], edges: [[e(0), e(3)], [e(1), e(2)]] })
    }

    /// `(i, j)` such that `e` joins `w_i` and `b_j`, if `e` is a boundary edge.
    pub fn edge_label(&self, e: usize) -> Option<(usize, usize)> {
        for i in 0..2 {
            for j in 0..2 {
                if self.edges[i][j] == e {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Gauge functions on whites and blacks (indexed by color class), normalized
/// so that `G(w1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugePair {
    pub g: Vec<Complex64>,
    pub f: Vec<Complex64>,
}

impl GaugePair {
    /// The 1-form on the edge of half-edge `2e`: `G(w) K(w,b) F(b)`.
    pub fn omega(&self, map: &CombMap, k: &KasteleynMatrix) -> Vec<Complex64> {
        map.edges()
            .iter()
            .enumerate()
            .map(|(e, &[w, b])| self.g[map.color_index(w)] * k.entries[e] * self.f[map.color_index(b)])
            .collect()
    }
}

/// Largest residual of the canonical-gauge equations, divided by the
/// quadrilateral scale.
pub fn gauge_residual(
    map: &CombMap,
    k: &KasteleynMatrix,
    quad: &BoundaryQuad,
    labels: &BoundaryLabels,
    gauge: &GaugePair,
) -> f64 {
    let omega = gauge.omega(map, k);
    let mut row = vec![zero(); map.n_vertices()];
    for (e, &[w, b]) in map.edges().iter().enumerate() {
        row[w] += omega[e];
        row[b] += omega[e];
    }
    let mut worst: f64 = 0.0;
    for v in 0..map.n_vertices() {
        let target = if v == labels.w[0] {
            -quad.w1
        } else if v == labels.w[1] {
            -quad.w2
        } else if v == labels.b[0] {
            quad.b1
        } else if v == labels.b[1] {
            quad.b2
        } else {
            zero()
        };
        worst = worst.max((row[v] - target).norm());
    }
    worst / quad.scale()
}

struct GaugeSystem<'a> {
    map: &'a CombMap,
    k: CMat,
    quad: BoundaryQuad,
    labels: &'a BoundaryLabels,
}

impl GaugeSystem<'_> {
    fn n(&self) -> usize {
        self.k.nrows()
    }

    fn split(&self, z: &CVec) -> (CVec, CVec) {
        let n = self.n();
        (z.rows(0, n).into_owned(), z.rows(n, n).into_owned())
    }

    /// Residuals and Jacobian: interior rows of `K F`, interior columns of
    /// `G^T K`, the two white boundary equations, the first black one and
    /// the normalization `G(w1) = 1`.
    fn eval(&self, z: &CVec) -> (CVec, CMat) {
        let n = self.n();
        let (g, f) = self.split(z);
        let kf = &self.k * &f;
        let gk = self.k.transpose() * &g;
        let iw = [self.map.color_index(self.labels.w[0]), self.map.color_index(self.labels.w[1])];
        let ib = [self.map.color_index(self.labels.b[0]), self.map.color_index(self.labels.b[1])];
        let mut r = CVec::zeros(2 * n);
        let mut j = CMat::zeros(2 * n, 2 * n);
        let mut row = 0;
        for w in 0..n {
            if iw.contains(&w) {
                continue;
            }
            r[row] = kf[w];
            for b in 0..n {
                j[(row, n + b)] = self.k[(w, b)];
            }
            row += 1;
        }
        for b in 0..n {
            if ib.contains(&b) {
                continue;
            }
            r[row] = gk[b];
            for w in 0..n {
                j[(row, w)] = self.k[(w, b)];
            }
            row += 1;
        }
        for (i, target) in [(0, self.quad.w1), (1, self.quad.w2)] {
            let w = iw[i];
            r[row] = g[w] * kf[w] + target;
            j[(row, w)] += kf[w];
            for b in 0..n {
                j[(row, n + b)] += g[w] * self.k[(w, b)];
            }
            row += 1;
        }
        let b = ib[0];
        r[row] = f[b] * gk[b] - self.quad.b1;
        j[(row, n + b)] += gk[b];
        for w in 0..n {
            j[(row, w)] += f[b] * self.k[(w, b)];
        }
        row += 1;
        r[row] = g[iw[0]] - one();
        j[(row, iw[0])] = one();
        (r, j)
    }

    fn polish(&self, g: &CVec, f: &CVec) -> Option<GaugePair> {
        let n = self.n();
        let w1 = self.map.color_index(self.labels.w[0]);
        if g[w1].norm() == 0.0 {
            return None;
        }
        let s = g[w1];
        let mut z = CVec::zeros(2 * n);
        for i in 0..n {
            z[i] = g[i] / s;
            z[n + i] = f[i] * s;
        }
        let out = linalg::newton(|z| self.eval(z), z, 1e-14 * self.quad.scale(), 60);
        let (g, f) = self.split(&out.x);
        Some(GaugePair { g: g.iter().copied().collect(), f: f.iter().copied().collect() })
    }
}

/// Solutions obtained by reducing the gauge equations to one quadratic.
///
/// The interior equations are linear in `F` and in `G` separately, each with
/// a two-dimensional solution space for a nondegenerate graph. Writing
/// `F = Fa x`, `G = Ga y`, the four boundary equations become a quadratic in
/// one unknown after fixing the common scaling of `x` and `y`.
fn algebraic_candidates(sys: &GaugeSystem) -> Vec<(CVec, CVec)> {
    let n = sys.n();
    let iw = [sys.map.color_index(sys.labels.w[0]), sys.map.color_index(sys.labels.w[1])];
    let ib = [sys.map.color_index(sys.labels.b[0]), sys.map.color_index(sys.labels.b[1])];
    let mut rows = CMat::zeros(n, n);
    let mut cols = CMat::zeros(n, n);
    for w in (0..n).filter(|w| !iw.contains(w)) {
        rows.set_row(w, &sys.k.row(w));
    }
    for b in (0..n).filter(|b| !ib.contains(b)) {
        cols.set_row(b, &sys.k.column(b).transpose());
    }
    let null2 = |m: &CMat| -> Option<CMat> {
        let (right, _, values) = linalg::null_vectors(m, 2);
        let top = values[0].max(1e-300);
        if values[n - 2] > 1e-10 * top || (n > 2 && values[n - 3] < 1e-8 * top) {
            return None;
        }
        Some(CMat::from_columns(&right))
    };
    let (Some(fa), Some(ga)) = (null2(&rows), null2(&cols)) else {
        return Vec::new();
    };
    let kfa = &sys.k * &fa;
    let gak = ga.transpose() * &sys.k;
    let a = Matrix2::new(ga[(iw[0], 0)], ga[(iw[0], 1)], ga[(iw[1], 0)], ga[(iw[1], 1)]);
    let c = Matrix2::new(kfa[(iw[0], 0)], kfa[(iw[0], 1)], kfa[(iw[1], 0)], kfa[(iw[1], 1)]);
    let (Some(ainv), Some(cinv)) = (a.try_inverse(), c.try_inverse()) else {
        return Vec::new();
    };
    let (w1, w2) = (sys.quad.w1, sys.quad.w2);
    let mut best: Option<[Complex64; 2]> = None;
    let mut best_lead = 0.0;
    for (jj, target) in [(0, sys.quad.b1), (1, sys.quad.b2)] {
        let b = ib[jj];
        let d = nalgebra::RowVector2::new(fa[(b, 0)], fa[(b, 1)]) * cinv;
        let e = nalgebra::RowVector2::new(gak[(0, b)], gak[(1, b)]) * ainv;
        let (al, be, ga_, de) = (d[0], d[1], e[0], e[1]);
        let qa = -be * w2 * ga_;
        let qb = -al * w1 * ga_ - be * w2 * de - target;
        let qc = -al * w1 * de;
        let lead = qa.norm() / (qa.norm() + qb.norm() + qc.norm()).max(1e-300);
        if lead > best_lead {
            if let Ok(r) = linalg::quadratic_roots(qa, qb, qc) {
                best = Some(r);
                best_lead = lead;
            }
        }
    }
    let Some(roots) = best else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for t in roots {
        if t.norm() < 1e-14 {
            continue;
        }
        let y = ainv * nalgebra::Vector2::new(t, one());
        let x = cinv * nalgebra::Vector2::new(-w1 / t, -w2);
        let f = &fa * CVec::from_column_slice(x.as_slice());
        let g = &ga * CVec::from_column_slice(y.as_slice());
        out.push((g, f));
    }
    out
}

/// Options for the canonical-gauge solver.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Random Newton restarts run in addition to the algebraic reduction.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { restarts: 16, seed: 0 }
    }
}

/// All canonical gauges found for the given boundary, deduplicated by their
/// center embeddings and sorted for determinism.
pub fn solve_canonical_gauge(
    map: &CombMap,
    k: &KasteleynMatrix,
    quad: &BoundaryQuad,
    labels: &BoundaryLabels,
    opts: &SolveOptions,
) -> Result<Vec<GaugePair>> {
    if k.n_white != k.n_black {
        return Err(Error::NotSquare { rows: k.n_white, cols: k.n_black });
    }
    let sys = GaugeSystem { map, k: k.matrix(map), quad: *quad, labels };
    let n = sys.n();
    let mut candidates: Vec<GaugePair> = Vec::new();
    for (g, f) in algebraic_candidates(&sys) {
        if let Some(p) = sys.polish(&g, &f) {
            candidates.push(p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random = |rng: &mut ChaCha8Rng| {
        CVec::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    };
    for _ in 0..opts.restarts {
        let g = random(&mut rng);
        let f = random(&mut rng);
        if let Some(p) = sys.polish(&g, &f) {
            candidates.push(p);
        }
    }
    let mut best = f64::INFINITY;
    let mut found: Vec<(GaugePair, CenterEmbedding)> = Vec::new();
    for p in candidates {
        let res = gauge_residual(map, k, quad, labels, &p);
        best = best.min(res);
        if !(res < GAUGE_TOL) {
            continue;
        }
        let Ok(centers) = integrate_form(map, &p.omega(map, k), quad, labels) else {
            continue;
        };
        let dup = found.iter().any(|(_, c)| c.distance(&centers) < 1e-6 * quad.scale());
        if !dup {
            found.push((p, centers));
        }
    }
    if found.is_empty() {
        return Err(Error::NoGauge { best_residual: best });
    }
    found.sort_by(|(_, a), (_, b)| a.sort_key().partial_cmp(&b.sort_key()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(found.into_iter().map(|(p, _)| p).collect())
}

/// Circle centers: one point per bounded face and, for each boundary edge,
/// the corner of the quadrilateral dual to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterEmbedding {
    /// Indexed by face; `None` for the outer face.
    pub faces: Vec<Option<Complex64>>,
    /// Indexed by edge; `Some` exactly on boundary edges.
    pub corners: Vec<Option<Complex64>>,
}

impl CenterEmbedding {
    pub fn face(&self, f: usize) -> Complex64 {
        self.faces[f].expect("bounded face")
    }

    /// Position of the dual vertex on the far side of `h` from `face(h)`.
    pub fn across(&self, map: &CombMap, h: Half) -> Complex64 {
        let g = map.face(h ^ 1);
        if map.is_outer(g) {
            self.corners[h / 2].expect("boundary edge has a corner")
        } else {
            self.face(g)
        }
    }

    /// Largest distance between corresponding dual vertices.
    pub fn distance(&self, other: &CenterEmbedding) -> f64 {
        let a = self.faces.iter().zip(&other.faces);
        let b = self.corners.iter().zip(&other.corners);
        a.chain(b)
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => (x - y).norm(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Bounded-face centers, in face order.
    pub fn points(&self) -> Vec<Complex64> {
        self.faces.iter().flatten().copied().collect()
    }

    fn sort_key(&self) -> Vec<f64> {
        self.points().iter().flat_map(|z| [z.re, z.im]).collect()
    }

    /// Polygon of dual vertices around primal vertex `v`, counterclockwise.
    pub fn dual_face(&self, map: &CombMap, v: usize) -> Vec<Complex64> {
        let mut poly = Vec::new();
        for h in map.outgoing(v) {
            let f = map.face(h);
            if map.is_outer(f) {
                poly.push(self.corners[h / 2].expect("corner"));
                poly.push(self.corners[map.rot_next(h) / 2].expect("corner"));
            } else {
                poly.push(self.face(f));
            }
        }
        poly
    }
}

/// Integrates the 1-form `omega` (indexed by edge, value on the half-edge
/// running white to black) starting from `root` with `phi(root) = 0`. The
/// second value is the largest inconsistency met on non-tree edges.
fn integrate_from(map: &CombMap, omega: &[Complex64], root: usize) -> (CenterEmbedding, f64) {
    let mut faces = vec![None; map.n_faces()];
    let mut corners = vec![None; map.n_edges()];
    let mut defect: f64 = 0.0;
    faces[root] = Some(zero());
    let mut queue = VecDeque::from([root]);
    while let Some(f) = queue.pop_front() {
        let u = faces[f].expect("visited");
        for &h in map.face_halves(f) {
            let w = if h % 2 == 0 { omega[h / 2] } else { -omega[h / 2] };
            let target = u - w;
            let g = map.face(h ^ 1);
            let slot = if map.is_outer(g) { &mut corners[h / 2] } else { &mut faces[g] };
            match slot {
                Some(old) => defect = defect.max((*old - target).norm()),
                None => {
                    *slot = Some(target);
                    if !map.is_outer(g) {
                        queue.push_back(g);
                    }
                }
            }
        }
    }
    (CenterEmbedding { faces, corners }, defect)
}

fn integrate_rooted(
    map: &CombMap,
    omega: &[Complex64],
    quad: &BoundaryQuad,
    labels: &BoundaryLabels,
    root: usize,
) -> Result<CenterEmbedding> {
    let (mut emb, defect) = integrate_from(map, omega, root);
    if defect > PATH_TOL * quad.scale() {
        return Err(Error::PathDependent(defect / quad.scale()));
    }
    if emb.faces.iter().enumerate().any(|(f, z)| z.is_none() && !map.is_outer(f)) {
        return Err(Error::InvalidMap("dual graph is disconnected".into()));
    }
    let p = quad.corners();
    let anchor = emb.corners[labels.edges[0][1]].ok_or_else(|| Error::InvalidMap("missing corner".into()))?;
    let shift = p[0] - anchor;
    for z in emb.faces.iter_mut().chain(emb.corners.iter_mut()).flatten() {
        *z += shift;
    }
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let z = emb.corners[labels.edges[i][j]].expect("corner");
            worst = worst.max((z - p[corner_index(i, j)]).norm());
        }
    }
    if worst > PATH_TOL * quad.scale() {
        return Err(Error::PathDependent(worst / quad.scale()));
    }
    Ok(emb)
}

/// Integrates `phi(left) - phi(right) = omega(wb)` over the dual graph and
/// translates so that the corners land on the quadrilateral.
pub fn integrate_form(
    map: &CombMap,
    omega: &[Complex64],
    quad: &BoundaryQuad,
    labels: &BoundaryLabels,
) -> Result<CenterEmbedding> {
    let root = map.bounded_faces().next().ok_or_else(|| Error::InvalidMap("no bounded face".into()))?;
    integrate_rooted(map, omega, quad, labels, root)
}

/// Same as `integrate_form` but starting the traversal at another face.
pub fn integrate_form_from(
    map: &CombMap,
    omega: &[Complex64],
    quad: &BoundaryQuad,
    labels: &BoundaryLabels,
    root: usize,
) -> Result<CenterEmbedding> {
    if map.is_outer(root) {
        return Err(Error::InvalidMap("integration root must be a bounded face".into()));
    }
    integrate_rooted(map, omega, quad, labels, root)
}

/// Face weight of a bounded face from dual positions: `(-1)^(k+1)` times
/// the alternating quotient of center differences, together with the
/// relative size of its imaginary part.
pub fn face_weight_from_positions(map: &CombMap, f: usize, u: Complex64, across: impl Fn(Half) -> Complex64) -> (f64, f64) {
    let mut q = one();
    for &h in map.face_halves(f) {
        let un = across(h);
        if h % 2 == 0 {
            q *= u - un;
        } else {
            q /= un - u;
        }
    }
    let k = map.face_degree(f) / 2;
    if k.is_multiple_of(2) {
        q = -q;
    }
    (q.re, q.im.abs() / q.norm().max(1e-300))
}

/// Face weights recovered from centers. The outer-face entry is 0.
pub fn x_from_centers(map: &CombMap, centers: &CenterEmbedding) -> Result<FaceWeights> {
    let mut out = vec![0.0; map.n_faces()];
    for f in map.bounded_faces() {
        let (x, imag) = face_weight_from_positions(map, f, centers.face(f), |h| centers.across(map, h));
        if imag > kasteleyn::KASTELEYN_TOL || x <= 0.0 {
            return Err(Error::NotKasteleyn { face: f, imag });
        }
        out[f] = x;
    }
    Ok(FaceWeights(out))
}

/// Largest deviation from `pi` of the sum of angles at `u` belonging to
/// black vertices, and the largest deviation of the total angle from `2 pi`.
pub fn angle_defect(map: &CombMap, f: usize, u: Complex64, across: impl Fn(Half) -> Complex64) -> (f64, f64) {
    let halves = map.face_halves(f);
    let n = halves.len();
    let mut black = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        let h = halves[i];
        let a = geom::ccw_angle(across(h) - u, across(halves[(i + 1) % n]) - u);
        total += a;
        if map.color(map.dest(h)) == Color::Black {
            black += a;
        }
    }
    ((black - std::f64::consts::PI).abs(), (total - 2.0 * std::f64::consts::PI).abs())
}

/// Largest black-angle defect over all bounded faces.
pub fn angle_condition(map: &CombMap, centers: &CenterEmbedding) -> f64 {
    map.bounded_faces()
        .map(|f| angle_defect(map, f, centers.face(f), |h| centers.across(map, h)).0)
        .fold(0.0, f64::max)
}

/// Whether every dual face is convex and counterclockwise and every bounded
/// face sees its neighbors once around.
pub fn is_convex_embedding(map: &CombMap, centers: &CenterEmbedding) -> bool {
    let faces_ok = (0..map.n_vertices()).all(|v| {
        let poly = centers.dual_face(map, v);
        geom::is_convex_ccw(&poly, 1e-12) && geom::signed_area(&poly) > 0.0
    });
    let turns_ok = map
        .bounded_faces()
        .all(|f| angle_defect(map, f, centers.face(f), |h| centers.across(map, h)).1 < 1e-9);
    faces_ok && turns_ok
}

/// Primal vertex positions and face radii of a circle pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirclePattern {
    pub vertices: Vec<Complex64>,
    /// Radius per face; the outer-face entry is the radius of the circle
    /// through the outer vertices.
    pub radii: Vec<f64>,
    /// Center of the circle through the outer vertices.
    pub outer_center: Option<Complex64>,
    /// Largest relative deviation of a vertex from its face circles.
    pub circle_residual: f64,
}

/// Places the primal vertices by reflecting `z_root` across the lines
/// joining the centers on either side of each edge.
pub fn reconstruct_pattern(
    map: &CombMap,
    centers: &CenterEmbedding,
    root: usize,
    z_root: Complex64,
) -> Result<CirclePattern> {
    let pts: Vec<Complex64> = centers.faces.iter().chain(&centers.corners).flatten().copied().collect();
    let scale = geom::diameter(&pts).max(1e-300);
    let mut z: Vec<Option<Complex64>> = vec![None; map.n_vertices()];
    z[root] = Some(z_root);
    let mut queue = VecDeque::from([root]);
    let mut defect: f64 = 0.0;
    while let Some(v) = queue.pop_front() {
        let zv = z[v].expect("visited");
        for h in map.outgoing(v) {
            let a = centers.across(map, h ^ 1);
            let b = centers.across(map, h);
            let target = geom::reflect(zv, a, b);
            let d = map.dest(h);
            match z[d] {
                Some(old) => defect = defect.max((old - target).norm()),
                None => {
                    z[d] = Some(target);
                    queue.push_back(d);
                }
            }
        }
    }
    if defect > PATH_TOL * scale {
        return Err(Error::AngleCondition(defect / scale));
    }
    let vertices: Vec<Complex64> = z.into_iter().map(|p| p.ok_or_else(|| Error::InvalidMap("graph is disconnected".into()))).collect::<Result<_>>()?;
    let mut radii = vec![0.0; map.n_faces()];
    let mut circle_residual: f64 = 0.0;
    let mut outer_center = None;
    for f in 0..map.n_faces() {
        let ring: Vec<Complex64> = map.face_halves(f).iter().map(|&h| vertices[map.origin(h)]).collect();
        let c = if map.is_outer(f) {
            let c = geom::circumcenter(ring[0], ring[1], ring[2]);
            outer_center = c;
            match c {
                Some(c) => c,
                None => {
                    circle_residual = f64::INFINITY;
                    continue;
                }
            }
        } else {
            centers.face(f)
        };
        let r = (ring[0] - c).norm();
        radii[f] = r;
        for p in &ring {
            circle_residual = circle_residual.max(((p - c).norm() - r).abs() / scale);
        }
    }
    Ok(CirclePattern { vertices, radii, outer_center, circle_residual })
}

/// Default starting point for `reconstruct_pattern`: the centroid of the
/// dual face of the first white vertex.
pub fn default_root(map: &CombMap, centers: &CenterEmbedding) -> (usize, Complex64) {
    let w = map.whites()[0];
    let poly = centers.dual_face(map, w);
    let c = poly.iter().sum::<Complex64>() / poly.len() as f64;
    (w, c)
}

/// The two centers of the 4-cycle: roots of
/// `-(q1 - u)(q3 - u) / ((q0 - u)(q2 - u)) = X`.
pub fn solve_quad_center(q: [Complex64; 4], x: f64) -> Result<[Complex64; 2]> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidWeight { edge: 0, value: x });
    }
    if geom::signed_area(&q).abs() <= 1e-14 * geom::diameter(&q).powi(2) {
        return Err(Error::Degenerate("collinear quadrilateral".into()));
    }
    let a = Complex64::new(1.0 + x, 0.0);
    let b = -(q[1] + q[3] + (q[0] + q[2]) * x);
    let c = q[1] * q[3] + q[0] * q[2] * x;
    linalg::quadratic_roots(a, b, c)
}

/// A solved instance with its diagnostics.
#[derive(Clone, Debug)]
pub struct PlanarSolution {
    pub gauge: GaugePair,
    pub centers: CenterEmbedding,
    pub pattern: CirclePattern,
    pub gauge_residual: f64,
    pub angle_residual: f64,
    pub convex: bool,
    /// Largest relative error of the recovered face weights.
    pub x_roundtrip: f64,
}

/// Full pipeline: face weights to Kasteleyn matrix, canonical gauges,
/// centers and circle patterns. Non-embedded solutions are kept and flagged.
pub fn embed_planar(map: &CombMap, x: &[f64], quad: &BoundaryQuad, opts: &SolveOptions) -> Result<Vec<PlanarSolution>> {
    let labels = BoundaryLabels::from_map(map)?;
    let weights = kasteleyn::edge_weights_from_faces(map, x)?;
    let k = kasteleyn::assign_signs(map, &weights)?;
    let gauges = solve_canonical_gauge(map, &k, quad, &labels, opts)?;
    let mut out = Vec::new();
    for gauge in gauges {
        let centers = integrate_form(map, &gauge.omega(map, &k), quad, &labels)?;
        let gauge_residual = gauge_residual(map, &k, quad, &labels, &gauge);
        let angle_residual = angle_condition(map, &centers);
        let convex = is_convex_embedding(map, &centers);
        let x_roundtrip = match x_from_centers(map, &centers) {
            Ok(xs) => map.bounded_faces().map(|f| (xs.get(f) - x[f]).abs() / x[f]).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        };
        let (root, z0) = default_root(map, &centers);
        let pattern = reconstruct_pattern(map, &centers, root, z0)?;
        out.push(PlanarSolution { gauge, centers, pattern, gauge_residual, angle_residual, convex, x_roundtrip });
    }
    Ok(out)
}
