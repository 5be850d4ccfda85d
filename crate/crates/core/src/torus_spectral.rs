//! Spectral data of dimer models on the torus and the periodic circle-center
//! embeddings they define.
//!
//! `lambda_i` counts signed crossings of a dual cycle parallel to the
//! period `p_i`. An edge whose black endpoint sits in the domain shifted by
//! `d = (d1, d2)` from its white endpoint gets the exponent `(d2, -d1)`, and
//! kernels extend to the universal cover by `F(b + s) = chi(s) F(b)`,
//! `G(w + s) = G(w) / chi(s)` with `chi(s) = lambda1^s2 lambda2^-s1`. With
//! this convention the periods satisfy `V2 / V1 = zeta`.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::graphcore::{CombMap, Color, Half, Surface};
use crate::kasteleyn;
use crate::linalg::{self, CMat, CVec};
use crate::planar_embed;

type Shift = [i32; 2];

fn add(a: Shift, b: Shift) -> Shift {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: Shift, b: Shift) -> Shift {
    [a[0] - b[0], a[1] - b[1]]
}

fn pow_shift(lambda: [Complex64; 2], s: Shift) -> Complex64 {
    lambda[0].powi(s[0]) * lambda[1].powi(s[1])
}

/// Exponent of `lambda` picked up by a domain shift.
pub fn crossing_exponent(s: Shift) -> Shift {
    [s[1], -s[0]]
}

/// Factor `chi(s)` relating kernel values on translated vertices.
pub fn translation_factor(lambda: [Complex64; 2], s: Shift) -> Complex64 {
    pow_shift(lambda, crossing_exponent(s))
}

/// Kasteleyn matrix with spectral parameters, stored as real signed edge
/// entries plus homology exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaKasteleyn {
    pub base: Vec<f64>,
    pub exponents: Vec<Shift>,
    /// `(white index, black index)` per edge.
    pub slots: Vec<[usize; 2]>,
    pub n: usize,
}

impl LambdaKasteleyn {
    /// Real Kasteleyn signs times the given positive edge weights.
    pub fn new(map: &CombMap, weights: &[f64]) -> Result<Self> {
        if map.surface() != Surface::Torus {
            return Err(Error::InvalidMap("spectral parameters need a torus map".into()));
        }
        if map.whites().len() != map.blacks().len() {
            return Err(Error::NotSquare { rows: map.whites().len(), cols: map.blacks().len() });
        }
        let k = kasteleyn::assign_signs(map, weights)?;
        Ok(LambdaKasteleyn {
            base: k.entries.iter().map(|z| z.re).collect(),
            exponents: (0..map.n_edges()).map(|e| crossing_exponent(map.edge_offset(e))).collect(),
            slots: map.edges().iter().map(|&[w, b]| [map.color_index(w), map.color_index(b)]).collect(),
            n: map.whites().len(),
        })
    }

    /// Entry of edge `e` at `lambda`.
    pub fn entry(&self, e: usize, lambda: [Complex64; 2]) -> Complex64 {
        self.base[e] * pow_shift(lambda, self.exponents[e])
    }

    pub fn matrix(&self, lambda: [Complex64; 2]) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for e in 0..self.base.len() {
            let [w, b] = self.slots[e];
            m[(w, b)] += self.entry(e, lambda);
        }
        m
    }

    /// `lambda_i dK/dlambda_i`.
    pub fn log_derivative(&self, lambda: [Complex64; 2], i: usize) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for e in 0..self.base.len() {
            let [w, b] = self.slots[e];
            m[(w, b)] += self.entry(e, lambda) * self.exponents[e][i] as f64;
        }
        m
    }

    pub fn det(&self, lambda: [Complex64; 2]) -> Complex64 {
        linalg::det(&self.matrix(lambda))
    }

    /// Bounds on the exponents of `det K`: per white vertex, the extreme
    /// exponents of its edges, summed.
    pub fn degree_bounds(&self) -> (Shift, Shift) {
        let mut lo = [0, 0];
        let mut hi = [0, 0];
        for w in 0..self.n {
            for i in 0..2 {
                let ex = (0..self.base.len()).filter(|&e| self.slots[e][0] == w).map(|e| self.exponents[e][i]);
                lo[i] += ex.clone().min().unwrap_or(0);
                hi[i] += ex.max().unwrap_or(0);
            }
        }
        (lo, hi)
    }
}

/// Laurent polynomial `sum c[a1][a2] lambda1^(a1+min1) lambda2^(a2+min2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentPoly {
    pub min: Shift,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl LaurentPoly {
    pub fn eval(&self, lambda: [Complex64; 2]) -> Complex64 {
        self.terms().map(|(a, c)| c * pow_shift(lambda, a)).sum()
    }

    /// `(lambda1 P_lambda1, lambda2 P_lambda2)`.
    pub fn log_derivatives(&self, lambda: [Complex64; 2]) -> [Complex64; 2] {
        let mut d = [Complex64::new(0.0, 0.0); 2];
        for (a, c) in self.terms() {
            let v = c * pow_shift(lambda, a);
            d[0] += v * a[0] as f64;
            d[1] += v * a[1] as f64;
        }
        d
    }

    /// Logarithmic slope `lambda2 P_lambda2 / (lambda1 P_lambda1)`.
    pub fn log_slope(&self, lambda: [Complex64; 2]) -> Complex64 {
        let d = self.log_derivatives(lambda);
        d[1] / d[0]
    }

    pub fn terms(&self) -> impl Iterator<Item = (Shift, Complex64)> + '_ {
        self.coeffs.iter().enumerate().flat_map(move |(i, row)| {
            row.iter().enumerate().map(move |(j, &c)| ([i as i32 + self.min[0], j as i32 + self.min[1]], c))
        })
    }

    pub fn scale(&self) -> f64 {
        self.terms().map(|(_, c)| c.norm()).sum()
    }

    /// Exponents and coefficients above `tol` relative to the largest.
    pub fn monomials(&self, tol: f64) -> Vec<(Shift, Complex64)> {
        let m = self.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        self.terms().filter(|(_, c)| c.norm() > tol * m).collect()
    }

    /// Coefficients of `P(lambda1, .)` as an ordinary polynomial in
    /// `lambda2`, shifted by `lambda2^-min2`.
    fn slice(&self, l1: Complex64) -> Vec<Complex64> {
        let len = self.coeffs.first().map_or(0, Vec::len);
        (0..len)
            .map(|j| (0..self.coeffs.len()).map(|i| self.coeffs[i][j] * l1.powi(i as i32 + self.min[0])).sum())
            .collect()
    }
}

/// Relative residual below which the recovered coefficients are accepted.
pub const ALIAS_TOL: f64 = 1e-9;

/// Characteristic polynomial by evaluation on roots of unity and an inverse
/// DFT, on a grid one larger than the degree span in each direction.
pub fn char_poly(k: &LambdaKasteleyn) -> Result<LaurentPoly> {
    let (lo, hi) = k.degree_bounds();
    char_poly_on_grid(k, lo, [(hi[0] - lo[0] + 2) as usize, (hi[1] - lo[1] + 2) as usize])
}

/// Inverse-DFT recovery on an explicit `grid` with exponents starting at
/// `min`. Aliasing is detected by comparing with direct determinants at
/// fixed off-torus points.
pub fn char_poly_on_grid(k: &LambdaKasteleyn, min: Shift, grid: [usize; 2]) -> Result<LaurentPoly> {
    let [n1, n2] = grid;
    let root = |k: usize, n: usize| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
    let mut samples = vec![vec![Complex64::new(0.0, 0.0); n2]; n1];
    for (k1, row) in samples.iter_mut().enumerate() {
        for (k2, s) in row.iter_mut().enumerate() {
            let lambda = [root(k1, n1), root(k2, n2)];
            *s = k.det(lambda) * pow_shift(lambda, [-min[0], -min[1]]);
        }
    }
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); n2]; n1];
    for (a1, row) in coeffs.iter_mut().enumerate() {
        for (a2, c) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k1, srow) in samples.iter().enumerate() {
                for (k2, s) in srow.iter().enumerate() {
                    acc += s * root((k1 * a1) % n1, n1).conj() * root((k2 * a2) % n2, n2).conj();
                }
            }
            *c = acc / (n1 * n2) as f64;
        }
    }
    let poly = LaurentPoly { min, coeffs };
    let probes = [
        [Complex64::new(0.83, 0.31), Complex64::new(-0.4, 1.17)],
        [Complex64::new(1.21, -0.52), Complex64::new(0.62, 0.44)],
        [Complex64::new(-0.71, -0.9), Complex64::new(1.3, 0.2)],
    ];
    let mut worst: f64 = 0.0;
    for p in probes {
        let direct = k.det(p);
        let scale = poly
            .terms()
            .map(|(a, c)| c.norm() * pow_shift(p, a).norm())
            .sum::<f64>()
            .max(direct.norm())
            .max(1e-300);
        worst = worst.max((poly.eval(p) - direct).norm() / scale);
    }
    if worst > ALIAS_TOL {
        return Err(Error::Aliasing(worst));
    }
    Ok(poly)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    /// Nonreal simple zero: one-dimensional kernel.
    InteriorSimple,
    /// Real double zero: two-dimensional kernel.
    RealNode,
}

/// A zero of `P` on the unit torus with its kernel data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: [Complex64; 2],
    pub kind: PointKind,
    /// Kernel of `K` (black vertices) and of `K^T` (white vertices); two
    /// vectors each at a node.
    pub kernel_f: Vec<Vec<Complex64>>,
    pub kernel_g: Vec<Vec<Complex64>>,
    /// The selected kernel pair: at a node, the limit from nearby simple
    /// zeros with `Im zeta > 0`.
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub zeta: Complex64,
    pub singular_values: Vec<f64>,
    /// `|P(lambda)|` relative to the coefficient norm.
    pub residual: f64,
}

impl SpectralPoint {
    /// The conjugate zero with conjugated kernels and slope.
    pub fn conjugate(&self) -> SpectralPoint {
        let cj = |v: &Vec<Complex64>| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
        SpectralPoint {
            lambda: self.lambda.map(|z| z.conj()),
            kind: self.kind,
            kernel_f: self.kernel_f.iter().map(cj).collect(),
            kernel_g: self.kernel_g.iter().map(cj).collect(),
            f: cj(&self.f),
            g: cj(&self.g),
            zeta: self.zeta.conj(),
            singular_values: self.singular_values.clone(),
            residual: self.residual,
        }
    }
}

/// Ratio `sigma_{n-1} / sigma_max` above which a zero is simple.
pub const SIMPLE_RATIO: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Number of `theta1` samples on the unit circle.
    pub samples: usize,
    /// Relative tolerance on `|P|` for accepting a zero.
    pub zero_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { samples: 720, zero_tol: 1e-10 }
    }
}

fn to_vec(v: &CVec) -> Vec<Complex64> {
    v.iter().copied().collect()
}

/// Refines a zero of `P` on the unit torus by Newton in `(theta1, theta2)`.
fn refine_on_torus(poly: &LaurentPoly, mut th: [f64; 2]) -> [f64; 2] {
    for _ in 0..60 {
        let lambda = th.map(|t| Complex64::from_polar(1.0, t));
        let p = poly.eval(lambda);
        if p.norm() < 1e-15 * poly.scale() {
            break;
        }
        // dP/dtheta_j = i lambda_j P_j
        let d = poly.log_derivatives(lambda).map(|z| z * Complex64::i());
        let det = d[0].re * d[1].im - d[1].re * d[0].im;
        if det.abs() < 1e-300 {
            break;
        }
        let s0 = (-p.re * d[1].im + p.im * d[1].re) / det;
        let s1 = (-d[0].re * p.im + d[0].im * p.re) / det;
        th[0] += s0;
        th[1] += s1;
        if s0.abs() + s1.abs() < 1e-16 {
            break;
        }
    }
    th
}

/// Classifies a zero and extracts kernels.
pub fn spectral_point(k: &LambdaKasteleyn, poly: &LaurentPoly, lambda: [Complex64; 2]) -> Result<SpectralPoint> {
    let m = k.matrix(lambda);
    let s = linalg::svd(&m);
    let n = s.values.len();
    let smax = s.values[0].max(1e-300);
    let residual = poly.eval(lambda).norm() / poly.scale();
    let second = if n >= 2 { s.values[n - 2] / smax } else { 1.0 };
    let is_real = lambda.iter().all(|z| z.im.abs() < 1e-9);
    let (right, left, _) = linalg::null_vectors(&m, if second > SIMPLE_RATIO { 1 } else { 2 });
    if second > SIMPLE_RATIO {
        if is_real {
            return Err(Error::NotLiquid("real simple zero lies on the amoeba boundary".into()));
        }
        let f = to_vec(&right[0]);
        let g = to_vec(&left[0]);
        return Ok(SpectralPoint {
            lambda,
            kind: PointKind::InteriorSimple,
            kernel_f: vec![f.clone()],
            kernel_g: vec![g.clone()],
            f,
            g,
            zeta: poly.log_slope(lambda),
            singular_values: s.values,
            residual,
        });
    }
    if !is_real {
        return Err(Error::Degenerate("nonreal double zero".into()));
    }
    // Limit of kernels along the branches through the node: on the kernel,
    // K(lambda e^x) restricts to x1 A + x2 B to first order, and a branch
    // with slope zeta has tangent (x1, x2) proportional to (zeta, -1).
    let d1 = k.log_derivative(lambda, 0);
    let d2 = k.log_derivative(lambda, 1);
    let fb = CMat::from_columns(&right);
    let gb = CMat::from_columns(&left);
    let a = gb.transpose() * d1 * &fb;
    let b = gb.transpose() * d2 * &fb;
    let det2 = |m: &CMat| m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let q2 = det2(&a);
    let q0 = det2(&b);
    let q1 = det2(&(&a - &b)) - q2 - q0;
    let roots = linalg::quadratic_roots(q2, -q1, q0)?;
    let zeta = if roots[0].im > roots[1].im { roots[0] } else { roots[1] };
    if zeta.im.abs() < 1e-9 * zeta.norm() {
        return Err(Error::Degenerate("node slopes are real".into()));
    }
    let m2 = &a * zeta - &b;
    let (alpha, beta, _) = linalg::null_vectors(&m2, 1);
    let f = to_vec(&(&fb * &alpha[0]));
    let g = to_vec(&(&gb * &beta[0]));
    Ok(SpectralPoint {
        lambda,
        kind: PointKind::RealNode,
        kernel_f: right.iter().map(to_vec).collect(),
        kernel_g: left.iter().map(to_vec).collect(),
        f,
        g,
        zeta,
        singular_values: s.values,
        residual,
    })
}

/// All zeros of `P` on the unit torus found by scanning `theta1`, solving
/// for `lambda2` and refining, plus the four real points.
pub fn unit_torus_zeros(poly: &LaurentPoly, opts: &ScanOptions) -> Vec<[Complex64; 2]> {
    let scale = poly.scale();
    let mut found: Vec<[Complex64; 2]> = Vec::new();
    let push = |found: &mut Vec<[Complex64; 2]>, l: [Complex64; 2]| {
        if poly.eval(l).norm() > opts.zero_tol * scale {
            return;
        }
        if found.iter().all(|p| (p[0] - l[0]).norm() + (p[1] - l[1]).norm() > 1e-6) {
            found.push(l);
        }
    };
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            push(&mut found, [Complex64::new(s1, 0.0), Complex64::new(s2, 0.0)]);
        }
    }
    let n = opts.samples;
    let dist: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let roots = linalg::poly_roots(&poly.slice(Complex64::from_polar(1.0, t)));
            roots
                .iter()
                .map(|r| (r.norm().ln().abs(), r.arg()))
                .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
        })
        .collect();
    for i in 0..n {
        let (d, arg) = dist[i];
        let prev = dist[(i + n - 1) % n].0;
        let next = dist[(i + 1) % n].0;
        if d <= prev && d <= next && d < 0.2 {
            let th = refine_on_torus(poly, [2.0 * PI * i as f64 / n as f64, arg]);
            push(&mut found, th.map(|t| Complex64::from_polar(1.0, t)));
        }
    }
    found
}

/// Locates the liquid-phase point on the unit torus: a real node if there
/// is one, otherwise the interior simple zero with `Im zeta > 0`.
pub fn find_liquid_point(k: &LambdaKasteleyn, opts: &ScanOptions) -> Result<SpectralPoint> {
    let poly = char_poly(k)?;
    let zeros = unit_torus_zeros(&poly, opts);
    if zeros.is_empty() {
        return Err(Error::NotLiquid("no zero of P on the unit torus".into()));
    }
    let mut simple = None;
    let mut last_err = None;
    for l in &zeros {
        match spectral_point(k, &poly, *l) {
            Ok(p) if p.kind == PointKind::RealNode => return Ok(p),
            Ok(p) => {
                if simple.is_none() {
                    simple = Some(if p.zeta.im >= 0.0 { p } else { p.conjugate() });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (simple, last_err) {
        (Some(p), _) => Ok(p),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::NotLiquid("no usable zero".into())),
    }
}

/// Domain offset of the origin of each half-edge relative to the first
/// vertex of its face, so every face has a lift anchored at shift 0.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceLift {
    pub shift: Vec<Shift>,
}

impl FaceLift {
    pub fn new(map: &CombMap) -> Result<Self> {
        let mut shift = vec![[0, 0]; map.n_halves()];
        for f in 0..map.n_faces() {
            let mut s = [0, 0];
            for &h in map.face_halves(f) {
                shift[h] = s;
                s = add(s, map.offset(h));
            }
            if s != [0, 0] {
                return Err(Error::InvalidMap(format!("face {f} is not contractible")));
            }
        }
        Ok(FaceLift { shift })
    }

    /// Shift of the lift of `face(h^1)` adjacent across `h` to the lift of
    /// `face(h)` at shift 0.
    pub fn across(&self, map: &CombMap, h: Half) -> Shift {
        sub(add(self.shift[h], map.offset(h)), self.shift[h ^ 1])
    }

    /// Lift of `face(h)` that contains `h` when the origin of `h` sits at
    /// shift `q`.
    pub fn face_at(&self, h: Half, q: Shift) -> Shift {
        sub(q, self.shift[h])
    }
}

/// Biperiodic positions of dual vertices: `faces[f]` is the lift at shift 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusCenters {
    pub faces: Vec<Complex64>,
    pub periods: [Complex64; 2],
}

impl TorusCenters {
    pub fn at(&self, f: usize, t: Shift) -> Complex64 {
        self.faces[f] + self.periods[0] * t[0] as f64 + self.periods[1] * t[1] as f64
    }

    /// Position of the face across `h` from the lift of `face(h)` at 0.
    pub fn across(&self, map: &CombMap, lift: &FaceLift, h: Half) -> Complex64 {
        self.at(map.face(h ^ 1), lift.across(map, h))
    }

    /// Dual polygon of vertex `v` at shift 0, counterclockwise.
    pub fn dual_face(&self, map: &CombMap, lift: &FaceLift, v: usize) -> Vec<Complex64> {
        map.outgoing(v).into_iter().map(|h| self.at(map.face(h), lift.face_at(h, [0, 0]))).collect()
    }

    /// Edge forms `omega(2e) = phi(face(2e)) - phi(face(2e+1))`.
    pub fn edge_forms(&self, map: &CombMap, lift: &FaceLift) -> Vec<Complex64> {
        (0..map.n_edges()).map(|e| self.faces[map.face(2 * e)] - self.across(map, lift, 2 * e)).collect()
    }

    /// Positive edge weights `|omega(e)|`.
    pub fn edge_weights(&self, map: &CombMap, lift: &FaceLift) -> Vec<f64> {
        self.edge_forms(map, lift).iter().map(|z| z.norm()).collect()
    }

    /// Face weights with the largest relative imaginary part.
    pub fn face_weights(&self, map: &CombMap, lift: &FaceLift) -> (Vec<f64>, f64) {
        let mut worst: f64 = 0.0;
        let x = (0..map.n_faces())
            .map(|f| {
                let (x, im) = planar_embed::face_weight_from_positions(map, f, self.faces[f], |h| self.across(map, lift, h));
                worst = worst.max(im);
                x
            })
            .collect();
        (x, worst)
    }

    /// Largest black-angle defect.
    pub fn angle_condition(&self, map: &CombMap, lift: &FaceLift) -> f64 {
        (0..map.n_faces())
            .map(|f| planar_embed::angle_defect(map, f, self.faces[f], |h| self.across(map, lift, h)).0)
            .fold(0.0, f64::max)
    }

    /// Whether all dual faces are convex with positive orientation and every
    /// face sees its neighbors once around.
    pub fn is_convex(&self, map: &CombMap, lift: &FaceLift) -> bool {
        let faces_ok = (0..map.n_vertices()).all(|v| {
            let poly = self.dual_face(map, lift, v);
            geom::is_convex_ccw(&poly, 1e-12) && geom::signed_area(&poly) > 0.0
        });
        let turns_ok = (0..map.n_faces())
            .all(|f| planar_embed::angle_defect(map, f, self.faces[f], |h| self.across(map, lift, h)).1 < 1e-9);
        faces_ok && turns_ok
    }

    pub fn scale(&self) -> f64 {
        self.periods[0].norm().max(self.periods[1].norm())
    }
}

/// Integrates a periodic co-closed form (value on half-edge `2e`) to
/// biperiodic positions by least squares over faces and the two periods.
/// Returns the positions and the relative closedness residual.
pub fn integrate_periodic(map: &CombMap, lift: &FaceLift, omega: &[Complex64]) -> Result<(TorusCenters, f64)> {
    let nf = map.n_faces();
    let ne = map.n_edges();
    let mut a = CMat::zeros(ne + 1, nf + 2);
    let mut rhs = CVec::zeros(ne + 1);
    let one = Complex64::new(1.0, 0.0);
    for e in 0..ne {
        let h = 2 * e;
        let t = lift.across(map, h);
        a[(e, map.face(h))] += one;
        a[(e, map.face(h ^ 1))] -= one;
        a[(e, nf)] -= t[0] as f64;
        a[(e, nf + 1)] -= t[1] as f64;
        rhs[e] = omega[e];
    }
    a[(ne, 0)] = one;
    let x = linalg::lstsq(&a, &rhs)?;
    let scale = omega.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let resid = (&a * &x - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    let centers = TorusCenters { faces: x.rows(0, nf).iter().copied().collect(), periods: [x[nf], x[nf + 1]] };
    Ok((centers, resid))
}

/// Values of a form on the lifted edge `e` whose white endpoint sits at the
/// given shift.
pub type LiftedForm<'a> = dyn Fn(usize, Shift) -> Complex64 + 'a;

/// Dual-vertex positions on a `block[0] x block[1]` patch of the universal
/// cover, keyed by `(face, shift)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPositions {
    pub block: [usize; 2],
    pub positions: HashMap<(usize, Shift), Complex64>,
}

impl BlockPositions {
    pub fn get(&self, f: usize, t: Shift) -> Option<Complex64> {
        self.positions.get(&(f, t)).copied()
    }

    fn in_block(block: [usize; 2], t: Shift) -> bool {
        t[0] >= 0 && t[1] >= 0 && (t[0] as usize) < block[0] && (t[1] as usize) < block[1]
    }

    /// Polygon of the lifted vertex `(v, q)`, if all its faces are present.
    pub fn dual_face(&self, map: &CombMap, lift: &FaceLift, v: usize, q: Shift) -> Option<Vec<Complex64>> {
        map.outgoing(v).into_iter().map(|h| self.get(map.face(h), lift.face_at(h, q))).collect()
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut keys: Vec<_> = self.positions.keys().copied().collect();
        keys.sort();
        keys.iter().map(|k| self.positions[k]).collect()
    }
}

/// Integrates a lifted form over a block of fundamental domains by
/// breadth-first search from face 0 at shift 0, failing on inconsistent
/// revisits.
pub fn integrate_block(map: &CombMap, lift: &FaceLift, form: &LiftedForm, block: [usize; 2]) -> Result<BlockPositions> {
    let mut positions = HashMap::new();
    positions.insert((0usize, [0, 0]), Complex64::new(0.0, 0.0));
    let mut queue = VecDeque::from([(0usize, [0i32, 0i32])]);
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    while let Some((f, t)) = queue.pop_front() {
        let p = positions[&(f, t)];
        for &h in map.face_halves(f) {
            let q = add(t, lift.shift[h]);
            let white_shift = if h % 2 == 0 { q } else { add(q, map.offset(h)) };
            let w = form(h / 2, white_shift);
            let w = if h % 2 == 0 { w } else { -w };
            scale = scale.max(w.norm());
            let g = map.face(h ^ 1);
            let tg = add(t, lift.across(map, h));
            if !BlockPositions::in_block(block, tg) {
                continue;
            }
            let val = p - w;
            match positions.get(&(g, tg)) {
                Some(&old) => worst = worst.max((old - val).norm()),
                None => {
                    positions.insert((g, tg), val);
                    queue.push_back((g, tg));
                }
            }
        }
    }
    if worst > 1e-8 * scale.max(1e-300) {
        return Err(Error::PathDependent(worst / scale));
    }
    Ok(BlockPositions { block, positions })
}

/// Which combination of the kernel pair a form uses on white vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhitePart {
    Plain,
    Conjugate,
    Real,
}

/// Lifted form `G'(w) K_e F(b)` where `G'` is `G`, its conjugate or its
/// real part on the lifted white vertex.
pub fn kernel_form<'a>(
    k: &'a LambdaKasteleyn,
    lambda: [Complex64; 2],
    f: &'a [Complex64],
    g: &'a [Complex64],
    part: WhitePart,
) -> impl Fn(usize, Shift) -> Complex64 + 'a {
    move |e, s| {
        let [w, b] = k.slots[e];
        let gw = g[w] / translation_factor(lambda, s);
        let gw = match part {
            WhitePart::Plain => gw,
            WhitePart::Conjugate => gw.conj(),
            WhitePart::Real => Complex64::new(gw.re, 0.0),
        };
        gw * k.entry(e, lambda) * f[b] * translation_factor(lambda, s)
    }
}

/// Periodic form `G(w) K_e(lambda) F(b)` on the fundamental domain.
pub fn periodic_form(k: &LambdaKasteleyn, lambda: [Complex64; 2], f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    (0..k.base.len()).map(|e| g[k.slots[e][0]] * k.entry(e, lambda) * f[k.slots[e][1]]).collect()
}

/// Choice made at a real node to make the companion map bounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSelection {
    pub u: Complex64,
    pub v: Complex64,
    /// Modulus of the rejected root of the quadratic in `conj(v)`.
    pub rejected_modulus: f64,
}

/// Given periods `a` of the embedding and `b` of its companion, finds
/// `u, v` in the unit disk for which the companion of
/// `(F + u conj F, G + v conj G)` has vanishing periods.
pub fn node_boundedness_select(a: [Complex64; 2], b: [Complex64; 2]) -> Result<NodeSelection> {
    let [a1, a2] = a;
    let [b1, b2] = b;
    // (b1 + w a1)(conj a2 + w conj b2) = (b2 + w a2)(conj a1 + w conj b1), w = conj v
    let q2 = a1 * b2.conj() - a2 * b1.conj();
    let q1 = b1 * b2.conj() + a1 * a2.conj() - b2 * b1.conj() - a2 * a1.conj();
    let q0 = b1 * a2.conj() - b2 * a1.conj();
    let scale = a1.norm().max(a2.norm()).max(b1.norm()).max(b2.norm());
    let (w, rejected) = if q2.norm() <= 1e-14 * scale * scale {
        if q1.norm() <= 1e-14 * scale * scale {
            return Err(Error::Degenerate("vanishing node quadratic".into()));
        }
        (-q0 / q1, f64::INFINITY)
    } else {
        let r = linalg::quadratic_roots(q2, q1, q0)?;
        let (i, j) = if r[0].norm() <= r[1].norm() { (0, 1) } else { (1, 0) };
        if (r[i].norm() - 1.0).abs() < 1e-9 && (r[j].norm() - 1.0).abs() < 1e-9 {
            return Err(Error::Degenerate("both node roots on the unit circle".into()));
        }
        (r[i], r[j].norm())
    };
    if w.norm() >= 1.0 {
        return Err(Error::Degenerate(format!("no node root in the unit disk (|v| = {})", w.norm())));
    }
    let u = -(b1 + w * a1) / (a1.conj() + w * b1.conj());
    Ok(NodeSelection { u, v: w.conj(), rejected_modulus: rejected })
}

/// A periodic circle-center embedding built from a liquid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicEmbedding {
    pub point: SpectralPoint,
    pub centers: TorusCenters,
    /// Periods of the companion map at a node (zero after selection).
    pub companion_periods: Option<[Complex64; 2]>,
    pub selection: Option<NodeSelection>,
    /// Whether the conjugate zero had to be used for positive orientation.
    pub conjugated: bool,
    pub closedness: f64,
}

impl PeriodicEmbedding {
    pub fn period_ratio(&self) -> Complex64 {
        self.centers.periods[1] / self.centers.periods[0]
    }
}

fn embed_point(map: &CombMap, lift: &FaceLift, k: &LambdaKasteleyn, p: &SpectralPoint) -> Result<PeriodicEmbedding> {
    let mut f = p.f.clone();
    let mut g = p.g.clone();
    let mut selection = None;
    let mut companion_periods = None;
    if p.kind == PointKind::RealNode {
        let conj = |v: &[Complex64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
        let (phi, _) = integrate_periodic(map, lift, &periodic_form(k, p.lambda, &f, &g))?;
        let (hat, _) = integrate_periodic(map, lift, &periodic_form(k, p.lambda, &f, &conj(&g)))?;
        let sel = node_boundedness_select(phi.periods, hat.periods)?;
        let (fc, gc) = (conj(&f), conj(&g));
        f = f.iter().zip(&fc).map(|(x, y)| x + sel.u * y).collect();
        g = g.iter().zip(&gc).map(|(x, y)| x + sel.v * y).collect();
        let (hat2, _) = integrate_periodic(map, lift, &periodic_form(k, p.lambda, &f, &conj(&g)))?;
        companion_periods = Some(hat2.periods);
        selection = Some(sel);
    }
    let omega = periodic_form(k, p.lambda, &f, &g);
    let (mut centers, closedness) = integrate_periodic(map, lift, &omega)?;
    if closedness > 1e-8 {
        return Err(Error::PathDependent(closedness));
    }
    let s = centers.periods[0].norm();
    if s < 1e-300 {
        return Err(Error::Degenerate("vanishing period".into()));
    }
    for z in centers.faces.iter_mut() {
        *z /= s;
    }
    centers.periods = centers.periods.map(|z| z / s);
    if let Some(cp) = companion_periods.as_mut() {
        *cp = cp.map(|z| z / s);
    }
    Ok(PeriodicEmbedding {
        point: SpectralPoint { f, g, ..p.clone() },
        centers,
        companion_periods,
        selection,
        conjugated: false,
        closedness,
    })
}

fn orientation_ok(map: &CombMap, lift: &FaceLift, c: &TorusCenters) -> bool {
    (0..map.n_vertices()).all(|v| geom::signed_area(&c.dual_face(map, lift, v)) > 0.0)
}

/// Integrates `G K F` at the liquid point to the periodic center embedding,
/// normalized to `|V1| = 1`. At a node the kernel pair is first adjusted so
/// the companion map is bounded. If the dual faces come out negatively
/// oriented the conjugate zero is used instead.
pub fn periodic_embedding(map: &CombMap, k: &LambdaKasteleyn, point: &SpectralPoint) -> Result<PeriodicEmbedding> {
    let lift = FaceLift::new(map)?;
    let first = embed_point(map, &lift, k, point)?;
    if orientation_ok(map, &lift, &first.centers) {
        return Ok(first);
    }
    let second = embed_point(map, &lift, k, &point.conjugate())?;
    if orientation_ok(map, &lift, &second.centers) {
        return Ok(PeriodicEmbedding { conjugated: true, ..second });
    }
    Err(Error::Degenerate("neither kernel pairing gives an oriented embedding".into()))
}

/// Results of the T-graph validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TGraphReport {
    /// Largest distance of a black-face point from its segment, relative to
    /// the block size.
    pub black_collinearity: f64,
    pub white_convex: bool,
    pub white_positive: bool,
    /// Largest deviation from `pi` of the sum of white angles at a dual
    /// vertex.
    pub white_angle_defect: f64,
    pub faces_checked: usize,
}

impl TGraphReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.black_collinearity < tol && self.white_convex && self.white_positive && self.white_angle_defect < tol
    }
}

fn unsigned_angle(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg().abs()
}

/// Phase applied to `G` before taking its real part. `G` is defined up to a
/// scalar, and on symmetric lattices the unrotated real part vanishes on
/// whole sublattices, collapsing white faces.
pub const TGRAPH_PHASE: f64 = 0.3719;

/// Builds the realization from `Re(e^(i phase) G(w)) K F(b)` on a block and
/// checks that black faces are segments and white faces convex and
/// positively oriented.
pub fn tgraph_check(
    map: &CombMap,
    k: &LambdaKasteleyn,
    point: &SpectralPoint,
    phase: f64,
    block: [usize; 2],
) -> Result<TGraphReport> {
    let lift = FaceLift::new(map)?;
    let rot = Complex64::from_polar(1.0, phase);
    let g: Vec<Complex64> = point.g.iter().map(|z| z * rot).collect();
    let form = kernel_form(k, point.lambda, &point.f, &g, WhitePart::Real);
    let pos = integrate_block(map, &lift, &form, block)?;
    let scale = geom::diameter(&pos.points()).max(1e-300);
    let mut collinear: f64 = 0.0;
    let mut convex = true;
    let mut positive = true;
    let mut checked = 0;
    for q0 in 0..block[0] as i32 {
        for q1 in 0..block[1] as i32 {
            let q = [q0, q1];
            for v in 0..map.n_vertices() {
                let Some(poly) = pos.dual_face(map, &lift, v, q) else { continue };
                checked += 1;
                if map.color(v) == Color::Black {
                    let (mut i0, mut i1, mut best) = (0, 0, 0.0);
                    for i in 0..poly.len() {
                        for j in i + 1..poly.len() {
                            let d = (poly[i] - poly[j]).norm();
                            if d > best {
                                (i0, i1, best) = (i, j, d);
                            }
                        }
                    }
                    if best > 0.0 {
                        for p in &poly {
                            collinear = collinear.max(geom::line_distance(*p, poly[i0], poly[i1]) / scale);
                        }
                    }
                } else {
                    convex &= geom::is_convex_ccw(&poly, 1e-9);
                    positive &= geom::signed_area(&poly) > 0.0;
                }
            }
        }
    }
    // White angles at each interior dual vertex.
    let mut defect: f64 = 0.0;
    for (&(f, t), &p) in &pos.positions {
        let halves = map.face_halves(f);
        let n = halves.len();
        let mut sum = 0.0;
        let mut complete = true;
        for i in 0..n {
            let h = halves[i];
            let hp = halves[(i + n - 1) % n];
            if map.color(map.origin(h)) != Color::White {
                continue;
            }
            let a = pos.get(map.face(hp ^ 1), add(t, lift.across(map, hp)));
            let b = pos.get(map.face(h ^ 1), add(t, lift.across(map, h)));
            match (a, b) {
                (Some(a), Some(b)) => sum += unsigned_angle(a - p, b - p),
                _ => complete = false,
            }
        }
        if complete {
            defect = defect.max((sum - PI).abs());
        }
    }
    Ok(TGraphReport {
        black_collinearity: collinear,
        white_convex: convex,
        white_positive: positive,
        white_angle_defect: defect,
        faces_checked: checked,
    })
}

/// Circle pattern over a block, obtained by reflecting a root point across
/// dual edges.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPattern {
    pub vertices: HashMap<(usize, Shift), Complex64>,
    /// Radius of every lifted face whose vertices are all present.
    pub radii: HashMap<(usize, Shift), f64>,
    pub circle_residual: f64,
}

impl BlockPattern {
    /// Largest relative difference between radii of translates of a face.
    pub fn radius_periodicity(&self) -> f64 {
        let mut by_face: HashMap<usize, (f64, f64)> = HashMap::new();
        for (&(f, _), &r) in &self.radii {
            let e = by_face.entry(f).or_insert((r, r));
            e.0 = e.0.min(r);
            e.1 = e.1.max(r);
        }
        by_face.values().map(|(lo, hi)| (hi - lo) / hi.max(1e-300)).fold(0.0, f64::max)
    }
}

/// Reflects `z0` (placed at white vertex `root` at shift 0) across dual
/// edges to build the circle pattern on a block.
pub fn block_pattern(map: &CombMap, centers: &TorusCenters, root: usize, z0: Complex64, block: [usize; 2]) -> Result<BlockPattern> {
    let lift = FaceLift::new(map)?;
    let scale = centers.scale();
    let mut vertices = HashMap::new();
    vertices.insert((root, [0, 0]), z0);
    let mut queue = VecDeque::from([(root, [0i32, 0i32])]);
    let mut worst: f64 = 0.0;
    while let Some((v, q)) = queue.pop_front() {
        let z = vertices[&(v, q)];
        for h in map.outgoing(v) {
            let d = add(q, map.offset(h));
            if !BlockPositions::in_block(block, d) {
                continue;
            }
            let left = centers.at(map.face(h), lift.face_at(h, q));
            let right = centers.at(map.face(h ^ 1), lift.face_at(h ^ 1, d));
            let img = geom::reflect(z, left, right);
            let key = (map.dest(h), d);
            match vertices.get(&key) {
                Some(&old) => worst = worst.max((old - img).norm() / scale),
                None => {
                    vertices.insert(key, img);
                    queue.push_back(key);
                }
            }
        }
    }
    if worst > 1e-8 {
        return Err(Error::AngleCondition(worst));
    }
    let mut radii = HashMap::new();
    let mut circle: f64 = 0.0;
    for f in 0..map.n_faces() {
        for t0 in -1..=block[0] as i32 {
            for t1 in -1..=block[1] as i32 {
                let t = [t0, t1];
                let c = centers.at(f, t);
                let pts: Option<Vec<Complex64>> =
                    map.face_halves(f).iter().map(|&h| vertices.get(&(map.origin(h), add(t, lift.shift[h]))).copied()).collect();
                let Some(pts) = pts else { continue };
                let d: Vec<f64> = pts.iter().map(|p| (p - c).norm()).collect();
                for x in &d {
                    circle = circle.max((x - d[0]).abs() / scale);
                }
                radii.insert((f, t), d[0]);
            }
        }
    }
    Ok(BlockPattern { vertices, radii, circle_residual: circle })
}

/// Full pipeline from edge weights: liquid point and periodic embedding.
pub fn embed_torus(map: &CombMap, weights: &[f64], opts: &ScanOptions) -> Result<PeriodicEmbedding> {
    let k = LambdaKasteleyn::new(map, weights)?;
    let point = find_liquid_point(&k, opts)?;
    periodic_embedding(map, &k, &point)
}

/// Similarity `z -> a z + b` minimizing the squared distance from `src` to
/// `dst`, and the resulting RMS residual relative to the spread of `dst`.
pub fn procrustes(src: &[Complex64], dst: &[Complex64]) -> (Complex64, Complex64, f64) {
    let n = src.len() as f64;
    let ms: Complex64 = src.iter().sum::<Complex64>() / n;
    let md: Complex64 = dst.iter().sum::<Complex64>() / n;
    let num: Complex64 = src.iter().zip(dst).map(|(s, d)| (s - ms).conj() * (d - md)).sum();
    let den: f64 = src.iter().map(|s| (s - ms).norm_sqr()).sum();
    let a = num / den.max(1e-300);
    let b = md - a * ms;
    let spread = (dst.iter().map(|d| (d - md).norm_sqr()).sum::<f64>() / n).sqrt().max(1e-300);
    let rms = (src.iter().zip(dst).map(|(s, d)| (a * s + b - d).norm_sqr()).sum::<f64>() / n).sqrt();
    (a, b, rms / spread)
}
