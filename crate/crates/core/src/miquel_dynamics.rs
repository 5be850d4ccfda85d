//! Central moves, Miquel's six circles and Miquel dynamics on biperiodic
//! square-grid circle patterns.
//!
//! Neighbors of a center `u` are passed counterclockwise as `[u1, u2, u3, u4]`
//! and the cross-ratio weight is `X = -(u2 - u)(u4 - u) / ((u1 - u)(u3 - u))`.
//! On the grid, face `(i, j)` has neighbors `u1 = (i, j+1)`, `u2 = (i-1, j)`,
//! `u3 = (i, j-1)`, `u4 = (i+1, j)`, so a rectangle grid with horizontal
//! spacing `a` and vertical spacing `b` has `X = (a/b)^2` everywhere.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families;
use crate::geom;
use crate::graphcore::{Color, CombMap};
use crate::linalg;

fn scale_of(points: &[Complex64]) -> f64 {
    geom::diameter(points).max(1e-300)
}

/// `-(u2 - u)(u4 - u) / ((u1 - u)(u3 - u))`.
pub fn cross_ratio_weight(u: Complex64, n: [Complex64; 4]) -> Complex64 {
    -((n[1] - u) * (n[3] - u)) / ((n[0] - u) * (n[2] - u))
}

/// The second root of the central relation
/// `(u2 - z)(u4 - z) / ((u1 - z)(u3 - z)) = (u2 - u)(u4 - u) / ((u1 - u)(u3 - u))`.
pub fn central_move(u: Complex64, n: [Complex64; 4]) -> Result<Complex64> {
    let [u1, u2, u3, u4] = n;
    let pts = [u, u1, u2, u3, u4];
    let scale = scale_of(&pts);
    for a in 0..5 {
        for b in a + 1..5 {
            if (pts[a] - pts[b]).norm() <= 1e-14 * scale {
                return Err(Error::Degenerate("coincident points in central move".into()));
            }
        }
    }
    if (u1 - u2 + u3 - u4).norm() < 1e-10 * scale {
        return Ok((u1 + u2 + u3 + u4) / 2.0 - u);
    }
    let num = u * u1 * u3 - u1 * u2 * u3 - u * u2 * u4 + u1 * u2 * u4 - u1 * u3 * u4 + u2 * u3 * u4;
    let den = u * u1 - u * u2 + u * u3 - u1 * u3 - u * u4 + u2 * u4;
    if den.norm() > 1e-12 * scale * scale {
        return Ok(num / den);
    }
    // The relation degenerates to a linear equation; fall back to its
    // quadratic form and pick the root farther from u.
    let c = ((u2 - u) * (u4 - u)) / ((u1 - u) * (u3 - u));
    let a2 = Complex64::new(1.0, 0.0) - c;
    let a1 = -(u2 + u4) + c * (u1 + u3);
    let a0 = u2 * u4 - c * u1 * u3;
    let roots = linalg::quadratic_roots(a2, a1, a0)?;
    Ok(if (roots[0] - u).norm() > (roots[1] - u).norm() { roots[0] } else { roots[1] })
}

/// Relative residual of the central relation at `z`.
pub fn central_relation_residual(z: Complex64, u: Complex64, n: [Complex64; 4]) -> f64 {
    let [u1, u2, u3, u4] = n;
    let lhs = (u2 - z) * (u4 - z) * (u1 - u) * (u3 - u);
    let rhs = (u2 - u) * (u4 - u) * (u1 - z) * (u3 - z);
    let s = scale_of(&[z, u, u1, u2, u3, u4]);
    (lhs - rhs).norm() / s.powi(4)
}

/// Residuals of the factorization
/// `(u~ - u_i)(u - u_i) / ((u_{i+1} - u_i)(u_{i-1} - u_i))`, which equals
/// `1/(1+X)` for odd `i` and `1/(1+1/X)` for even `i`.
pub fn factorization_residuals(u: Complex64, ut: Complex64, n: [Complex64; 4]) -> [f64; 4] {
    let x = cross_ratio_weight(u, n);
    let one = Complex64::new(1.0, 0.0);
    let mut out = [0.0; 4];
    for i in 0..4 {
        let ui = n[i];
        let lhs = (ut - ui) * (u - ui) / ((n[(i + 1) % 4] - ui) * (n[(i + 3) % 4] - ui));
        // i is zero-based, so index 0 is u1 (odd).
        let rhs = if i % 2 == 0 { one / (one + x) } else { one / (one + one / x) };
        out[i] = (lhs - rhs).norm();
    }
    out
}

/// Cluster mutation of a face weight `x` and its four neighbors (in the same
/// order as the centers `u1..u4`).
///
/// After the move the two classes of neighbors swap, so mutating the same
/// face again takes the neighbors starting from `u2`; that composition is the
/// identity.
pub fn mutate_y(x: f64, n: [f64; 4]) -> Result<(f64, [f64; 4])> {
    if x == 0.0 || x == -1.0 || !x.is_finite() {
        return Err(Error::InvalidY(x));
    }
    let up = 1.0 + x;
    let down = 1.0 / (1.0 + 1.0 / x);
    Ok((1.0 / x, [n[0] * up, n[1] * down, n[2] * up, n[3] * down]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

/// The center of the sixth circle of Miquel's theorem: circles `c` and
/// `around[i]`, `around[i+1]` meet at a common point; the second
/// intersections of consecutive `around` circles lie on one circle, whose
/// center is returned together with the concyclicity residual.
pub fn miquel_sixth_center(c: Circle, around: [Circle; 4], tol: f64) -> Result<(Complex64, f64)> {
    let pts: Vec<Complex64> = std::iter::once(c.center).chain(around.iter().map(|a| a.center)).collect();
    let scale = scale_of(&pts).max(c.radius);
    let mut second = Vec::new();
    for i in 0..4 {
        let (a, b) = (around[i], around[(i + 1) % 4]);
        let pair = geom::circle_intersections(a.center, a.radius, b.center, b.radius)
            .ok_or(Error::Incidence(f64::INFINITY))?;
        let off = pair.map(|p| ((p - c.center).norm() - c.radius).abs());
        let (k, other) = if off[0] <= off[1] { (0, 1) } else { (1, 0) };
        if off[k] > tol * scale {
            return Err(Error::Incidence(off[k] / scale));
        }
        second.push(pair[other]);
    }
    let o = geom::circumcenter(second[0], second[1], second[2]).ok_or(Error::Incidence(f64::INFINITY))?;
    let r = (second[0] - o).norm();
    let resid = ((second[3] - o).norm() - r).abs() / scale;
    if resid > tol {
        return Err(Error::Incidence(resid));
    }
    Ok((o, resid))
}

/// Largest spread of the distances from `u` to the four side lines of
/// `n[0] n[1] n[2] n[3]`, relative to the quadrilateral size. Zero exactly
/// when the quadrilateral has an incircle centered at `u`.
pub fn incircle_residual(u: Complex64, n: [Complex64; 4]) -> f64 {
    let d: Vec<f64> = (0..4).map(|i| geom::line_distance(u, n[i], n[(i + 1) % 4])).collect();
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    (hi - lo) / scale_of(&n)
}

/// Color of grid face `(i, j)`: black when `i + j` is even.
pub fn face_color(i: i64, j: i64) -> Color {
    if (i + j).rem_euclid(2) == 0 {
        Color::Black
    } else {
        Color::White
    }
}

/// Biperiodic square-grid state: centers of the `m x n` faces of one
/// fundamental domain, the two periods, and the dimer face weights `y`.
///
/// For faces of color `next` the dimer weight is the cross-ratio weight;
/// for the other color it is its inverse. Every mutation switches `next`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub m: usize,
    pub n: usize,
    /// Face `(i, j)` is stored at `i + m * j`.
    pub centers: Vec<Complex64>,
    pub periods: [Complex64; 2],
    pub next: Color,
    pub y: Vec<f64>,
}

/// Per-face fixed-point diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    /// Incircle residual of each face's neighbor quadrilateral.
    pub tangential: Vec<f64>,
    /// Relative residual of the fixed-point equation for the weights.
    pub weight_equation: Vec<f64>,
    /// Circle residual of the diagonal-intersection pattern.
    pub diagonal_circles: f64,
    /// Tangency residual of diagonally adjacent circles in that pattern.
    pub diagonal_tangency: f64,
}

impl GridState {
    pub fn new(m: usize, n: usize, centers: Vec<Complex64>, periods: [Complex64; 2], next: Color) -> Result<Self> {
        if !m.is_multiple_of(2) || !n.is_multiple_of(2) || m == 0 || n == 0 {
            return Err(Error::InvalidMap("grid sides must be even and positive".into()));
        }
        if centers.len() != m * n {
            return Err(Error::InvalidMap(format!("expected {} centers, got {}", m * n, centers.len())));
        }
        let mut s = GridState { m, n, centers, periods, next, y: Vec::new() };
        s.y = s.y_from_centers()?;
        Ok(s)
    }

    /// Regular grid of `a x b` rectangles.
    pub fn rectangle(m: usize, n: usize, a: f64, b: f64) -> Result<Self> {
        let centers = (0..m * n)
            .map(|k| Complex64::new(a * ((k % m) as f64 + 0.5), b * ((k / m) as f64 + 0.5)))
            .collect();
        GridState::new(m, n, centers, [Complex64::new(a * m as f64, 0.0), Complex64::new(0.0, b * n as f64)], Color::Black)
    }

    pub fn index(&self, i: i64, j: i64) -> usize {
        i.rem_euclid(self.m as i64) as usize + self.m * j.rem_euclid(self.n as i64) as usize
    }

    /// Center of face `(i, j)` in the universal cover.
    pub fn center(&self, i: i64, j: i64) -> Complex64 {
        let (qi, qj) = (i.div_euclid(self.m as i64), j.div_euclid(self.n as i64));
        self.centers[self.index(i, j)] + self.periods[0] * qi as f64 + self.periods[1] * qj as f64
    }

    /// Neighbors `(i, j+1), (i-1, j), (i, j-1), (i+1, j)`.
    pub fn neighbors(&self, i: i64, j: i64) -> [Complex64; 4] {
        [self.center(i, j + 1), self.center(i - 1, j), self.center(i, j - 1), self.center(i + 1, j)]
    }

    fn coords(&self, k: usize) -> (i64, i64) {
        ((k % self.m) as i64, (k / self.m) as i64)
    }

    /// Cross-ratio weight of every face; errors if one is not real.
    pub fn cross_ratio_weights(&self) -> Result<Vec<f64>> {
        (0..self.m * self.n)
            .map(|k| {
                let (i, j) = self.coords(k);
                let x = cross_ratio_weight(self.center(i, j), self.neighbors(i, j));
                if x.im.abs() > 1e-9 * x.norm() {
                    Err(Error::NotKasteleyn { face: k, imag: x.im })
                } else {
                    Ok(x.re)
                }
            })
            .collect()
    }

    /// Dimer face weights recomputed from the centers.
    pub fn y_from_centers(&self) -> Result<Vec<f64>> {
        let x = self.cross_ratio_weights()?;
        Ok((0..self.m * self.n)
            .map(|k| {
                let (i, j) = self.coords(k);
                if face_color(i, j) == self.next {
                    x[k]
                } else {
                    1.0 / x[k]
                }
            })
            .collect())
    }

    /// Applies the central move to every face of `color` and updates the
    /// weights by the cluster rule.
    pub fn mutate(&self, color: Color) -> Result<GridState> {
        let mut centers = self.centers.clone();
        let mut y = self.y.clone();
        for k in 0..self.m * self.n {
            let (i, j) = self.coords(k);
            if face_color(i, j) != color {
                continue;
            }
            let u = self.center(i, j);
            let ut = central_move(u, self.neighbors(i, j)).map_err(|e| Error::CentralMove { face: k, reason: e.to_string() })?;
            centers[k] = ut - (u - self.centers[k]);
            let yk = self.y[k];
            if yk == 0.0 || yk == -1.0 {
                return Err(Error::InvalidY(yk));
            }
            let up = 1.0 + yk;
            let down = 1.0 / (1.0 + 1.0 / yk);
            // Faces of color `next` have vertical neighbors in the odd slots.
            let (vertical, horizontal) = if color == self.next { (up, down) } else { (down, up) };
            for (di, dj, f) in [(0, 1, vertical), (0, -1, vertical), (1, 0, horizontal), (-1, 0, horizontal)] {
                let nk = self.index(i + di, j + dj);
                y[nk] *= f;
            }
            y[k] = 1.0 / yk;
        }
        Ok(GridState { m: self.m, n: self.n, centers, periods: self.periods, next: self.next.other(), y })
    }

    /// One step of Miquel dynamics: mutate the color `next`.
    pub fn step(&self) -> Result<GridState> {
        self.mutate(self.next)
    }

    /// Largest relative difference between stored and recomputed weights.
    pub fn weight_consistency(&self) -> Result<f64> {
        let y = self.y_from_centers()?;
        Ok(y.iter().zip(&self.y).map(|(a, b)| (a - b).abs() / b.abs().max(1e-300)).fold(0.0, f64::max))
    }

    /// Random state near the square grid: centers are perturbed by up to
    /// `amplitude` and then projected back onto the set where every
    /// cross-ratio weight is real (Gauss-Newton on their arguments).
    pub fn random_positive<R: Rng>(m: usize, n: usize, amplitude: f64, rng: &mut R) -> Result<GridState> {
        let base = GridState::rectangle(m, n, 1.0, 1.0)?;
        let mut centers: Vec<Complex64> = base
            .centers
            .iter()
            .map(|&u| u + Complex64::new(rng.gen_range(-amplitude..amplitude), rng.gen_range(-amplitude..amplitude)))
            .collect();
        let nf = m * n;
        let mut last = f64::INFINITY;
        for _ in 0..100 {
            let s = GridState { centers: centers.clone(), y: vec![1.0; nf], ..base.clone() };
            let mut r = nalgebra::DVector::<f64>::zeros(nf);
            let mut jac = nalgebra::DMatrix::<f64>::zeros(nf, 2 * nf);
            for k in 0..nf {
                let (i, j) = s.coords(k);
                let u = s.center(i, j);
                let nb = s.neighbors(i, j);
                r[k] = cross_ratio_weight(u, nb).arg();
                // d log X = sum over neighbors of +-(d nb - d u) / (nb - u)
                let idx = [s.index(i, j + 1), s.index(i - 1, j), s.index(i, j - 1), s.index(i + 1, j)];
                let sign = [-1.0, 1.0, -1.0, 1.0];
                for t in 0..4 {
                    let d = sign[t] / (nb[t] - u);
                    for (target, coef) in [(idx[t], d), (k, -d)] {
                        jac[(k, 2 * target)] += coef.im;
                        jac[(k, 2 * target + 1)] += coef.re;
                    }
                }
            }
            last = r.norm();
            if last < 1e-14 {
                break;
            }
            let step = linalg::lstsq_real(&jac, &(-&r))?;
            for k in 0..nf {
                centers[k] += Complex64::new(step[2 * k], step[2 * k + 1]);
            }
        }
        if last > 1e-12 {
            return Err(Error::Degenerate(format!("projection did not converge ({last:e})")));
        }
        let s = GridState::new(m, n, centers, base.periods, Color::Black)?;
        if s.cross_ratio_weights()?.iter().any(|&x| x <= 0.0) {
            return Err(Error::Degenerate("projected state has a non-positive weight".into()));
        }
        Ok(s)
    }

    /// Diagnostics for fixed points of Miquel dynamics.
    pub fn fixed_point_report(&self) -> FixedPointReport {
        let nf = self.m * self.n;
        let tangential = (0..nf)
            .map(|k| {
                let (i, j) = self.coords(k);
                incircle_residual(self.center(i, j), self.neighbors(i, j))
            })
            .collect();
        let weight_equation = (0..nf)
            .map(|k| {
                let (i, j) = self.coords(k);
                let y = |di: i64, dj: i64| self.y[self.index(i + di, j + dj)];
                let (vn, vs, he, hw) = (y(0, 1), y(0, -1), y(1, 0), y(-1, 0));
                let lhs = self.y[k] * self.y[k];
                let rhs = if face_color(i, j) == self.next {
                    (1.0 + 1.0 / vn) * (1.0 + 1.0 / vs) / ((1.0 + he) * (1.0 + hw))
                } else {
                    (1.0 + 1.0 / he) * (1.0 + 1.0 / hw) / ((1.0 + vn) * (1.0 + vs))
                };
                (lhs - rhs).abs() / lhs.max(rhs)
            })
            .collect();
        // Diagonal-intersection pattern: one point per grid vertex (i, j),
        // the lower-left corner of face (i, j).
        let scale = self.periods[0].norm().max(self.periods[1].norm());
        let z = |i: i64, j: i64| -> Option<Complex64> {
            let (a, b) = (self.center(i - 1, j - 1), self.center(i, j));
            let (c, d) = (self.center(i, j - 1), self.center(i - 1, j));
            geom::line_intersection(a, b - a, c, d - c)
        };
        let mut circles: f64 = 0.0;
        let mut radii = vec![0.0; nf];
        for k in 0..nf {
            let (i, j) = self.coords(k);
            let u = self.center(i, j);
            let corners = [z(i, j), z(i + 1, j), z(i + 1, j + 1), z(i, j + 1)];
            if corners.iter().any(Option::is_none) {
                circles = f64::INFINITY;
                continue;
            }
            let d: Vec<f64> = corners.iter().map(|p| (p.unwrap() - u).norm()).collect();
            radii[k] = d[0];
            for x in &d {
                circles = circles.max((x - d[0]).abs() / scale);
            }
        }
        let mut tangency: f64 = 0.0;
        for k in 0..nf {
            let (i, j) = self.coords(k);
            for (di, dj) in [(1, 1), (-1, 1)] {
                let dist = (self.center(i + di, j + dj) - self.center(i, j)).norm();
                let r2 = radii[self.index(i + di, j + dj)];
                tangency = tangency.max((dist - radii[k] - r2).abs() / scale);
            }
        }
        FixedPointReport { tangential, weight_equation, diagonal_circles: circles, diagonal_tangency: tangency }
    }

    /// The underlying torus graph: square grid whose vertex `(i, j)` is the
    /// lower-left corner of face `(i, j)`.
    pub fn primal_map(&self) -> CombMap {
        families::square_torus(self.m, self.n)
    }

    /// Edge weights `omega(2e)` of the primal graph: the difference of the
    /// centers on the left and right of the edge traversed white to black.
    pub fn edge_weights(&self, map: &CombMap) -> Vec<Complex64> {
        (0..map.n_edges())
            .map(|e| {
                let v = e / 2;
                let (i, j) = self.coords(v);
                let v_white = map.color(v) == Color::White;
                let forward = if e % 2 == 0 {
                    self.center(i, j) - self.center(i, j - 1)
                } else {
                    self.center(i - 1, j) - self.center(i, j)
                };
                if v_white {
                    forward
                } else {
                    -forward
                }
            })
            .collect()
    }

    /// Argument of the alternating product of edge weights along each
    /// zigzag loop of the primal graph, in `(-pi, pi]`. The primal vertex
    /// colors swap at every mutation, so the sign is corrected by the
    /// parity of `next`.
    pub fn zigzag_invariants(&self) -> Vec<f64> {
        let map = self.primal_map();
        let w = self.edge_weights(&map);
        let sign = if self.next == Color::Black { 1.0 } else { -1.0 };
        map.zigzag_loops()
            .iter()
            .map(|l| {
                let mut p = Complex64::new(1.0, 0.0);
                // White-to-black edges in the numerator, black-to-white in
                // the denominator.
                for &h in &l.halves {
                    p = if h % 2 == 0 { p * w[h / 2] } else { p / w[h / 2] };
                    p /= p.norm();
                }
                sign * p.arg()
            })
            .collect()
    }

    /// Moves a point of the circle pattern at grid vertex `(i, j)` under the
    /// mutation of `color`: it is reflected across the line joining the two
    /// adjacent centers of the other color.
    pub fn move_vertex(&self, i: i64, j: i64, z: Complex64, color: Color) -> Complex64 {
        let around = [(i - 1, j - 1), (i, j - 1), (i, j), (i - 1, j)];
        let keep: Vec<Complex64> =
            around.iter().filter(|&&(a, b)| face_color(a, b) != color).map(|&(a, b)| self.center(a, b)).collect();
        geom::reflect(z, keep[0], keep[1])
    }
}

/// Smallest angle difference between two angles, in `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}
