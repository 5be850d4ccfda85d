//! Plane geometry on complex numbers.

use num_complex::Complex64;

/// Reflection of `z` across the line through `a` and `b`.
pub fn reflect(z: Complex64, a: Complex64, b: Complex64) -> Complex64 {
    let d = b - a;
    a + d * ((z - a) / d).conj()
}

/// `Im(conj(a) b)`, twice the signed area of the triangle `0, a, b`.
pub fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Circumcenter of three points, `None` when they are collinear.
pub fn circumcenter(a: Complex64, b: Complex64, c: Complex64) -> Option<Complex64> {
    let (b1, c1) = (b - a, c - a);
    let d = 2.0 * cross(b1, c1);
    if d.abs() <= 1e-300 || d.abs() <= 1e-14 * (b1.norm_sqr() + c1.norm_sqr()) {
        return None;
    }
    let ux = (c1.im * b1.norm_sqr() - b1.im * c1.norm_sqr()) / d;
    let uy = (b1.re * c1.norm_sqr() - c1.re * b1.norm_sqr()) / d;
    Some(a + Complex64::new(ux, uy))
}

/// Intersection of the lines `p + s d` and `q + t e`.
pub fn line_intersection(p: Complex64, d: Complex64, q: Complex64, e: Complex64) -> Option<Complex64> {
    let den = cross(d, e);
    if den.abs() <= 1e-14 * d.norm() * e.norm() {
        return None;
    }
    let s = cross(q - p, e) / den;
    Some(p + d * s)
}

/// Foot of the perpendicular from `z` to the line through `a` and `b`.
pub fn foot(z: Complex64, a: Complex64, b: Complex64) -> Complex64 {
    let d = b - a;
    a + d * (((z - a) * d.conj()).re / d.norm_sqr())
}

/// Distance from `z` to the line through `a` and `b`.
pub fn line_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    cross(b - a, z - a).abs() / (b - a).norm()
}

/// Signed area of a polygon (positive when counterclockwise).
pub fn signed_area(poly: &[Complex64]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Whether a polygon is convex and counterclockwise, allowing collinear
/// corners up to `tol` (relative to the squared diameter).
pub fn is_convex_ccw(poly: &[Complex64], tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return true;
    }
    let scale = diameter(poly).powi(2).max(1e-300);
    if signed_area(poly) < -tol * scale {
        return false;
    }
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        cross(b - a, c - b) >= -tol * scale
    })
}

/// Whether `z` is strictly inside the convex counterclockwise polygon.
pub fn strictly_inside_convex(z: Complex64, poly: &[Complex64]) -> bool {
    let n = poly.len();
    (0..n).all(|i| cross(poly[(i + 1) % n] - poly[i], z - poly[i]) > 0.0)
}

pub fn diameter(points: &[Complex64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// Counterclockwise angle from direction `from` to direction `to`, in
/// `[0, 2 pi)`.
pub fn ccw_angle(from: Complex64, to: Complex64) -> f64 {
    let a = (to / from).arg();
    if a < 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

/// Intersections of two circles, `None` if they do not meet.
pub fn circle_intersections(c1: Complex64, r1: f64, c2: Complex64, r2: f64) -> Option<[Complex64; 2]> {
    let d = (c2 - c1).norm();
    if d == 0.0 || d > r1 + r2 + 1e-12 * (r1 + r2) || d < (r1 - r2).abs() - 1e-12 * (r1 + r2) {
        return None;
    }
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let u = (c2 - c1) / d;
    let base = c1 + u * a;
    let perp = u * Complex64::new(0.0, 1.0) * h;
    Some([base + perp, base - perp])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn reflection_across_diagonal() {
        let z = reflect(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 1.0));
        assert!((z - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn circumcenter_of_right_triangle() {
        let o = circumcenter(c(0.0, 0.0), c(2.0, 0.0), c(0.0, 2.0)).unwrap();
        assert!((o - c(1.0, 1.0)).norm() < 1e-15);
        assert!(circumcenter(c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)).is_none());
    }

    #[test]
    fn convexity() {
        let sq = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        assert!(is_convex_ccw(&sq, 1e-12));
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert!(!is_convex_ccw(&rev, 1e-12));
        assert!(strictly_inside_convex(c(0.5, 0.5), &sq));
        assert!(!strictly_inside_convex(c(1.0, 0.5), &sq));
    }

    #[test]
    fn two_circles_meet_twice() {
        let p = circle_intersections(c(0.0, 0.0), 1.0, c(1.0, 0.0), 1.0).unwrap();
        for z in p {
            assert!((z.norm() - 1.0).abs() < 1e-14 && ((z - c(1.0, 0.0)).norm() - 1.0).abs() < 1e-14);
        }
    }
}
