//! Small dense linear-algebra helpers over complex and real matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Determinant via LU with partial pivoting.
pub fn det(m: &CMat) -> Complex64 {
    m.clone().lu().determinant()
}

/// Frobenius norm.
pub fn norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values (descending) with the matching right singular vectors as
/// columns of `v` and left singular vectors as columns of `u`.
pub struct SvdSorted {
    pub values: Vec<f64>,
    pub u: CMat,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> SvdSorted {
    let s = m.clone().svd(true, true);
    let u = s.u.expect("u requested");
    let vt = s.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..s.singular_values.len()).collect();
    order.sort_by(|&a, &b| s.singular_values[b].total_cmp(&s.singular_values[a]));
    let values = order.iter().map(|&i| s.singular_values[i]).collect();
    let u_sorted = CMat::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
    let v_sorted = CMat::from_fn(vt.ncols(), order.len(), |r, k| vt[(order[k], r)].conj());
    SvdSorted { values, u: u_sorted, v: v_sorted }
}

/// Right null vectors of a square matrix: the `k` right singular vectors with
/// smallest singular values. Left null vectors (vectors `y` with
/// `y^T M = 0`) are taken as right null vectors of `M^T`, which is more
/// accurate than the left singular vectors of `M` near a zero singular value.
pub fn null_vectors(m: &CMat, k: usize) -> (Vec<CVec>, Vec<CVec>, Vec<f64>) {
    let s = svd(m);
    let st = svd(&m.transpose());
    let n = s.values.len();
    let mut right = Vec::new();
    let mut left = Vec::new();
    for i in (n - k..n).rev() {
        right.push(s.v.column(i).into_owned());
        left.push(st.v.column(i).into_owned());
    }
    (right, left, s.values)
}

/// Solves `m x = b` by LU.
pub fn solve(m: &CMat, b: &CVec) -> Result<CVec> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))
}

/// Least-squares solution of `m x = b` via SVD.
pub fn lstsq(m: &CMat, b: &CVec) -> Result<CVec> {
    let s = m.clone().svd(true, true);
    s.solve(b, 1e-13).map_err(|e| Error::Singular(e.to_string()))
}

/// Real least squares.
pub fn lstsq_real(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let s = m.clone().svd(true, true);
    s.solve(b, 1e-13).map_err(|e| Error::Singular(e.to_string()))
}

/// Real dense solve.
pub fn solve_real(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("singular real system".into()))
}

/// Roots of the polynomial `sum_k coeffs[k] x^k` (Aberth iteration followed
/// by Newton polishing). Leading zero coefficients are dropped.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg <= 1 {
        return Vec::new();
    }
    let a: Vec<Complex64> = coeffs[..deg].iter().map(|z| z / coeffs[deg - 1]).collect();
    let n = deg - 1;
    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..n).rev() {
            dp = dp * x + p;
            p = p * x + a[k];
        }
        (p, dp)
    };
    let radius = 1.0 + a[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-16 {
            break;
        }
    }
    for r in &mut z {
        for _ in 0..3 {
            let (p, dp) = eval(*r);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.norm() < 1e-6 * (1.0 + r.norm()) {
                    *r -= step;
                }
            }
        }
    }
    z
}

/// The two roots of `a x^2 + b x + c`, numerically stable.
pub fn quadratic_roots(a: Complex64, b: Complex64, cc: Complex64) -> Result<[Complex64; 2]> {
    let scale = a.norm().max(b.norm()).max(cc.norm());
    if a.norm() <= 1e-15 * scale {
        if b.norm() <= 1e-15 * scale {
            return Err(Error::Degenerate("quadratic with vanishing coefficients".into()));
        }
        return Err(Error::Degenerate("quadratic degenerates to linear".into()));
    }
    let disc = (b * b - 4.0 * a * cc).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
    if q.norm() == 0.0 {
        return Ok([Complex64::new(0.0, 0.0); 2]);
    }
    Ok([q / a, cc / q])
}

/// Outcome of a damped Newton iteration.
pub struct NewtonResult {
    pub x: CVec,
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton iteration for a square complex-analytic system. `eval`
/// returns the residual vector and its Jacobian. Steps are halved until the
/// residual norm decreases; the iteration stops below `tol` or when no
/// decrease is possible.
pub fn newton(eval: impl Fn(&CVec) -> (CVec, CMat), x0: CVec, tol: f64, max_iter: usize) -> NewtonResult {
    let mut x = x0;
    let (mut r, mut j) = eval(&x);
    let mut res = r.norm();
    let mut it = 0;
    while it < max_iter && res > tol {
        it += 1;
        let step = match solve(&j, &(-&r)) {
            Ok(s) if s.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => s,
            _ => match lstsq(&j, &(-&r)) {
                Ok(s) => s,
                Err(_) => break,
            },
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &x + &step * Complex64::new(t, 0.0);
            let (rc, jc) = eval(&cand);
            let rn = rc.norm();
            if rn.is_finite() && rn < res {
                x = cand;
                r = rc;
                j = jc;
                res = rn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    NewtonResult { x, residual: res, iterations: it }
}
