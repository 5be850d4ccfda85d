//! Kasteleyn matrices, face weights and the matching oracle.
//!
//! A Kasteleyn matrix is stored per edge: `entries[e]` is the contribution of
//! edge `e` to `K(white, black)`, so parallel edges add up when the dense
//! matrix is formed. Rows are indexed by white vertices and columns by black
//! vertices in their color-class order.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcore::{CombMap, Half};
use crate::linalg::{self, CMat};

/// Tolerance on the imaginary part of a face quotient, relative to its modulus.
pub const KASTELEYN_TOL: f64 = 1e-9;

/// Positive real face weights indexed by face id. On the disk the outer-face
/// entry holds the same alternating quotient and is not required to be positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceWeights(pub Vec<f64>);

impl FaceWeights {
    pub fn get(&self, f: usize) -> f64 {
        self.0[f]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignConvention {
    /// Entries are `+-` edge weights.
    Real,
    /// Entries carry unit-modulus complex phases.
    Complex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KasteleynMatrix {
    pub entries: Vec<Complex64>,
    pub n_white: usize,
    pub n_black: usize,
    pub convention: SignConvention,
}

impl KasteleynMatrix {
    pub fn from_entries(map: &CombMap, entries: Vec<Complex64>, convention: SignConvention) -> Self {
        KasteleynMatrix {
            entries,
            n_white: map.whites().len(),
            n_black: map.blacks().len(),
            convention,
        }
    }

    /// Dense white-by-black matrix.
    pub fn matrix(&self, map: &CombMap) -> CMat {
        let mut m = CMat::zeros(self.n_white, self.n_black);
        for (e, &[w, b]) in map.edges().iter().enumerate() {
            m[(map.color_index(w), map.color_index(b))] += self.entries[e];
        }
        m
    }

    /// `D_W K D_B` with the given diagonal entries on whites and blacks
    /// (indexed by color class).
    pub fn gauge(&self, map: &CombMap, white: &[Complex64], black: &[Complex64]) -> Self {
        let entries = map
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &[w, b])| white[map.color_index(w)] * self.entries[e] * black[map.color_index(b)])
            .collect();
        KasteleynMatrix { entries, convention: SignConvention::Complex, ..*self }
    }
}

/// Alternating quotient over a face: product of values on edges traversed
/// white to black divided by the product on edges traversed black to white.
pub fn face_quotient<T>(map: &CombMap, f: usize, value: impl Fn(usize) -> T) -> T
where
    T: std::ops::Mul<Output = T> + std::ops::Div<Output = T> + From<f64> + Copy,
{
    let mut num = T::from(1.0);
    let mut den = T::from(1.0);
    for &h in map.face_halves(f) {
        if h % 2 == 0 {
            num = num * value(h / 2);
        } else {
            den = den * value(h / 2);
        }
    }
    num / den
}

fn kasteleyn_sign(map: &CombMap, f: usize) -> f64 {
    let k = map.face_degree(f) / 2;
    if k % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Alternating-product face weights from positive edge weights.
pub fn face_weights_from_edges(map: &CombMap, weights: &[f64]) -> Result<FaceWeights> {
    check_weights(weights)?;
    Ok(FaceWeights((0..map.n_faces()).map(|f| face_quotient(map, f, |e| weights[e])).collect()))
}

/// Face weights recovered from a (gauge-equivalent) Kasteleyn matrix:
/// `(-1)^(k+1)` times the alternating quotient of entries, which must be a
/// positive real on every face other than the outer one.
pub fn face_weights_from_matrix(map: &CombMap, k: &KasteleynMatrix) -> Result<FaceWeights> {
    let mut out = Vec::with_capacity(map.n_faces());
    for f in 0..map.n_faces() {
        let q = face_quotient(map, f, |e| k.entries[e]) * kasteleyn_sign(map, f);
        if !map.is_outer(f) && (q.im.abs() > KASTELEYN_TOL * q.norm() || q.re <= 0.0) {
            return Err(Error::NotKasteleyn { face: f, imag: q.im });
        }
        out.push(q.re);
    }
    Ok(FaceWeights(out))
}

fn check_weights(weights: &[f64]) -> Result<()> {
    for (e, &w) in weights.iter().enumerate() {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidWeight { edge: e, value: w });
        }
    }
    Ok(())
}

/// Spanning-tree scaffolding shared by sign assignment and weight
/// reconstruction: faces in breadth-first order from the root face over a
/// spanning tree of the dual built from edges outside a primal spanning
/// tree, with the edge linking each face to its parent.
struct TreePeel {
    order: Vec<usize>,
    parent_edge: Vec<Option<usize>>,
}

fn tree_peel(map: &CombMap) -> TreePeel {
    let ne = map.n_edges();
    let nv = map.n_vertices();
    let mut in_primal_tree = vec![false; ne];
    let mut seen = vec![false; nv];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for h in map.outgoing(v) {
            let u = map.dest(h);
            if !seen[u] {
                seen[u] = true;
                in_primal_tree[h / 2] = true;
                queue.push_back(u);
            }
        }
    }
    let nf = map.n_faces();
    let root = map.outer_face().unwrap_or(0);
    let mut parent_edge = vec![None; nf];
    let mut fseen = vec![false; nf];
    let mut order = vec![root];
    fseen[root] = true;
    let mut i = 0;
    while i < order.len() {
        let f = order[i];
        i += 1;
        for &h in map.face_halves(f) {
            let e = h / 2;
            if in_primal_tree[e] {
                continue;
            }
            let g = map.face(h ^ 1);
            if !fseen[g] {
                fseen[g] = true;
                parent_edge[g] = Some(e);
                order.push(g);
            }
        }
    }
    TreePeel { order, parent_edge }
}

/// Signs `+-1` satisfying the Kasteleyn condition on every face except the
/// outer one (disk) or the root face (torus, where it then holds
/// automatically when the vertex count is even).
pub fn kasteleyn_signs(map: &CombMap) -> Vec<f64> {
    let peel = tree_peel(map);
    let mut sign = vec![1.0; map.n_edges()];
    for &f in peel.order.iter().skip(1).rev() {
        let e = peel.parent_edge[f].expect("non-root face has a parent edge");
        let mut prod = 1.0;
        let mut mult = 0;
        for &h in map.face_halves(f) {
            if h / 2 == e {
                mult += 1;
            } else {
                prod *= sign[h / 2];
            }
        }
        debug_assert_eq!(mult, 1);
        sign[e] = kasteleyn_sign(map, f) * prod;
    }
    sign
}

/// Kasteleyn matrix with real signs and the given positive edge weights.
pub fn assign_signs(map: &CombMap, weights: &[f64]) -> Result<KasteleynMatrix> {
    check_weights(weights)?;
    if map.n_edges() != weights.len() {
        return Err(Error::InvalidMap("weight count differs from edge count".into()));
    }
    let s = kasteleyn_signs(map);
    let entries = s.iter().zip(weights).map(|(s, w)| Complex64::new(s * w, 0.0)).collect();
    Ok(KasteleynMatrix::from_entries(map, entries, SignConvention::Real))
}

/// Positive edge weights realizing the given face weights on every face
/// except the outer/root face. On the torus the product of all face weights
/// must be 1; edges outside both spanning trees get weight 1.
pub fn edge_weights_from_faces(map: &CombMap, x: &[f64]) -> Result<Vec<f64>> {
    for f in map.bounded_faces() {
        if !(x[f] > 0.0) {
            return Err(Error::InvalidWeight { edge: f, value: x[f] });
        }
    }
    let peel = tree_peel(map);
    let mut logw = vec![0.0; map.n_edges()];
    for &f in peel.order.iter().skip(1).rev() {
        let e = peel.parent_edge[f].expect("parent edge");
        let mut acc = 0.0;
        let mut coeff = 0.0;
        for &h in map.face_halves(f) {
            let sgn = if h % 2 == 0 { 1.0 } else { -1.0 };
            if h / 2 == e {
                coeff += sgn;
            } else {
                acc += sgn * logw[h / 2];
            }
        }
        logw[e] = (x[f].ln() - acc) / coeff;
    }
    Ok(logw.into_iter().map(f64::exp).collect())
}

/// `|det K|`.
pub fn partition_function(map: &CombMap, k: &KasteleynMatrix) -> Result<f64> {
    if k.n_white != k.n_black {
        return Err(Error::NotSquare { rows: k.n_white, cols: k.n_black });
    }
    Ok(linalg::det(&k.matrix(map)).norm())
}

/// A perfect matching as a list of edge ids, with its weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    pub edges: Vec<usize>,
    pub weight: f64,
}

/// Exhaustive backtracking enumeration of perfect matchings.
pub fn enumerate_matchings(map: &CombMap, weights: &[f64]) -> Vec<Matching> {
    let whites = map.whites().to_vec();
    if whites.len() != map.blacks().len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut used = vec![false; map.n_vertices()];
    let mut chosen = Vec::new();
    fn rec(
        map: &CombMap,
        weights: &[f64],
        whites: &[usize],
        i: usize,
        used: &mut Vec<bool>,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Matching>,
    ) {
        if i == whites.len() {
            let weight = chosen.iter().map(|&e| weights[e]).product();
            out.push(Matching { edges: chosen.clone(), weight });
            return;
        }
        for h in map.outgoing(whites[i]) {
            let b = map.dest(h);
            if !used[b] {
                used[b] = true;
                chosen.push(h / 2);
                rec(map, weights, whites, i + 1, used, chosen, out);
                chosen.pop();
                used[b] = false;
            }
        }
    }
    rec(map, weights, &whites, 0, &mut used, &mut chosen, &mut out);
    out
}

/// Half-edges of a face listed from a white-to-black half-edge, grouped as
/// `(w_i -> b_i, b_i -> w_{i+1})` pairs.
pub fn face_pairs(map: &CombMap, f: usize) -> Vec<(Half, Half)> {
    let cyc = map.face_halves(f);
    let start = cyc.iter().position(|h| h % 2 == 0).unwrap_or(0);
    (0..cyc.len() / 2)
        .map(|i| (cyc[(start + 2 * i) % cyc.len()], cyc[(start + 2 * i + 1) % cyc.len()]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn four_cycle_has_one_negative_entry() {
        let m = families::four_cycle();
        let k = assign_signs(&m, &[1.0; 4]).unwrap();
        let negatives = k.entries.iter().filter(|z| z.re < 0.0).count();
        assert_eq!(negatives % 2, 1);
        assert!((partition_function(&m, &k).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn four_cycle_face_weight() {
        let m = families::four_cycle();
        let f = m.bounded_faces().next().unwrap();
        // weight 2 on the first edge traversed white to black
        let e = m.face_halves(f)[0] / 2;
        let mut w = vec![1.0; 4];
        w[e] = 2.0;
        let x = face_weights_from_edges(&m, &w).unwrap();
        assert!((x.get(f) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_is_rejected() {
        let m = families::four_cycle();
        assert!(matches!(
            face_weights_from_edges(&m, &[1.0, 0.0, 1.0, 1.0]),
            Err(Error::InvalidWeight { edge: 1, .. })
        ));
    }

    #[test]
    fn weights_from_faces_round_trip() {
        let m = families::cube();
        let x = [1.0, 2.0, 0.5, 3.0, 4.0 / 3.0, 0.0];
        let w = edge_weights_from_faces(&m, &x).unwrap();
        let back = face_weights_from_edges(&m, &w).unwrap();
        for f in m.bounded_faces() {
            assert!((back.get(f) - x[f]).abs() < 1e-12);
        }
    }
}
