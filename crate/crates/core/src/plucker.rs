//! Grassmann–Plücker quadrics on coefficient vectors of `(p,0)`-forms.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::index::{self, merge_sign, Mask};
use crate::linalg::{self, Mat};
use crate::scalar::{q, Rational};

/// A quadratic form `xᵀ R x` on vectors indexed by the lexicographic `p`-subsets.
pub type Quadric = Mat;

/// Linearly independent Grassmann–Plücker relations for decomposable `p`-vectors in dimension `n`.
pub fn relations(n: usize, p: usize) -> Vec<Quadric> {
    if p < 2 || p + 2 > n {
        return Vec::new();
    }
    let subs = index::subsets(n, p);
    let dim = subs.len();
    let pos = |m: Mask| index::rank_of(&subs, m).expect("p-subset");
    let mut kept: Vec<Quadric> = Vec::new();
    let mut flat_rows: Vec<Vec<Rational>> = Vec::new();
    for a in index::subsets(n, p - 1) {
        for b in index::subsets(n, p + 1) {
            let mut r = vec![vec![Rational::zero(); dim]; dim];
            let mut nonzero = false;
            for (l, e) in index::elements(b).into_iter().enumerate() {
                let bit: Mask = 1 << e;
                if a & bit != 0 {
                    continue;
                }
                let s = merge_sign(a, bit) * if l % 2 == 0 { 1 } else { -1 };
                let (k, m) = (pos(a | bit), pos(b & !bit));
                let half = q(s) / q(2);
                r[k][m] += half.clone();
                r[m][k] += half;
                nonzero = true;
            }
            if !nonzero || r.iter().all(|row| row.iter().all(Zero::is_zero)) {
                continue;
            }
            let flat: Vec<Rational> = upper(&r);
            let mut trial = flat_rows.clone();
            trial.push(flat.clone());
            if linalg::rank(&trial) > flat_rows.len() {
                flat_rows.push(flat);
                kept.push(r);
            }
        }
    }
    kept
}

fn upper(r: &Quadric) -> Vec<Rational> {
    let mut v = Vec::new();
    for i in 0..r.len() {
        for j in i..r.len() {
            v.push(r[i][j].clone());
        }
    }
    v
}

pub fn evaluate(r: &Quadric, x: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (i, row) in r.iter().enumerate() {
        if x[i].is_zero() {
            continue;
        }
        for (j, v) in row.iter().enumerate() {
            if !v.is_zero() && !x[j].is_zero() {
                acc += v * &x[i] * &x[j];
            }
        }
    }
    acc
}

/// Three-valued answer of a membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No,
    Unknown,
}

/// Whether the `(p,0)`-form with coefficient vector `x` is a product of `(1,0)`-forms.
pub fn is_decomposable(n: usize, p: usize, x: &[Rational]) -> Decision {
    if relations(n, p).iter().all(|r| evaluate(r, x).is_zero()) {
        Decision::Yes
    } else {
        Decision::No
    }
}

/// Coefficient vector of `v_1 ∧ … ∧ v_p` for row vectors `v_k ∈ Qⁿ`.
pub fn wedge_of_vectors(n: usize, vs: &[Vec<Rational>]) -> Vec<Rational> {
    let p = vs.len();
    index::subsets(n, p)
        .into_iter()
        .map(|m| {
            let cols = index::elements(m);
            let minor: Mat = vs.iter().map(|v| cols.iter().map(|&c| v[c].clone()).collect()).collect();
            if p == 0 {
                Rational::one()
            } else {
                linalg::det(&minor)
            }
        })
        .collect()
}

/// Least-squares multipliers `c` minimizing `‖M − Σ c_k R_k‖` in the Frobenius norm.
pub fn project(m: &[Vec<Rational>], rels: &[Quadric]) -> Vec<Rational> {
    let k = rels.len();
    if k == 0 {
        return Vec::new();
    }
    let fro = |a: &[Vec<Rational>], b: &[Vec<Rational>]| -> Rational {
        let mut s = Rational::zero();
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                if !x.is_zero() && !y.is_zero() {
                    s += x * y;
                }
            }
        }
        s
    };
    let g: Mat = (0..k).map(|i| (0..k).map(|j| fro(&rels[i], &rels[j])).collect()).collect();
    let h: Vec<Rational> = rels.iter().map(|r| fro(m, r)).collect();
    linalg::solve(&g, &h).unwrap_or_else(|| vec![Rational::zero(); k])
}

pub fn combination(dim: usize, rels: &[Quadric], c: &[Rational]) -> Mat {
    let mut out = vec![vec![Rational::zero(); dim]; dim];
    for (r, ck) in rels.iter().zip(c) {
        if ck.is_zero() {
            continue;
        }
        for i in 0..dim {
            for j in 0..dim {
                if !r[i][j].is_zero() {
                    out[i][j] += ck * &r[i][j];
                }
            }
        }
    }
    out
}
