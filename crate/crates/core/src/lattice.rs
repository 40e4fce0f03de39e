//! Integer lattices inside rational subspaces: primitive scaling, saturation and Hermite normal form.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg;
use crate::scalar::Rational;

/// Positive multiple of `v` with coprime integer entries; the zero vector is returned unchanged.
pub fn primitive(v: &[Rational]) -> Vec<Rational> {
    let mut den = BigInt::one();
    for x in v {
        den = den.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

/// Positive factor `λ` with `λ·v` primitive.
pub fn primitive_scale(v: &[Rational]) -> Rational {
    let p = primitive(v);
    match v.iter().position(|x| !x.is_zero()) {
        Some(i) => &p[i] / &v[i],
        None => Rational::one(),
    }
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    (e.gcd, e.x, e.y)
}

fn to_ints(v: &[Rational]) -> Vec<BigInt> {
    primitive(v).into_iter().map(|x| x.to_integer()).collect()
}

/// Row Hermite normal form of the lattice spanned by integer rows.
/// Pivots are positive and entries above a pivot are reduced into `[0, pivot)`.
pub fn hermite_rows(rows: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut r = 0;
    for c in 0..n {
        if r == m.len() {
            break;
        }
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            if m[r][c].is_zero() {
                m.swap(r, i);
                continue;
            }
            let (g, x, y) = ext_gcd(&m[r][c], &m[i][c]);
            let (a, b) = (&m[r][c] / &g, &m[i][c] / &g);
            let top: Vec<BigInt> = (0..n).map(|j| &x * &m[r][j] + &y * &m[i][j]).collect();
            let bottom: Vec<BigInt> = (0..n).map(|j| &a * &m[i][j] - &b * &m[r][j]).collect();
            m[r] = top;
            m[i] = bottom;
        }
        if m[r][c].is_zero() {
            continue;
        }
        if m[r][c].is_negative() {
            for x in m[r].iter_mut() {
                *x = -x.clone();
            }
        }
        for i in 0..r {
            let f = m[i][c].div_floor(&m[r][c]);
            if !f.is_zero() {
                for j in 0..n {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

/// Canonical basis (row Hermite normal form) of `Z^n ∩ span(vs)`.
pub fn saturated_basis(vs: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    if vs.is_empty() {
        return Vec::new();
    }
    let perp: Vec<Vec<BigInt>> = linalg::nullspace(vs, n).iter().map(|w| to_ints(w)).collect();
    // unimodular column operations bring `perp` to echelon form; the untouched columns of
    // the accumulated transform span the integer kernel
    let mut w = perp;
    let mut u: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut c = 0;
    for r in 0..w.len() {
        if c == n {
            break;
        }
        for j in c + 1..n {
            if w[r][j].is_zero() {
                continue;
            }
            if w[r][c].is_zero() {
                swap_cols(&mut w, c, j);
                swap_cols(&mut u, c, j);
                continue;
            }
            let (g, x, y) = ext_gcd(&w[r][c], &w[r][j]);
            let (a, b) = (&w[r][c] / &g, &w[r][j] / &g);
            combine_cols(&mut w, c, j, &x, &y, &a, &b);
            combine_cols(&mut u, c, j, &x, &y, &a, &b);
        }
        if !w[r][c].is_zero() {
            c += 1;
        }
    }
    let kernel: Vec<Vec<BigInt>> = (c..n).map(|j| (0..n).map(|i| u[i][j].clone()).collect()).collect();
    hermite_rows(&kernel, n).into_iter().map(|row| row.into_iter().map(Rational::from_integer).collect()).collect()
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

// (col_c, col_j) ← (x col_c + y col_j, −b col_c + a col_j), determinant a x + b y = 1
fn combine_cols(m: &mut [Vec<BigInt>], c: usize, j: usize, x: &BigInt, y: &BigInt, a: &BigInt, b: &BigInt) {
    for row in m.iter_mut() {
        let (p, q) = (row[c].clone(), row[j].clone());
        row[c] = x * &p + y * &q;
        row[j] = a * &q - b * &p;
    }
}

/// Index of the first nonzero entry.
pub fn pivot(v: &[Rational]) -> Option<usize> {
    v.iter().position(|x| !x.is_zero())
}

/// Integer vectors as rationals.
pub fn from_i64(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect()
}

/// Unit vector `e_i` in `R^n`.
pub fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qf};

    #[test]
    fn primitive_scaling() {
        assert_eq!(primitive(&[qf(1, 2), qf(3, 4)]), vec![q(2), q(3)]);
        assert_eq!(primitive(&[q(-4), q(6)]), vec![q(-2), q(3)]);
    }

    #[test]
    fn saturation_of_a_diagonal_line() {
        let b = saturated_basis(&[vec![q(2), q(2)]], 2);
        assert_eq!(b, vec![vec![q(1), q(1)]]);
        let b = saturated_basis(&[vec![q(1), q(0), q(1)], vec![q(0), q(2), q(2)]], 3);
        assert_eq!(b, vec![vec![q(1), q(0), q(1)], vec![q(0), q(1), q(1)]]);
        let full = saturated_basis(&[vec![q(3), q(1)], vec![q(1), q(1)]], 2);
        assert_eq!(full, vec![vec![q(1), q(0)], vec![q(0), q(1)]]);
    }
}
