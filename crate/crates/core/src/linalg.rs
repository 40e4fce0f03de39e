//! Exact linear algebra over the rationals (and Gaussian rationals for Hermitian
//! factorizations), a Bland-rule simplex, and Jacobi eigenvalues for doubles.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Div;

use num_traits::{One, Signed, Zero};

use crate::scalar::{Gaussian, Rational, Scalar};

pub type Mat = Vec<Vec<Rational>>;

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &[Vec<Rational>]) -> (Mat, Vec<usize>) {
    let mut a: Mat = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    rref(m).1.len()
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[row][f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `a x = b`, if one exists.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let aug: Mat = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = r[row][cols].clone();
    }
    Some(x)
}

pub fn transpose(m: &[Vec<Rational>]) -> Mat {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| (0..rows).map(|i| m[i][j].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Mat {
    let bt = transpose(b);
    a.iter().map(|row| bt.iter().map(|col| dot(row, col)).collect()).collect()
}

pub fn inverse(m: &[Vec<Rational>]) -> Option<Mat> {
    let n = m.len();
    let aug: Mat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Mat = m.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] * &inv;
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

/// Field with an involutive conjugation whose fixed part is the rationals.
pub trait StarField: Scalar + Div<Output = Self> {
    fn star(&self) -> Self;
    fn real_part(&self) -> Rational;
    fn norm_sqr(&self) -> Rational;
}

impl StarField for Rational {
    fn star(&self) -> Self {
        self.clone()
    }
    fn real_part(&self) -> Rational {
        self.clone()
    }
    fn norm_sqr(&self) -> Rational {
        self * self
    }
}

impl StarField for Gaussian {
    fn star(&self) -> Self {
        Gaussian::new(self.re.clone(), -self.im.clone())
    }
    fn real_part(&self) -> Rational {
        self.re.clone()
    }
    fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }
}

/// `x* M y` for a Hermitian (or symmetric) matrix.
pub fn hermitian_value<S: StarField>(m: &[Vec<S>], x: &[S]) -> Rational {
    let mut acc = S::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, mij) in row.iter().enumerate() {
            acc = acc + x[i].star() * mij.clone() * x[j].clone();
        }
    }
    acc.real_part()
}

/// Outcome of an exact semidefiniteness test.
#[derive(Clone, Debug, PartialEq)]
pub enum Definiteness<S> {
    /// `M = Σ d_k l_k l_k*` with every `d_k > 0`.
    Psd { factors: Vec<(Rational, Vec<S>)> },
    /// `x* M x = value < 0`.
    Indefinite { witness: Vec<S>, value: Rational },
}

/// Exact LDL* with semidefinite pivoting; `m` must be Hermitian.
pub fn ldl_psd<S: StarField>(m: &[Vec<S>]) -> Definiteness<S> {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m.to_vec();
    let mut ls: Vec<Option<Vec<S>>> = vec![None; n];
    let mut factors = Vec::new();
    for k in 0..n {
        let d = a[k][k].real_part();
        let mut y: Option<Vec<S>> = None;
        if d.is_negative() {
            let mut v = vec![S::zero(); n];
            v[k] = S::one();
            y = Some(v);
        } else if d.is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                let skj = a[k][j].clone();
                let sjj = a[j][j].real_part();
                let c = (sjj.abs() + Rational::one()) / skj.norm_sqr();
                let mut v = vec![S::zero(); n];
                v[k] = -(S::from_rational(&c) * skj);
                v[j] = S::one();
                y = Some(v);
            }
        }
        if let Some(y) = y {
            let x = back_substitute(&ls, y);
            let value = hermitian_value(m, &x);
            debug_assert!(value.is_negative());
            return Definiteness::Indefinite { witness: x, value };
        }
        if d.is_zero() {
            continue;
        }
        let dk = S::from_rational(&d);
        let mut l = vec![S::zero(); n];
        l[k] = S::one();
        for i in k + 1..n {
            l[i] = a[i][k].clone() / dk.clone();
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = l[i].clone() * dk.clone() * l[j].star();
                a[i][j] = a[i][j].clone() - t;
            }
        }
        factors.push((d, l.clone()));
        ls[k] = Some(l);
    }
    Definiteness::Psd { factors }
}

/// Solves `L* x = y` for the processed unit lower factor `L`.
fn back_substitute<S: StarField>(ls: &[Option<Vec<S>>], y: Vec<S>) -> Vec<S> {
    let n = y.len();
    let mut x = y;
    for k in (0..n).rev() {
        if let Some(l) = &ls[k] {
            let mut acc = x[k].clone();
            for i in k + 1..n {
                acc = acc - l[i].star() * x[i].clone();
            }
            x[k] = acc;
        }
    }
    x
}

pub fn is_positive_definite<S: StarField>(m: &[Vec<S>]) -> bool {
    match ldl_psd(m) {
        Definiteness::Psd { factors } => factors.len() == m.len(),
        Definiteness::Indefinite { .. } => false,
    }
}

/// Result of a linear program.
#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Optimal { x: Vec<Rational>, value: Rational },
    Unbounded,
    Infeasible,
}

/// Maximizes `c·x` subject to `a x = b`, `x ≥ 0` (two-phase simplex, Bland's rule).
pub fn simplex(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpResult {
    let nv = c.len();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for (row, bi) in a.iter().zip(b) {
        if bi.is_negative() {
            rows.push(row.iter().map(|v| -v.clone()).collect());
            rhs.push(-bi.clone());
        } else {
            rows.push(row.clone());
            rhs.push(bi.clone());
        }
    }
    let m = rows.len();
    let width = nv + m + 1;
    let mut t: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut r = rows[i].clone();
            r.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r.push(rhs[i].clone());
            r
        })
        .collect();
    let mut basis: Vec<usize> = (nv..nv + m).collect();
    // phase 1: maximize -Σ artificials
    let mut obj = vec![Rational::zero(); width];
    for j in nv..nv + m {
        obj[j] = -Rational::one();
    }
    if run_simplex(&mut t, &mut basis, &obj, nv + m).is_err() {
        return LpResult::Infeasible;
    }
    let art: Rational = basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= nv)
        .fold(Rational::zero(), |acc, (i, _)| acc + &t[i][width - 1]);
    if !art.is_zero() {
        return LpResult::Infeasible;
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= nv {
            if let Some(j) = (0..nv).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
                i += 1;
            } else {
                t.remove(i);
                basis.remove(i);
            }
        } else {
            i += 1;
        }
    }
    // phase 2 on the original columns only
    let mut obj2 = vec![Rational::zero(); width];
    obj2[..nv].clone_from_slice(c);
    match run_simplex(&mut t, &mut basis, &obj2, nv) {
        Err(()) => LpResult::Unbounded,
        Ok(()) => {
            let mut x = vec![Rational::zero(); nv];
            for (i, &bj) in basis.iter().enumerate() {
                if bj < nv {
                    x[bj] = t[i][width - 1].clone();
                }
            }
            let value = dot(c, &x);
            LpResult::Optimal { x, value }
        }
    }
}

fn pivot(t: &mut [Vec<Rational>], basis: &mut [usize], r: usize, c: usize) {
    let inv = t[r][c].recip();
    for x in t[r].iter_mut() {
        *x *= &inv;
    }
    let pr = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pr) {
                *x -= &f * p;
            }
        }
    }
    basis[r] = c;
}

/// Maximizes `obj` over columns `< allowed`; `Err` on unboundedness.
fn run_simplex(
    t: &mut [Vec<Rational>],
    basis: &mut [usize],
    obj: &[Rational],
    allowed: usize,
) -> core::result::Result<(), ()> {
    let width = obj.len();
    loop {
        // reduced costs: obj_j - Σ obj_basis * t_ij
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let z = basis
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (i, &bj)| acc + &obj[bj] * &t[i][j]);
            (&obj[j] - z).is_positive()
        });
        let Some(j) = entering else {
            return Ok(());
        };
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = best else {
            return Err(());
        };
        pivot(t, basis, r, j);
    }
}

/// Maximizes `c·x` over free `x` with `a x ≤ b`.
pub fn maximize_free(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpResult {
    let n = c.len();
    let m = a.len();
    let rows: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Rational> = row.clone();
            r.extend(row.iter().map(|v| -v.clone()));
            r.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let mut cc: Vec<Rational> = c.to_vec();
    cc.extend(c.iter().map(|v| -v.clone()));
    cc.extend((0..m).map(|_| Rational::zero()));
    match simplex(&rows, b, &cc) {
        LpResult::Optimal { x, value } => {
            let y = (0..n).map(|i| &x[i] - &x[n + i]).collect();
            LpResult::Optimal { x: y, value }
        }
        other => other,
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if libm::fabs(a[p][q]) < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Eigenvalues of a Hermitian matrix given by real and imaginary parts.
pub fn hermitian_eigenvalues(re: &[Vec<f64>], im: &[Vec<f64>]) -> Vec<f64> {
    let n = re.len();
    let mut big = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            big[i][j] = re[i][j];
            big[n + i][n + j] = re[i][j];
            big[i][n + j] = -im[i][j];
            big[n + i][j] = im[i][j];
        }
    }
    let mut ev = symmetric_eigenvalues(&big);
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    // each eigenvalue appears twice in the real embedding
    ev.into_iter().step_by(2).collect()
}
