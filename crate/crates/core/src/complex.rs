//! Weighted pure-dimensional polyhedral complexes in `N_R`: lattice-normalized cells,
//! codimension-one faces and the balancing condition.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{self, pivot};
use crate::linalg::{self, Mat};
use crate::measures::Piece;
use crate::poly::Poly;
use crate::polyhedron::{subsets, Halfspace, Polyhedron};
use crate::scalar::Rational;

/// Polyhedron `conv(vertices) + cone(rays)` with an integer weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub vertices: Vec<Vec<Rational>>,
    pub rays: Vec<Vec<Rational>>,
    pub weight: i64,
}

impl Cell {
    pub fn new(vertices: Vec<Vec<Rational>>, rays: Vec<Vec<Rational>>, weight: i64) -> Cell {
        Cell { vertices, rays, weight }
    }

    /// Dimension of the affine hull.
    pub fn dim(&self) -> usize {
        let span = self.span();
        if span.is_empty() {
            0
        } else {
            linalg::rank(&span)
        }
    }

    fn span(&self) -> Vec<Vec<Rational>> {
        let v0 = &self.vertices[0];
        let mut s: Vec<Vec<Rational>> =
            self.vertices[1..].iter().map(|v| v.iter().zip(v0).map(|(a, b)| a - b).collect()).collect();
        s.extend(self.rays.iter().cloned());
        s
    }
}

/// A cell in canonical lattice coordinates `u = origin + basis · t`, `t ∈ region`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellChart {
    pub origin: Vec<Rational>,
    pub basis: Vec<Vec<Rational>>,
    pub region: Polyhedron,
}

/// Key of a codimension-one face: its canonical chart (or the point itself).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FaceKey {
    Point(Vec<Rational>),
    Patch { origin: Vec<Rational>, directions: Vec<Vec<Rational>>, region: Polyhedron },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Balancing {
    Balanced,
    /// Weighted primitive normals around `face` sum to `residual ∉ lin(face)`.
    Unbalanced { face: FaceKey, residual: Vec<Rational> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedComplex {
    n: usize,
    dim: usize,
    cells: Vec<Cell>,
}

impl WeightedComplex {
    pub fn new(n: usize, cells: Vec<Cell>) -> Result<Self> {
        let mut dim = None;
        for c in &cells {
            if c.vertices.is_empty() {
                return Err(Error::Invalid("a cell needs at least one vertex".into()));
            }
            if c.vertices.iter().chain(&c.rays).any(|v| v.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, found: c.vertices[0].len() });
            }
            let d = c.dim();
            match dim {
                None => dim = Some(d),
                Some(e) if e != d => return Err(Error::MixedDimension),
                _ => {}
            }
        }
        Ok(WeightedComplex { n, dim: dim.unwrap_or(0), cells })
    }

    pub fn empty(n: usize, dim: usize) -> Self {
        WeightedComplex { n, dim, cells: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn with_weight(&self, i: usize, w: i64) -> Self {
        let mut c = self.clone();
        c.cells[i].weight = w;
        c
    }

    /// Canonical lattice chart of each cell.
    pub fn charts(&self) -> Vec<CellChart> {
        self.cells.iter().map(|c| chart_of(c, self.n)).collect()
    }

    /// The cell as a piece carrying `weight · λ` (lattice-normalized Lebesgue measure).
    pub fn piece(&self, i: usize, weight: Rational) -> Result<Option<Piece>> {
        let ch = chart_of(&self.cells[i], self.n);
        Piece::new(self.n, 0, ch.origin, ch.basis, ch.region, &Poly::constant(self.n, weight), &Poly::zero(self.n))
    }

    pub fn balancing_check(&self) -> Balancing {
        if self.dim == 0 {
            return Balancing::Balanced;
        }
        let mut sums: BTreeMap<FaceKey, (Vec<Vec<Rational>>, Vec<Rational>)> = BTreeMap::new();
        for (cell, ch) in self.cells.iter().zip(self.charts()) {
            if cell.weight == 0 {
                continue;
            }
            let m = Rational::from_integer(BigInt::from(cell.weight));
            for (idx, h) in ch.region.rows().iter().enumerate() {
                let (key, dirs) = face_of(&ch, idx, self.n);
                let s0 = inward_normal(&h.normal);
                let v = basis_times(&ch.basis, &s0, self.n);
                let e = sums.entry(key).or_insert_with(|| (dirs, vec![Rational::zero(); self.n]));
                for (x, y) in e.1.iter_mut().zip(&v) {
                    *x += &m * y;
                }
            }
        }
        for (key, (dirs, w)) in sums {
            let inside = if dirs.is_empty() {
                w.iter().all(Zero::is_zero)
            } else {
                let mut m = dirs.clone();
                m.push(w.clone());
                linalg::rank(&m) == linalg::rank(&dirs)
            };
            if !inside {
                return Balancing::Unbalanced { face: key, residual: w };
            }
        }
        Balancing::Balanced
    }
}

fn basis_times(basis: &[Vec<Rational>], t: &[Rational], n: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    for (tj, b) in t.iter().zip(basis) {
        for (x, y) in v.iter_mut().zip(b) {
            *x += tj * y;
        }
    }
    v
}

fn chart_of(c: &Cell, n: usize) -> CellChart {
    let span = c.span();
    let basis = if span.is_empty() { Vec::new() } else { lattice::saturated_basis(&span, n) };
    let mut origin = c.vertices[0].clone();
    for h in &basis {
        let p = pivot(h).expect("nonzero");
        let f = &origin[p] / &h[p];
        for (x, y) in origin.iter_mut().zip(h) {
            *x -= &f * y;
        }
    }
    let a: Mat = (0..n).map(|r| basis.iter().map(|b| b[r].clone()).collect()).collect();
    let coords = |x: &[Rational]| -> Vec<Rational> {
        if basis.is_empty() {
            return Vec::new();
        }
        let rhs: Vec<Rational> = x.iter().zip(&origin).map(|(a, b)| a - b).collect();
        linalg::solve(&a, &rhs).expect("point on the affine hull")
    };
    let pts: Vec<Vec<Rational>> = c.vertices.iter().map(|v| coords(v)).collect();
    let rays: Vec<Vec<Rational>> = c
        .rays
        .iter()
        .map(|r| if basis.is_empty() { Vec::new() } else { linalg::solve(&a, r).expect("ray in the span") })
        .collect();
    let region = from_generators(basis.len(), &pts, &rays);
    CellChart { origin, basis, region }
}

/// H-representation of `conv(points) + cone(rays)` in `R^d` (full-dimensional input).
pub fn from_generators(d: usize, points: &[Vec<Rational>], rays: &[Vec<Rational>]) -> Polyhedron {
    if d == 0 {
        return Polyhedron::whole(0);
    }
    let mut dirs: Vec<Vec<Rational>> = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            dirs.push(points[j].iter().zip(&points[i]).map(|(a, b)| a - b).collect());
        }
    }
    dirs.extend(rays.iter().cloned());
    let mut rows = Vec::new();
    for sub in subsets(dirs.len(), d - 1) {
        let m: Mat = sub.iter().map(|&i| dirs[i].clone()).collect();
        let ns = if m.is_empty() { vec![lattice::unit(d, 0)] } else { linalg::nullspace(&m, d) };
        if ns.len() != 1 {
            continue;
        }
        for s in [1i64, -1] {
            let a: Vec<Rational> = ns[0].iter().map(|x| x * Rational::from_integer(s.into())).collect();
            if rays.iter().any(|r| linalg::dot(&a, r).is_positive()) {
                continue;
            }
            let b = points.iter().map(|p| linalg::dot(&a, p)).max().expect("points");
            let mut tight: Vec<Vec<Rational>> = Vec::new();
            let tp: Vec<&Vec<Rational>> = points.iter().filter(|p| linalg::dot(&a, p) == b).collect();
            for p in &tp[1..] {
                tight.push(p.iter().zip(tp[0]).map(|(x, y)| x - y).collect());
            }
            tight.extend(rays.iter().filter(|r| linalg::dot(&a, r).is_zero()).cloned());
            let r = if tight.is_empty() { 0 } else { linalg::rank(&tight) };
            if r == d - 1 {
                rows.push(Halfspace::new(a, b));
            }
        }
    }
    let p = Polyhedron::new(d, rows);
    if p.has_interior() {
        p.irredundant()
    } else {
        p
    }
}

/// Face `region ∩ {row idx tight}` keyed canonically, with the lattice directions of its span.
fn face_of(ch: &CellChart, idx: usize, n: usize) -> (FaceKey, Vec<Vec<Rational>>) {
    let h = &ch.region.rows()[idx];
    let d = ch.basis.len();
    let p = pivot(&h.normal).expect("nonzero normal");
    let mut t0 = vec![Rational::zero(); d];
    t0[p] = &h.bound / &h.normal[p];
    let kernel = if d == 1 { Vec::new() } else { lattice::saturated_basis(&linalg::nullspace(&[h.normal.clone()], d), d) };
    let u0 = {
        let mut u = ch.origin.clone();
        for (x, y) in u.iter_mut().zip(basis_times(&ch.basis, &t0, n)) {
            *x += y;
        }
        u
    };
    if kernel.is_empty() {
        return (FaceKey::Point(u0), Vec::new());
    }
    let dirs: Vec<Vec<Rational>> = kernel.iter().map(|k| basis_times(&ch.basis, k, n)).collect();
    // remaining rows in face parameters: t = t0 + K s
    let km: Mat = (0..d).map(|r| kernel.iter().map(|k| k[r].clone()).collect()).collect();
    let others: Vec<Halfspace> = ch.region.rows().iter().enumerate().filter(|(j, _)| *j != idx).map(|(_, r)| r.clone()).collect();
    let region = Polyhedron::new(d, others).pullback(&km, &t0);
    let piece = Piece::new(n, 0, u0, dirs, region, &Poly::one(n), &Poly::zero(n)).expect("valid face").expect("face has interior");
    let dirs = piece.directions.clone();
    (FaceKey::Patch { origin: piece.origin, directions: piece.directions, region: piece.region }, dirs)
}

/// Integer `s` with `a·s = −1` for a primitive integer vector `a`.
fn inward_normal(a: &[Rational]) -> Vec<Rational> {
    let ints: Vec<BigInt> = a.iter().map(|x| x.to_integer()).collect();
    let d = ints.len();
    let mut g = BigInt::zero();
    let mut c = vec![BigInt::zero(); d];
    for i in 0..d {
        if ints[i].is_zero() {
            continue;
        }
        if g.is_zero() {
            g = ints[i].clone();
            c[i] = BigInt::from(1);
            continue;
        }
        let e = g.extended_gcd(&ints[i]);
        for x in c.iter_mut() {
            *x = &*x * &e.x;
        }
        c[i] = e.y;
        g = e.gcd;
    }
    // a·c = g = ±1
    let s = if g.is_negative() { BigInt::from(1) } else { BigInt::from(-1) };
    c.into_iter().map(|x| Rational::from_integer(x * &s)).collect()
}

fn fmt_vec(v: &[Rational]) -> alloc::string::String {
    let parts: Vec<alloc::string::String> = v.iter().map(crate::scalar::fmt_rational).collect();
    format!("({})", parts.join(", "))
}

/// Human-readable description of a face.
pub fn describe(face: &FaceKey) -> alloc::string::String {
    match face {
        FaceKey::Point(p) => format!("point {}", fmt_vec(p)),
        FaceKey::Patch { origin, directions, .. } => {
            format!("face through {} spanned by {:?}", fmt_vec(origin), directions.iter().map(|d| fmt_vec(d)).collect::<Vec<_>>())
        }
    }
}
