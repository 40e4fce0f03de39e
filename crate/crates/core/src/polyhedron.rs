//! Rational polyhedra `{t : A t ≤ b}`: normal form, recession rays, vertices,
//! pulling triangulations and Fourier–Motzkin bounds for nested quadrature.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::lattice::primitive_scale;
use crate::linalg::{self, maximize_free, LpResult, Mat};
use crate::quadrature::End;
use crate::scalar::{q, rational_approx, to_f64, Rational};

/// Half-space `normal · t ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Halfspace {
    pub normal: Vec<Rational>,
    pub bound: Rational,
}

impl Halfspace {
    pub fn new(normal: Vec<Rational>, bound: Rational) -> Halfspace {
        Halfspace { normal, bound }
    }

    /// `t_i ≥ lo`.
    pub fn lower(d: usize, i: usize, lo: Rational) -> Halfspace {
        let mut a = vec![Rational::zero(); d];
        a[i] = -Rational::one();
        Halfspace { normal: a, bound: -lo }
    }

    /// `t_i ≤ hi`.
    pub fn upper(d: usize, i: usize, hi: Rational) -> Halfspace {
        let mut a = vec![Rational::zero(); d];
        a[i] = Rational::one();
        Halfspace { normal: a, bound: hi }
    }

    pub fn slack(&self, t: &[Rational]) -> Rational {
        &self.bound - linalg::dot(&self.normal, t)
    }

    fn scaled(&self) -> Option<Halfspace> {
        if self.normal.iter().all(Zero::is_zero) {
            return None;
        }
        let s = primitive_scale(&self.normal);
        Some(Halfspace { normal: self.normal.iter().map(|x| x * &s).collect(), bound: &self.bound * &s })
    }
}

/// Polyhedron in `R^dim`; rows are kept primitive, sorted and free of duplicates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polyhedron {
    dim: usize,
    rows: Vec<Halfspace>,
    empty: bool,
}

impl Polyhedron {
    pub fn whole(dim: usize) -> Polyhedron {
        Polyhedron { dim, rows: Vec::new(), empty: false }
    }

    pub fn new(dim: usize, rows: Vec<Halfspace>) -> Polyhedron {
        let mut p = Polyhedron::whole(dim);
        for r in rows {
            p.push(r);
        }
        p.rows.sort();
        p.rows.dedup();
        p
    }

    /// Box with optional bounds per coordinate.
    pub fn boxed(bounds: &[(Option<Rational>, Option<Rational>)]) -> Polyhedron {
        let d = bounds.len();
        let mut rows = Vec::new();
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            if let Some(lo) = lo {
                rows.push(Halfspace::lower(d, i, lo.clone()));
            }
            if let Some(hi) = hi {
                rows.push(Halfspace::upper(d, i, hi.clone()));
            }
        }
        Polyhedron::new(d, rows)
    }

    fn push(&mut self, h: Halfspace) {
        match h.scaled() {
            Some(h) => self.rows.push(h),
            None => {
                if h.bound.is_negative() {
                    self.empty = true;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn intersect(&self, o: &Polyhedron) -> Polyhedron {
        let mut rows = self.rows.clone();
        rows.extend(o.rows.iter().cloned());
        let mut p = Polyhedron::new(self.dim, rows);
        p.empty |= self.empty || o.empty;
        p
    }

    pub fn with(&self, h: Halfspace) -> Polyhedron {
        self.intersect(&Polyhedron::new(self.dim, vec![h]))
    }

    pub fn contains(&self, t: &[Rational]) -> bool {
        !self.empty && self.rows.iter().all(|h| !h.slack(t).is_negative())
    }

    pub fn contains_f64(&self, t: &[f64], eps: f64) -> bool {
        !self.empty
            && self.rows.iter().all(|h| {
                let v: f64 = h.normal.iter().zip(t).map(|(a, x)| to_f64(a) * x).sum();
                v <= to_f64(&h.bound) + eps
            })
    }

    /// `max c·t`.
    pub fn maximize(&self, c: &[Rational]) -> LpResult {
        if self.empty {
            return LpResult::Infeasible;
        }
        let (a, b) = self.matrix();
        maximize_free(c, &a, &b)
    }

    fn matrix(&self) -> (Mat, Vec<Rational>) {
        (self.rows.iter().map(|h| h.normal.clone()).collect(), self.rows.iter().map(|h| h.bound.clone()).collect())
    }

    /// Whether the polyhedron has a nonempty interior, with an interior point.
    pub fn interior_point(&self) -> Option<Vec<Rational>> {
        if self.empty {
            return None;
        }
        let d = self.dim;
        let mut a: Mat = self
            .rows
            .iter()
            .map(|h| {
                let mut r = h.normal.clone();
                r.push(Rational::one());
                r
            })
            .collect();
        let mut b: Vec<Rational> = self.rows.iter().map(|h| h.bound.clone()).collect();
        let mut cap = vec![Rational::zero(); d];
        cap.push(Rational::one());
        a.push(cap.clone());
        b.push(Rational::one());
        match maximize_free(&cap, &a, &b) {
            LpResult::Optimal { x, value } if value.is_positive() => Some(x[..d].to_vec()),
            _ => None,
        }
    }

    pub fn has_interior(&self) -> bool {
        self.interior_point().is_some()
    }

    /// Drops redundant rows; assumes a nonempty interior.
    pub fn irredundant(&self) -> Polyhedron {
        let mut rows = self.rows.clone();
        let mut i = 0;
        while i < rows.len() {
            let others: Vec<Halfspace> = rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, h)| h.clone()).collect();
            let p = Polyhedron { dim: self.dim, rows: others.clone(), empty: false };
            let redundant = match p.maximize(&rows[i].normal) {
                LpResult::Optimal { value, .. } => value <= rows[i].bound,
                LpResult::Infeasible => true,
                LpResult::Unbounded => false,
            };
            if redundant {
                rows = others;
            } else {
                i += 1;
            }
        }
        Polyhedron { dim: self.dim, rows, empty: self.empty }
    }

    /// Image under `t = M s + c` pulled back: `{s : A(M s + c) ≤ b}`.
    pub fn pullback(&self, m: &[Vec<Rational>], c: &[Rational]) -> Polyhedron {
        let d = m.first().map_or(0, Vec::len);
        let rows = self
            .rows
            .iter()
            .map(|h| {
                let normal: Vec<Rational> = (0..d).map(|j| (0..self.dim).fold(Rational::zero(), |acc, i| acc + &h.normal[i] * &m[i][j])).collect();
                Halfspace { normal, bound: &h.bound - linalg::dot(&h.normal, c) }
            })
            .collect();
        let mut p = Polyhedron::new(d, rows);
        p.empty |= self.empty;
        p
    }

    /// Generators of the recession cone: extreme rays plus both signs of a lineality basis.
    pub fn recession_rays(&self) -> Vec<Vec<Rational>> {
        cone_generators(self.dim, &self.rows.iter().map(|h| h.normal.clone()).collect::<Vec<_>>(), &[])
    }

    pub fn is_bounded(&self) -> bool {
        self.empty || self.recession_rays().is_empty()
    }

    /// Vertices of a bounded polyhedron.
    pub fn vertices(&self) -> Vec<Vec<Rational>> {
        let d = self.dim;
        let mut out: BTreeSet<Vec<Rational>> = BTreeSet::new();
        if d == 0 {
            if !self.empty {
                out.insert(Vec::new());
            }
            return out.into_iter().collect();
        }
        for subset in subsets(self.rows.len(), d) {
            let a: Mat = subset.iter().map(|&i| self.rows[i].normal.clone()).collect();
            if linalg::rank(&a) < d {
                continue;
            }
            let b: Vec<Rational> = subset.iter().map(|&i| self.rows[i].bound.clone()).collect();
            if let Some(x) = linalg::solve(&a, &b) {
                if self.contains(&x) {
                    out.insert(x);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Pulling triangulation of a bounded full-dimensional polyhedron into simplices.
    pub fn triangulate(&self) -> Vec<Vec<Vec<Rational>>> {
        let verts = self.vertices();
        let all: Vec<usize> = (0..verts.len()).collect();
        let mut out = Vec::new();
        self.pull(&verts, &all, self.dim, &mut out);
        out.into_iter().map(|s: Vec<usize>| s.into_iter().map(|i| verts[i].clone()).collect()).collect()
    }

    fn pull(&self, verts: &[Vec<Rational>], face: &[usize], k: usize, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(vec![face[0]]);
            return;
        }
        let v0 = face[0];
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        for h in &self.rows {
            let sub: Vec<usize> = face.iter().copied().filter(|&i| h.slack(&verts[i]).is_zero()).collect();
            if sub.contains(&v0) || sub.len() < k || affine_dim(verts, &sub) != k - 1 || !seen.insert(sub.clone()) {
                continue;
            }
            let mut simplices = Vec::new();
            self.pull(verts, &sub, k - 1, &mut simplices);
            for mut s in simplices {
                s.insert(0, v0);
                out.push(s);
            }
        }
    }

    /// Fourier–Motzkin projections: entry `k` constrains `t_0..t_k` only.
    pub fn elimination_levels(&self) -> Vec<Vec<Halfspace>> {
        let d = self.dim;
        let mut levels = vec![Vec::new(); d];
        let mut cur = self.rows.clone();
        for k in (0..d).rev() {
            levels[k] = cur.clone();
            let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
            for h in cur {
                if h.normal[k].is_positive() {
                    pos.push(h);
                } else if h.normal[k].is_negative() {
                    neg.push(h);
                } else {
                    rest.push(h);
                }
            }
            let mut next = Polyhedron::new(d, rest);
            for p in &pos {
                for n in &neg {
                    let (a, b) = (-n.normal[k].clone(), p.normal[k].clone());
                    let normal = p.normal.iter().zip(&n.normal).map(|(x, y)| x * &a + y * &b).collect();
                    next.push(Halfspace { normal, bound: &p.bound * &a + &n.bound * &b });
                }
            }
            next.rows.sort();
            next.rows.dedup();
            if next.rows.len() > 24 && next.has_interior() {
                next = next.irredundant();
            }
            cur = next.rows;
        }
        levels
    }

    /// Bounds of `t_k` given `t_<k` from the elimination levels.
    pub fn bounds_at(levels: &[Vec<Halfspace>], k: usize, t: &[f64]) -> (End, End) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for h in &levels[k] {
            let a = to_f64(&h.normal[k]);
            if a == 0.0 {
                continue;
            }
            let rest: f64 = (0..k).map(|i| to_f64(&h.normal[i]) * t[i]).sum();
            let v = (to_f64(&h.bound) - rest) / a;
            if a > 0.0 {
                hi = hi.min(v);
            } else {
                lo = lo.max(v);
            }
        }
        let lo = if lo.is_finite() { End::Fin(lo) } else { End::NegInf };
        let hi = if hi.is_finite() { End::Fin(hi) } else { End::PosInf };
        (lo, hi)
    }

    /// Seeded rational points of the polyhedron, drawn coordinatewise inside `[−r, r]`.
    pub fn sample<R: Rng>(&self, rng: &mut R, count: usize, r: f64) -> Vec<Vec<Rational>> {
        let levels = self.elimination_levels();
        let mut out = Vec::new();
        let mut attempts = 0;
        while out.len() < count && attempts < 20 * count + 100 {
            attempts += 1;
            let mut t: Vec<f64> = Vec::with_capacity(self.dim);
            let mut ok = true;
            for k in 0..self.dim {
                let (lo, hi) = Polyhedron::bounds_at(&levels, k, &t);
                let lo = match lo {
                    End::Fin(x) => x.max(-r),
                    _ => -r,
                };
                let hi = match hi {
                    End::Fin(x) => x.min(r),
                    _ => r,
                };
                if lo > hi {
                    ok = false;
                    break;
                }
                t.push(if lo == hi { lo } else { rng.gen_range(lo..=hi) });
            }
            if !ok {
                continue;
            }
            let x: Vec<Rational> = t.iter().map(|&v| rational_approx(v, 1 << 20)).collect();
            if self.contains(&x) {
                out.push(x);
            }
        }
        out
    }
}

/// Affine dimension of a set of points.
pub fn affine_dim(verts: &[Vec<Rational>], idx: &[usize]) -> usize {
    if idx.is_empty() {
        return 0;
    }
    let v0 = &verts[idx[0]];
    let m: Mat = idx[1..].iter().map(|&i| verts[i].iter().zip(v0).map(|(a, b)| a - b).collect()).collect();
    if m.is_empty() {
        0
    } else {
        linalg::rank(&m)
    }
}

/// All `k`-element subsets of `0..m` in lexicographic order.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    go(0, m, k, &mut cur, &mut out);
    out
}

/// Generators of `{g : A g ≤ 0, E g = 0}`: primitive extreme rays of the pointed part and
/// `±` a basis of the lineality space.
pub fn cone_generators(d: usize, ineq: &[Vec<Rational>], eq: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut all: Mat = ineq.to_vec();
    all.extend(eq.iter().cloned());
    let lineality = if all.is_empty() { (0..d).map(|i| crate::lattice::unit(d, i)).collect() } else { linalg::nullspace(&all, d) };
    let mut out: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for l in &lineality {
        let l = crate::lattice::primitive(l);
        out.insert(l.iter().map(|x| -x).collect());
        out.insert(l);
    }
    let mut fixed: Mat = eq.to_vec();
    fixed.extend(lineality.iter().cloned());
    let free = d - linalg::rank(&if fixed.is_empty() { vec![vec![Rational::zero(); d]] } else { fixed.clone() });
    if free == 0 {
        return out.into_iter().collect();
    }
    for subset in subsets(ineq.len(), free - 1) {
        let mut m = fixed.clone();
        m.extend(subset.iter().map(|&i| ineq[i].clone()));
        let ns = if m.is_empty() { (0..d).map(|i| crate::lattice::unit(d, i)).collect() } else { linalg::nullspace(&m, d) };
        if ns.len() != 1 {
            continue;
        }
        for sign in [1, -1] {
            let v: Vec<Rational> = ns[0].iter().map(|x| x * q(sign)).collect();
            if ineq.iter().all(|a| !linalg::dot(a, &v).is_positive()) {
                out.insert(crate::lattice::primitive(&v));
            }
        }
    }
    out.into_iter().collect()
}
