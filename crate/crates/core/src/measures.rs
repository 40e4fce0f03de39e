//! Signed Radon measures on the strata of a toric chart: atoms plus sign-pure densities
//! `pol · exp(quad)` carried by polyhedral pieces, with integration, Hahn–Jordan
//! splitting, restriction, image measures and a local-finiteness decision.
//!
//! A piece lives on the stratum whose infinite axes form `stratum`. It is the push-forward
//! of `w(t) dt` on a region of `R^d` under `t ↦ origin + Σ t_j directions_j`. The stored
//! parametrization is canonical: the directions are the Hermite basis of the lattice points
//! of their span, so `dt` is the lattice-normalized Lebesgue measure.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coeff::CoefficientFn;
use crate::error::{Error, RayWitness, Result};
use crate::index::{self, Mask};
use crate::lattice::{self, pivot};
use crate::linalg::{self, LpResult, Mat};
use crate::poly::Poly;
use crate::polyhedron::{Halfspace, Polyhedron};
use crate::quadrature::{self, Settings};
use crate::scalar::{q, to_f64, Coord, Rational};

/// Threshold standing in for "arbitrarily far out" in the local-finiteness test.
const FAR: i64 = 1_000_000;
const SIGN_SAMPLES: usize = 1000;
const SIGN_SEED: u64 = 0x5167_4e00;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Weight `sign · pol(t) · exp(quad(t))` with `pol ≥ 0` on the piece and `deg quad ≤ 2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Density {
    pub pol: Poly,
    pub quad: Poly,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Piece {
    pub stratum: Mask,
    pub origin: Vec<Rational>,
    pub directions: Vec<Vec<Rational>>,
    pub region: Polyhedron,
    pub density: Density,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub point: Vec<Coord>,
    pub weight: Rational,
}

/// `f ↦ −weight · (∂f/∂direction)(point)`; not a measure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivativeAtom {
    pub point: Vec<Coord>,
    pub direction: Vec<Rational>,
    pub weight: Rational,
}

/// Set of infinite axes of a chart point.
pub fn stratum_of(point: &[Coord]) -> Mask {
    point.iter().enumerate().filter(|(_, c)| c.is_inf()).fold(0, |m, (i, _)| m | (1 << i))
}

/// Finite coordinates as floats, infinite ones replaced by 0.
pub fn finite_part(point: &[Coord]) -> Vec<f64> {
    point.iter().map(|c| c.finite().map_or(0.0, to_f64)).collect()
}

fn finite_exact(point: &[Coord]) -> Vec<Rational> {
    point.iter().map(|c| c.finite().cloned().unwrap_or_else(Rational::zero)).collect()
}

/// Chart coordinates `u = origin + D t` as an `n × d` matrix.
fn param_matrix(directions: &[Vec<Rational>], n: usize) -> Mat {
    (0..n).map(|r| directions.iter().map(|v| v[r].clone()).collect()).collect()
}

/// `(Q, ℓ, c)` with `quad(t) = tᵀQt + ℓ·t + c`.
pub fn quadratic_parts(quad: &Poly, d: usize) -> (Mat, Vec<Rational>, Rational) {
    let mut qm = vec![vec![Rational::zero(); d]; d];
    let mut lin = vec![Rational::zero(); d];
    let mut c = Rational::zero();
    let half = Rational::new(1.into(), 2.into());
    for (e, v) in quad.terms() {
        let nz: Vec<usize> = (0..d).filter(|&i| e[i] > 0).collect();
        match (nz.len(), e.iter().sum::<u32>()) {
            (0, _) => c += v,
            (1, 1) => lin[nz[0]] += v,
            (1, 2) => qm[nz[0]][nz[0]] += v,
            (2, 2) => {
                qm[nz[0]][nz[1]] += v * &half;
                qm[nz[1]][nz[0]] += v * &half;
            }
            _ => {}
        }
    }
    (qm, lin, c)
}

fn quad_value(qm: &[Vec<Rational>], a: &[Rational], b: &[Rational]) -> Rational {
    linalg::dot(a, &linalg::mat_vec(qm, b))
}

/// Outcome of the exponent test along the recession cone of a region.
#[derive(Clone, Debug, PartialEq)]
pub enum Decay {
    /// `∫ poly · exp(quad)` over the region is finite.
    Decays,
    /// The integral diverges; mass escapes along this recession direction.
    Grows(Vec<Rational>),
    Undecided(String),
}

/// Decides whether `poly · exp(quad)` is integrable over a polyhedron (for any nonzero
/// polynomial factor). Exact on one-dimensional recession cones and on cones where `quad`
/// is copositive-negative with nonpositive generator cross terms; `Undecided` otherwise.
pub fn decay_check(region: &Polyhedron, quad: &Poly) -> Decay {
    if !region.has_interior() {
        return Decay::Decays;
    }
    let gens = region.recession_rays();
    if gens.is_empty() {
        return Decay::Decays;
    }
    let d = region.dim();
    let (qm, lin, _) = quadratic_parts(quad, d);
    let qv: Vec<Rational> = gens.iter().map(|g| quad_value(&qm, g, g)).collect();
    if let Some(i) = qv.iter().position(|v| v.is_positive()) {
        return Decay::Grows(gens[i].clone());
    }
    // exponent along t0 + s g is quad(t0) + s (2 gᵀQ t0 + ℓ·g) when gᵀQg = 0
    let flat = |g: &Vec<Rational>| -> Option<Decay> {
        let c: Vec<Rational> = linalg::mat_vec(&qm, g).into_iter().map(|x| x * q(2)).collect();
        match region.maximize(&c) {
            LpResult::Optimal { value, .. } if !(&value + linalg::dot(&lin, g)).is_negative() => Some(Decay::Grows(g.clone())),
            LpResult::Unbounded => Some(Decay::Undecided(format!("slope along {g:?} is unbounded on the region"))),
            _ => None,
        }
    };
    for (g, v) in gens.iter().zip(&qv) {
        if v.is_zero() {
            if let Some(r) = flat(g) {
                return r;
            }
        }
    }
    let mut undecided = false;
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let x = quad_value(&qm, &gens[i], &gens[j]);
            if !x.is_positive() {
                continue;
            }
            let comb = |b: &Rational| -> Vec<Rational> {
                lattice::primitive(&gens[i].iter().zip(&gens[j]).map(|(a, c)| a + c * b).collect::<Vec<_>>())
            };
            // max over b ≥ 0 of qv_i + 2 x b + qv_j b²
            if qv[j].is_negative() {
                let disc = &x * &x - &qv[i] * &qv[j];
                let b = -&x / &qv[j];
                if disc.is_positive() {
                    return Decay::Grows(comb(&b));
                }
                if disc.is_zero() {
                    if let Some(r) = flat(&comb(&b)) {
                        return r;
                    }
                }
                undecided |= gens.len() > 2;
            } else {
                return Decay::Grows(comb(&((Rational::one() - &qv[i]) / (&x * q(2)))));
            }
        }
    }
    if undecided {
        Decay::Undecided("quadratic exponent is not sign-resolved on the recession cone".into())
    } else {
        Decay::Decays
    }
}

fn certify_sign(pol: &Poly, region: &Polyhedron) -> Result<i32> {
    if pol.is_zero() {
        return Ok(0);
    }
    if pol.degree() == 0 {
        let c = pol.eval(&vec![Rational::zero(); pol.nvars()]);
        return Ok(if c.is_positive() { 1 } else { -1 });
    }
    if region.dim() == 1 {
        let (mut lo, mut hi): (Option<Rational>, Option<Rational>) = (None, None);
        for h in region.rows() {
            let v = &h.bound / &h.normal[0];
            if h.normal[0].is_positive() {
                hi = Some(match hi {
                    Some(x) if x < v => x,
                    _ => v,
                });
            } else {
                let v = v;
                lo = Some(match lo {
                    Some(x) if x > v => x,
                    _ => v,
                });
            }
        }
        let u = pol.to_univariate().expect("one variable");
        return u
            .constant_sign_on(lo.as_ref(), hi.as_ref())
            .ok_or_else(|| Error::SignCertificate(format!("weight {pol:?} changes sign on the piece")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SIGN_SEED);
    let pts = region.sample(&mut rng, SIGN_SAMPLES, 1.0e3);
    let (mut pos, mut neg) = (false, false);
    for t in &pts {
        let v = pol.eval(t);
        pos |= v.is_positive();
        neg |= v.is_negative();
    }
    match (pos, neg) {
        (true, true) => Err(Error::SignCertificate(format!("weight {pol:?} takes both signs on sampled points"))),
        (_, true) => Ok(-1),
        _ => Ok(1),
    }
}

impl Piece {
    /// Push-forward of `w(origin + D t) dt`, `w = pol · exp(quad)`, on `region ⊆ R^d`,
    /// with `pol` and `quad` written in chart coordinates. `None` for a null piece.
    pub fn new(
        n: usize,
        stratum: Mask,
        origin: Vec<Rational>,
        directions: Vec<Vec<Rational>>,
        region: Polyhedron,
        pol: &Poly,
        quad: &Poly,
    ) -> Result<Option<Piece>> {
        let d = directions.len();
        if d == 0 {
            return Err(Error::Invalid("a zero-dimensional piece is an atom".into()));
        }
        if origin.len() != n || directions.iter().any(|v| v.len() != n) || region.dim() != d {
            return Err(Error::DimensionMismatch { expected: n, found: origin.len() });
        }
        if pol.nvars() != n || quad.nvars() != n {
            return Err(Error::DimensionMismatch { expected: n, found: pol.nvars() });
        }
        if quad.degree() > 2 {
            return Err(Error::Invalid("exponent of a density has degree at most 2".into()));
        }
        for a in index::elements(stratum) {
            if !origin[a].is_zero() || directions.iter().any(|v| !v[a].is_zero()) {
                return Err(Error::Invalid(format!("piece on stratum {{{}}} moves along an infinite axis", index::label(stratum))));
            }
        }
        if linalg::rank(&directions) < d {
            return Err(Error::Invalid("piece directions are linearly dependent".into()));
        }
        let a = param_matrix(&directions, n);
        let pol_t = pol.compose_affine(&origin, &a);
        let quad_t = quad.compose_affine(&origin, &a);
        Piece::canonical(n, stratum, &origin, &directions, region, pol_t, quad_t, Sign::Plus)
    }

    /// Lattice-normalized Lebesgue measure on a box of the stratum, times `pol · exp(quad)`.
    pub fn on_box(
        n: usize,
        stratum: Mask,
        bounds: &[(Option<Rational>, Option<Rational>)],
        pol: &Poly,
        quad: &Poly,
    ) -> Result<Option<Piece>> {
        let free: Vec<usize> = (0..n).filter(|a| stratum & (1 << a) == 0).collect();
        let dirs = free.iter().map(|&a| lattice::unit(n, a)).collect();
        let region = Polyhedron::boxed(&free.iter().map(|&a| bounds[a].clone()).collect::<Vec<_>>());
        Piece::new(n, stratum, vec![Rational::zero(); n], dirs, region, pol, quad)
    }

    /// Piece given in its own parameters: `pol` and `quad` are polynomials in `t ∈ region`
    /// and the density is `sign · pol(t) · exp(quad(t))` for the point `origin + D t`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parametrized(
        n: usize,
        stratum: Mask,
        origin: Vec<Rational>,
        directions: Vec<Vec<Rational>>,
        region: Polyhedron,
        pol: Poly,
        quad: Poly,
        sign: Sign,
    ) -> Result<Option<Piece>> {
        let d = directions.len();
        if d == 0 {
            return Err(Error::Invalid("a zero-dimensional piece is an atom".into()));
        }
        if origin.len() != n || directions.iter().any(|v| v.len() != n) || region.dim() != d {
            return Err(Error::DimensionMismatch { expected: n, found: origin.len() });
        }
        if pol.nvars() != d || quad.nvars() != d {
            return Err(Error::DimensionMismatch { expected: d, found: pol.nvars() });
        }
        if quad.degree() > 2 {
            return Err(Error::Invalid("exponent of a density has degree at most 2".into()));
        }
        if index::elements(stratum).iter().any(|&a| !origin[a].is_zero() || directions.iter().any(|v| !v[a].is_zero())) {
            return Err(Error::Invalid(format!("piece on stratum {{{}}} moves along an infinite axis", index::label(stratum))));
        }
        if linalg::rank(&directions) < d {
            return Err(Error::Invalid("piece directions are linearly dependent".into()));
        }
        Piece::canonical(n, stratum, &origin, &directions, region, pol, quad, sign)
    }

    #[allow(clippy::too_many_arguments)]
    fn canonical(
        n: usize,
        stratum: Mask,
        origin: &[Rational],
        directions: &[Vec<Rational>],
        region: Polyhedron,
        pol_t: Poly,
        quad_t: Poly,
        sign: Sign,
    ) -> Result<Option<Piece>> {
        let d = directions.len();
        let basis = lattice::saturated_basis(directions, n);
        let mut o = origin.to_vec();
        for h in &basis {
            let p = pivot(h).expect("nonzero basis vector");
            let f = &o[p] / &h[p];
            for (x, y) in o.iter_mut().zip(h) {
                *x -= &f * y;
            }
        }
        let old = param_matrix(directions, n);
        let m: Mat = {
            let cols: Vec<Vec<Rational>> =
                basis.iter().map(|h| linalg::solve(&old, h).expect("same span")).collect();
            (0..d).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
        };
        let shift: Vec<Rational> = o.iter().zip(origin).map(|(a, b)| a - b).collect();
        let c = linalg::solve(&old, &shift).expect("origin on the span");
        let jac = linalg::det(&m).abs();
        let region = region.pullback(&m, &c);
        let pol = pol_t.compose_affine(&c, &m).scale(&jac);
        let quad = quad_t.compose_affine(&c, &m);
        Piece::assemble(stratum, o, basis, region, pol, quad, sign)
    }

    fn assemble(
        stratum: Mask,
        origin: Vec<Rational>,
        directions: Vec<Vec<Rational>>,
        region: Polyhedron,
        mut pol: Poly,
        quad: Poly,
        mut sign: Sign,
    ) -> Result<Option<Piece>> {
        if pol.is_zero() || !region.has_interior() {
            return Ok(None);
        }
        let region = region.irredundant();
        match certify_sign(&pol, &region)? {
            0 => return Ok(None),
            -1 => {
                pol = pol.scale(&q(-1));
                sign = sign.flip();
            }
            _ => {}
        }
        Ok(Some(Piece { stratum, origin, directions, region, density: Density { pol, quad, sign } }))
    }

    /// Same piece on a smaller region.
    pub fn restricted(&self, extra: &Polyhedron) -> Result<Option<Piece>> {
        let region = self.region.intersect(extra);
        Piece::assemble(self.stratum, self.origin.clone(), self.directions.clone(), region, self.density.pol.clone(), self.density.quad.clone(), self.density.sign)
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn n(&self) -> usize {
        self.origin.len()
    }

    /// Chart coordinates of a parameter point.
    pub fn point_at(&self, t: &[f64]) -> Vec<f64> {
        let mut u: Vec<f64> = self.origin.iter().map(to_f64).collect();
        for (tj, v) in t.iter().zip(&self.directions) {
            for (x, y) in u.iter_mut().zip(v) {
                *x += tj * to_f64(y);
            }
        }
        u
    }

    pub fn point_exact(&self, t: &[Rational]) -> Vec<Rational> {
        let mut u = self.origin.clone();
        for (tj, v) in t.iter().zip(&self.directions) {
            for (x, y) in u.iter_mut().zip(v) {
                *x += tj * y;
            }
        }
        u
    }

    /// Signed weight at a parameter point.
    pub fn weight_at(&self, t: &[f64]) -> f64 {
        let d = &self.density;
        d.sign.value() as f64 * d.pol.eval_f64(t) * libm::exp(d.quad.eval_f64(t))
    }

    /// `{t : lo ≤ (origin + D t)_a ≤ hi}` for the given chart bounds on the free axes.
    pub fn chart_constraints(&self, bounds: &[(Option<Rational>, Option<Rational>)]) -> Polyhedron {
        let d = self.dim();
        let mut rows = Vec::new();
        for (a, (lo, hi)) in bounds.iter().enumerate() {
            if self.stratum & (1 << a) != 0 {
                continue;
            }
            let row: Vec<Rational> = self.directions.iter().map(|v| v[a].clone()).collect();
            if let Some(lo) = lo {
                rows.push(Halfspace::new(row.iter().map(|x| -x).collect(), &self.origin[a] - lo));
            }
            if let Some(hi) = hi {
                rows.push(Halfspace::new(row.clone(), hi - &self.origin[a]));
            }
        }
        Polyhedron::new(d, rows)
    }

    /// A linear form in chart coordinates as a polynomial in `t`.
    fn linear_in_t(&self, ell: &[Rational]) -> Poly {
        let n = self.n();
        let a = param_matrix(&self.directions, n);
        Poly::affine(Rational::zero(), ell).compose_affine(&self.origin, &a)
    }

    fn compose(&self, p: &Poly) -> Poly {
        p.compose_affine(&self.origin, &param_matrix(&self.directions, self.n()))
    }

    fn same_support(&self, o: &Piece) -> bool {
        self.stratum == o.stratum && self.origin == o.origin && self.directions == o.directions && self.region == o.region
    }

    /// `∫ f dμ` over this piece.
    fn integrate(&self, f: &CoefficientFn, tol: f64) -> Result<f64> {
        if f.is_zero() {
            return Ok(0.0);
        }
        let clamp = self.chart_constraints(&f.support_box());
        let region = self.region.intersect(&clamp);
        if !region.has_interior() {
            return Ok(0.0);
        }
        if let Some(v) = self.exact_on(f, &region) {
            return Ok(to_f64(&v));
        }
        if !region.is_bounded() {
            let mut expos: Vec<Vec<Rational>> = f.terms().map(|(m, _)| m.expo.clone()).collect();
            expos.sort();
            expos.dedup();
            for e in expos {
                let total = self.density.quad.add(&self.linear_in_t(&e));
                match decay_check(&region, &total) {
                    Decay::Decays => {}
                    Decay::Grows(g) => {
                        let u: Vec<Rational> = linalg::mat_vec(&param_matrix(&self.directions, self.n()), &g);
                        return Err(Error::Divergent(format!("integrand grows along direction {u:?}")));
                    }
                    Decay::Undecided(why) => return Err(Error::Undecided(why)),
                }
            }
        }
        let levels = region.elimination_levels();
        let bounds = |k: usize, t: &[f64]| Polyhedron::bounds_at(&levels, k, t);
        let fc = f.compile();
        let (pol, quad) = (self.density.pol.compile(), self.density.quad.compile());
        let sign = self.density.sign.value() as f64;
        let origin: Vec<f64> = self.origin.iter().map(to_f64).collect();
        let dirs: Vec<Vec<f64>> = self.directions.iter().map(|v| v.iter().map(to_f64).collect()).collect();
        let g = |t: &[f64]| {
            let w = sign * pol.eval(t);
            if w == 0.0 {
                return 0.0;
            }
            let mut u = origin.clone();
            for (tj, v) in t.iter().zip(&dirs) {
                for (x, y) in u.iter_mut().zip(v) {
                    *x += tj * y;
                }
            }
            let c = fc.eval_real(&u);
            if c == 0.0 {
                0.0
            } else {
                w * c * libm::exp(quad.eval(t))
            }
        };
        let rough = quadrature::nested(self.dim(), &bounds, &g, Settings { tol: f64::INFINITY, max_cells: 1 })?;
        let s = Settings::new(tol * rough.abs().max(1.0));
        quadrature::nested(self.dim(), &bounds, &g, s)
    }

    fn exact_on(&self, f: &CoefficientFn, region: &Polyhedron) -> Option<Rational> {
        if !self.density.quad.is_zero() || !f.is_polynomial() || !region.is_bounded() {
            return None;
        }
        let g = self.compose(&f.to_polynomial()?).mul(&self.density.pol);
        let v: Rational = region.triangulate().iter().map(|s| crate::poly::integrate_simplex(&g, s)).sum();
        Some(v * q(self.density.sign.value()))
    }
}

/// Open subset of a chart `R_∞^k × R^{n−k}` (infinite axes first) minus closures of strata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub n: usize,
    pub k: usize,
    /// Open finite lower bound per axis.
    pub lower: Vec<Option<Rational>>,
    /// Open finite upper bound per axis; an infinite axis with a bound cannot reach `∞`.
    pub upper: Vec<Option<Rational>>,
    /// Infinite axes whose boundary point `u_a = ∞` belongs to the set.
    pub closed: Mask,
    /// Removed closures: a point leaves the set when all axes of some mask are infinite.
    pub excluded: Vec<Mask>,
}

impl Domain {
    /// The whole chart `U_ρ`.
    pub fn chart(n: usize, k: usize) -> Domain {
        Domain { n, k, lower: vec![None; n], upper: vec![None; n], closed: index::full(k), excluded: Vec::new() }
    }

    /// `R^n` inside a chart with `k` infinite axes.
    pub fn torus(n: usize, k: usize) -> Domain {
        Domain { closed: 0, ..Domain::chart(n, k) }
    }

    pub fn with_lower(mut self, axis: usize, v: Rational) -> Domain {
        self.lower[axis] = Some(v);
        self
    }

    pub fn with_upper(mut self, axis: usize, v: Rational) -> Domain {
        self.upper[axis] = Some(v);
        self.closed &= !(1 << axis);
        self
    }

    /// Removes the closure of the stratum with infinite axes `mask`.
    pub fn without(mut self, mask: Mask) -> Domain {
        if mask & self.closed == mask && !self.excluded.contains(&mask) {
            self.excluded.push(mask);
            self.excluded.sort();
        }
        self
    }

    /// Removes `E^M`: every point with some axis of `M` at infinity.
    pub fn without_axes(self, m: Mask) -> Domain {
        index::elements(m & self.closed).into_iter().fold(self, |d, a| d.without(1 << a))
    }

    pub fn allows_stratum(&self, l: Mask) -> bool {
        l & !self.closed == 0 && !self.excluded.iter().any(|&e| e & l == e)
    }

    pub fn strata(&self) -> Vec<Mask> {
        index::submasks(self.closed).into_iter().filter(|&l| self.allows_stratum(l)).collect()
    }

    pub fn contains(&self, point: &[Coord]) -> bool {
        point.len() == self.n
            && self.allows_stratum(stratum_of(point))
            && point.iter().enumerate().all(|(a, c)| match c {
                Coord::Inf => true,
                Coord::Fin(x) => {
                    self.lower[a].as_ref().is_none_or(|lo| x > lo) && self.upper[a].as_ref().is_none_or(|hi| x < hi)
                }
            })
    }

    /// Finite bounds per axis as closed box constraints.
    pub fn bounds(&self) -> Vec<(Option<Rational>, Option<Rational>)> {
        self.lower.iter().cloned().zip(self.upper.iter().cloned()).collect()
    }

    /// Whether a compact box (per-axis closed bounds; `None` reaches the boundary) sits inside.
    pub fn contains_box(&self, stratum: Mask, b: &[(Option<Rational>, Option<Rational>)]) -> bool {
        if !self.allows_stratum(stratum) {
            return false;
        }
        (0..self.n).all(|a| {
            if stratum & (1 << a) != 0 {
                return true;
            }
            let (lo, hi) = &b[a];
            let lo_ok = match (lo, &self.lower[a]) {
                (_, None) => true,
                (Some(x), Some(l)) => x > l,
                (None, Some(_)) => false,
            };
            let hi_ok = match (hi, &self.upper[a]) {
                (None, _) => a < self.k && self.upper[a].is_none() && self.closed & (1 << a) != 0 && {
                    // support reaching ∞ must stay away from every removed closure
                    !self.excluded.iter().any(|&e| e & (stratum | (1 << a)) == e)
                },
                (Some(_), None) => true,
                (Some(x), Some(h)) => x < h,
            };
            lo_ok && hi_ok
        })
    }
}

/// Where a measure is transported.
#[derive(Clone, Debug, PartialEq)]
pub enum ImageMap {
    /// Inclusion of an open subset into the target domain; boundary strata of the target
    /// must receive no mass and every boundary point must have finite mass nearby.
    OpenInclusion { target: Domain },
    /// `N(σ) ↪ chart`: source coordinates are the free axes of `stratum`, in order.
    StratumInclusion { n: usize, stratum: Mask },
    /// Sends every point to infinity along `axes`; must be injective on each piece.
    StratumProjection { axes: Mask },
}

/// Subsets a measure can be restricted to.
#[derive(Clone, Debug, PartialEq)]
pub enum Restriction {
    Stratum(Mask),
    /// Closed polyhedron in chart coordinates inside one stratum.
    Polyhedron { stratum: Mask, region: Polyhedron },
}

/// Value of `∫ f dμ`; `non_measure` marks contributions of derivative atoms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub non_measure: bool,
}

/// Finite signed combination of atoms and sign-pure densities on chart strata.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PieceMeasure {
    n: usize,
    atoms: Vec<Atom>,
    pieces: Vec<Piece>,
    derivative_atoms: Vec<DerivativeAtom>,
}

impl PieceMeasure {
    pub fn zero(n: usize) -> Self {
        PieceMeasure { n, atoms: Vec::new(), pieces: Vec::new(), derivative_atoms: Vec::new() }
    }

    pub fn dirac(point: Vec<Coord>, weight: Rational) -> Self {
        let mut m = PieceMeasure::zero(point.len());
        m.atoms.push(Atom { point, weight });
        m.normalized()
    }

    pub fn from_piece(n: usize, piece: Option<Piece>) -> Self {
        let mut m = PieceMeasure::zero(n);
        m.pieces.extend(piece);
        m.normalized()
    }

    /// `weight · λ` on a box of the dense stratum.
    pub fn lebesgue(bounds: &[(Option<Rational>, Option<Rational>)], weight: Rational) -> Result<Self> {
        let n = bounds.len();
        let p = Piece::on_box(n, 0, bounds, &Poly::constant(n, weight), &Poly::zero(n))?;
        Ok(PieceMeasure::from_piece(n, p))
    }

    /// `pol · exp(quad) · λ` on a box of a stratum.
    pub fn density(n: usize, stratum: Mask, bounds: &[(Option<Rational>, Option<Rational>)], pol: &Poly, quad: &Poly) -> Result<Self> {
        Ok(PieceMeasure::from_piece(n, Piece::on_box(n, stratum, bounds, pol, quad)?))
    }

    pub fn derivative_atom(point: Vec<Coord>, direction: Vec<Rational>, weight: Rational) -> Self {
        let mut m = PieceMeasure::zero(point.len());
        m.derivative_atoms.push(DerivativeAtom { point, direction, weight });
        m
    }

    pub fn from_parts(n: usize, atoms: Vec<Atom>, pieces: Vec<Piece>, derivative_atoms: Vec<DerivativeAtom>) -> Result<Self> {
        if atoms.iter().any(|a| a.point.len() != n) || pieces.iter().any(|p| p.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: 0 });
        }
        Ok(PieceMeasure { n, atoms, pieces, derivative_atoms }.normalized())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn derivative_atoms(&self) -> &[DerivativeAtom] {
        &self.derivative_atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.pieces.is_empty() && self.derivative_atoms.is_empty()
    }

    pub fn is_measure(&self) -> bool {
        self.derivative_atoms.is_empty()
    }

    /// Normal form: atoms merged per point, pieces with equal support, exponent and sign
    /// merged, everything sorted.
    fn normalized(mut self) -> Self {
        self.atoms.sort();
        let mut atoms: Vec<Atom> = Vec::new();
        for a in self.atoms {
            match atoms.last_mut() {
                Some(last) if last.point == a.point => last.weight += a.weight,
                _ => atoms.push(a),
            }
        }
        atoms.retain(|a| !a.weight.is_zero());
        self.atoms = atoms;
        self.pieces.sort();
        let mut pieces: Vec<Piece> = Vec::new();
        for p in self.pieces {
            match pieces.last_mut() {
                Some(last) if last.same_support(&p) && last.density.quad == p.density.quad && last.density.sign == p.density.sign => {
                    last.density.pol = last.density.pol.add(&p.density.pol);
                }
                _ => pieces.push(p),
            }
        }
        pieces.retain(|p| !p.density.pol.is_zero());
        pieces.sort();
        self.pieces = pieces;
        self.derivative_atoms.sort();
        let mut ders: Vec<DerivativeAtom> = Vec::new();
        for a in self.derivative_atoms {
            match ders.last_mut() {
                Some(last) if last.point == a.point && last.direction == a.direction => last.weight += a.weight,
                _ => ders.push(a),
            }
        }
        ders.retain(|a| !a.weight.is_zero());
        self.derivative_atoms = ders;
        self
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: o.n });
        }
        let mut r = self.clone();
        r.atoms.extend(o.atoms.iter().cloned());
        r.pieces.extend(o.pieces.iter().cloned());
        r.derivative_atoms.extend(o.derivative_atoms.iter().cloned());
        Ok(r.normalized())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return PieceMeasure::zero(self.n);
        }
        let mut r = self.clone();
        for a in &mut r.atoms {
            a.weight *= c;
        }
        for a in &mut r.derivative_atoms {
            a.weight *= c;
        }
        let mag = c.abs();
        for p in &mut r.pieces {
            p.density.pol = p.density.pol.scale(&mag);
            if c.is_negative() {
                p.density.sign = p.density.sign.flip();
            }
        }
        r.normalized()
    }

    pub fn neg(&self) -> Self {
        self.scale(&q(-1))
    }

    /// Strata carrying atoms or pieces.
    pub fn strata(&self) -> BTreeSet<Mask> {
        let mut s: BTreeSet<Mask> = self.atoms.iter().map(|a| stratum_of(&a.point)).collect();
        s.extend(self.pieces.iter().map(|p| p.stratum));
        s.extend(self.derivative_atoms.iter().map(|a| stratum_of(&a.point)));
        s
    }

    /// `∫ f_σ dμ` where `f_σ` is the test function on each stratum.
    pub fn integrate_with(&self, f: &dyn Fn(Mask) -> CoefficientFn, tol: f64) -> Result<Evaluation> {
        let mut value = 0.0;
        for a in &self.atoms {
            let g = f(stratum_of(&a.point));
            value += to_f64(&a.weight) * g.eval_real(&finite_part(&a.point));
        }
        for p in &self.pieces {
            value += p.integrate(&f(p.stratum), tol)?;
        }
        for a in &self.derivative_atoms {
            let g = f(stratum_of(&a.point));
            let u = finite_part(&a.point);
            let dv: f64 = a.direction.iter().enumerate().map(|(i, v)| to_f64(v) * g.partial(i).eval_real(&u)).sum();
            value -= to_f64(&a.weight) * dv;
        }
        Ok(Evaluation { value, non_measure: !self.derivative_atoms.is_empty() })
    }

    /// `∫ f dμ` with one test function for all strata.
    pub fn integrate_against(&self, f: &CoefficientFn, tol: f64) -> Result<Evaluation> {
        self.integrate_with(&|_| f.clone(), tol)
    }

    /// As [`integrate_against`](Self::integrate_against), refusing non-measure parts.
    pub fn integrate_measure(&self, f: &CoefficientFn, tol: f64) -> Result<f64> {
        if !self.is_measure() {
            return Err(Error::NonMeasurePiece);
        }
        Ok(self.integrate_against(f, tol)?.value)
    }

    /// Exact value when every test function is a polynomial and every piece it meets is
    /// bounded with a polynomial weight.
    pub fn exact_integral(&self, f: &dyn Fn(Mask) -> CoefficientFn) -> Option<Rational> {
        let mut v = Rational::zero();
        for a in &self.atoms {
            let g = f(stratum_of(&a.point)).to_polynomial()?;
            v += &a.weight * g.eval(&finite_exact(&a.point));
        }
        for p in &self.pieces {
            let g = f(p.stratum);
            if g.is_zero() {
                continue;
            }
            v += p.exact_on(&g, &p.region)?;
        }
        for a in &self.derivative_atoms {
            let g = f(stratum_of(&a.point));
            let u = finite_exact(&a.point);
            for (i, c) in a.direction.iter().enumerate() {
                v -= &a.weight * c * g.partial(i).to_polynomial()?.eval(&u);
            }
        }
        Some(v)
    }

    /// Hahn–Jordan split `μ = μ₊ − μ₋`.
    pub fn total_variation_decompose(&self) -> Result<(Self, Self)> {
        if !self.is_measure() {
            return Err(Error::NonMeasurePiece);
        }
        let mut pos = PieceMeasure::zero(self.n);
        let mut neg = PieceMeasure::zero(self.n);
        for a in &self.atoms {
            if a.weight.is_positive() {
                pos.atoms.push(a.clone());
            } else {
                neg.atoms.push(Atom { point: a.point.clone(), weight: -a.weight.clone() });
            }
        }
        for p in &self.pieces {
            let mut p = p.clone();
            if p.density.sign == Sign::Plus {
                pos.pieces.push(p);
            } else {
                p.density.sign = Sign::Plus;
                neg.pieces.push(p);
            }
        }
        Ok((pos.normalized(), neg.normalized()))
    }

    /// `|μ| = μ₊ + μ₋`.
    pub fn total_variation(&self) -> Result<Self> {
        let (p, m) = self.total_variation_decompose()?;
        p.add(&m)
    }

    pub fn is_positive(&self) -> bool {
        self.is_measure() && self.atoms.iter().all(|a| a.weight.is_positive()) && self.pieces.iter().all(|p| p.density.sign == Sign::Plus)
    }

    pub fn restrict(&self, r: &Restriction) -> Result<Self> {
        let mut out = PieceMeasure::zero(self.n);
        match r {
            Restriction::Stratum(l) => {
                out.atoms = self.atoms.iter().filter(|a| stratum_of(&a.point) == *l).cloned().collect();
                out.pieces = self.pieces.iter().filter(|p| p.stratum == *l).cloned().collect();
                out.derivative_atoms = self.derivative_atoms.iter().filter(|a| stratum_of(&a.point) == *l).cloned().collect();
            }
            Restriction::Polyhedron { stratum, region } => {
                if region.dim() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, found: region.dim() });
                }
                let inside = |pt: &[Coord]| stratum_of(pt) == *stratum && region.contains(&finite_exact(pt));
                out.atoms = self.atoms.iter().filter(|a| inside(&a.point)).cloned().collect();
                out.derivative_atoms = self.derivative_atoms.iter().filter(|a| inside(&a.point)).cloned().collect();
                for p in self.pieces.iter().filter(|p| p.stratum == *stratum) {
                    let a = param_matrix(&p.directions, self.n);
                    if let Some(piece) = p.restricted(&region.pullback(&a, &p.origin))? {
                        out.pieces.push(piece);
                    }
                }
            }
        }
        Ok(out.normalized())
    }

    /// Checks that every point of `target` has a neighborhood of finite `|μ|`-mass after
    /// multiplying densities by `exp(extra · u)`.
    pub fn local_finiteness(&self, target: &Domain, extra: &[Rational]) -> Result<()> {
        if !self.is_measure() {
            return Err(Error::NonMeasurePiece);
        }
        let far = q(FAR);
        for (idx, p) in self.pieces.iter().enumerate() {
            let l = p.stratum;
            let quad = if extra.iter().all(Zero::is_zero) { p.density.quad.clone() } else { p.density.quad.add(&p.linear_in_t(extra)) };
            for s in index::submasks(target.closed & !l) {
                if s == 0 || !target.allows_stratum(l | s) {
                    continue;
                }
                let bounds: Vec<(Option<Rational>, Option<Rational>)> = (0..self.n)
                    .map(|a| if s & (1 << a) != 0 { (Some(far.clone()), None) } else { (Some(-far.clone()), Some(far.clone())) })
                    .collect();
                let near = p.region.intersect(&p.chart_constraints(&bounds));
                match decay_check(&near, &quad) {
                    Decay::Decays => {}
                    Decay::Grows(g) => {
                        let ray = linalg::mat_vec(&param_matrix(&p.directions, self.n), &g);
                        return Err(Error::NotLocallyFinite(RayWitness { density: idx, target_stratum: l | s, ray }));
                    }
                    Decay::Undecided(why) => return Err(Error::Undecided(why)),
                }
            }
        }
        Ok(())
    }

    /// Whether all mass sits inside the domain (pieces up to their boundary).
    pub fn lives_in(&self, dom: &Domain) -> bool {
        let b = dom.bounds();
        self.atoms.iter().all(|a| dom.contains(&a.point))
            && self.derivative_atoms.iter().all(|a| dom.contains(&a.point))
            && self.pieces.iter().all(|p| {
                dom.allows_stratum(p.stratum) && {
                    // the region must satisfy the closed bounds
                    let cons = p.chart_constraints(&b);
                    cons.rows().iter().all(|h| match p.region.maximize(&h.normal) {
                        LpResult::Optimal { value, .. } => value <= h.bound,
                        LpResult::Infeasible => true,
                        LpResult::Unbounded => false,
                    })
                }
            })
    }

    pub fn image(&self, map: &ImageMap) -> Result<Self> {
        match map {
            ImageMap::OpenInclusion { target } => {
                if target.n != self.n {
                    return Err(Error::DimensionMismatch { expected: target.n, found: self.n });
                }
                self.local_finiteness(target, &[])?;
                Ok(self.clone())
            }
            ImageMap::StratumInclusion { n, stratum } => {
                let free: Vec<usize> = (0..*n).filter(|a| stratum & (1 << a) == 0).collect();
                if free.len() != self.n {
                    return Err(Error::DimensionMismatch { expected: free.len(), found: self.n });
                }
                let embed_pt = |pt: &[Coord]| {
                    let mut v = vec![Coord::Inf; *n];
                    for (j, &a) in free.iter().enumerate() {
                        v[a] = pt[j].clone();
                    }
                    v
                };
                let embed_vec = |x: &[Rational]| {
                    let mut v = vec![Rational::zero(); *n];
                    for (j, &a) in free.iter().enumerate() {
                        v[a] = x[j].clone();
                    }
                    v
                };
                let mut out = PieceMeasure::zero(*n);
                out.atoms = self.atoms.iter().map(|a| Atom { point: embed_pt(&a.point), weight: a.weight.clone() }).collect();
                out.derivative_atoms = self
                    .derivative_atoms
                    .iter()
                    .map(|a| DerivativeAtom { point: embed_pt(&a.point), direction: embed_vec(&a.direction), weight: a.weight.clone() })
                    .collect();
                for p in &self.pieces {
                    let inner = free.iter().enumerate().filter(|(j, _)| p.stratum & (1 << j) != 0).fold(0, |m, (_, &a)| m | (1 << a));
                    let dirs: Vec<Vec<Rational>> = p.directions.iter().map(|v| embed_vec(v)).collect();
                    let piece = Piece::canonical(
                        *n,
                        stratum | inner,
                        &embed_vec(&p.origin),
                        &dirs,
                        p.region.clone(),
                        p.density.pol.clone(),
                        p.density.quad.clone(),
                        p.density.sign,
                    )?;
                    out.pieces.extend(piece);
                }
                Ok(out.normalized())
            }
            ImageMap::StratumProjection { axes } => {
                let mut out = PieceMeasure::zero(self.n);
                let send = |pt: &[Coord]| {
                    pt.iter().enumerate().map(|(a, c)| if axes & (1 << a) != 0 { Coord::Inf } else { c.clone() }).collect::<Vec<_>>()
                };
                let cut = |x: &[Rational]| {
                    x.iter().enumerate().map(|(a, c)| if axes & (1 << a) != 0 { Rational::zero() } else { c.clone() }).collect::<Vec<_>>()
                };
                out.atoms = self.atoms.iter().map(|a| Atom { point: send(&a.point), weight: a.weight.clone() }).collect();
                out.derivative_atoms = self
                    .derivative_atoms
                    .iter()
                    .map(|a| DerivativeAtom { point: send(&a.point), direction: cut(&a.direction), weight: a.weight.clone() })
                    .collect();
                for p in &self.pieces {
                    let dirs: Vec<Vec<Rational>> = p.directions.iter().map(|v| cut(v)).collect();
                    if linalg::rank(&dirs) < dirs.len() {
                        return Err(Error::Invalid("projection is not injective on a piece".into()));
                    }
                    let piece = Piece::canonical(
                        self.n,
                        p.stratum | axes,
                        &cut(&p.origin),
                        &dirs,
                        p.region.clone(),
                        p.density.pol.clone(),
                        p.density.quad.clone(),
                        p.density.sign,
                    )?;
                    out.pieces.extend(piece);
                }
                Ok(out.normalized())
            }
        }
    }

    /// Multiplies by a polynomial in chart coordinates; fails when a piece weight would
    /// change sign.
    pub fn times_polynomial(&self, f: &Poly) -> Result<Self> {
        let mut out = PieceMeasure::zero(self.n);
        for a in &self.atoms {
            out.atoms.push(Atom { point: a.point.clone(), weight: &a.weight * f.eval(&finite_exact(&a.point)) });
        }
        for a in &self.derivative_atoms {
            // product rule: −w ∂_v(f g)(x) = f(x)·(−w ∂_v g) − w ∂_v f(x)·g(x)
            let u = finite_exact(&a.point);
            out.derivative_atoms.push(DerivativeAtom { point: a.point.clone(), direction: a.direction.clone(), weight: &a.weight * f.eval(&u) });
            let mut dv = Rational::zero();
            for (i, c) in a.direction.iter().enumerate() {
                dv += c * CoefficientFn::from_polynomial(f).partial(i).to_polynomial().expect("polynomial").eval(&u);
            }
            out.atoms.push(Atom { point: a.point.clone(), weight: -(&a.weight * dv) });
        }
        for p in &self.pieces {
            let g = p.compose(f);
            let pol = p.density.pol.mul(&g);
            let piece = Piece::assemble(p.stratum, p.origin.clone(), p.directions.clone(), p.region.clone(), pol, p.density.quad.clone(), p.density.sign)
                .map_err(|e| Error::FamilyEscape(format!("{e}")))?;
            out.pieces.extend(piece);
        }
        Ok(out.normalized())
    }

    /// Multiplies by a coefficient without profile factors, term by term.
    pub fn times_coefficient(&self, f: &CoefficientFn) -> Result<Self> {
        if !f.is_factor_free() {
            return Err(Error::FamilyEscape("profile factors are not closed under products with densities".into()));
        }
        let mut out = PieceMeasure::zero(self.n);
        for (m, c) in f.terms() {
            let mut pol = Poly::zero(self.n);
            pol.add_term(m.powers.clone(), c.clone());
            out = out.add(&self.times_polynomial(&pol)?.times_exp(&m.expo)?)?;
        }
        Ok(out)
    }

    /// Multiplies piece densities by `exp(ℓ · u)`; atoms must sit where `ℓ · u = 0`.
    pub fn times_exp(&self, ell: &[Rational]) -> Result<Self> {
        let mut out = self.clone();
        for a in self.atoms.iter().map(|a| &a.point).chain(self.derivative_atoms.iter().map(|a| &a.point)) {
            if !linalg::dot(ell, &finite_exact(a)).is_zero() {
                return Err(Error::FamilyEscape("exponential weight at an atom is irrational".into()));
            }
        }
        if !self.derivative_atoms.is_empty() && ell.iter().any(|x| !x.is_zero()) {
            return Err(Error::FamilyEscape("exponential weight on a derivative atom".into()));
        }
        for p in &mut out.pieces {
            let lin = p.linear_in_t(ell);
            p.density.quad = p.density.quad.add(&lin);
        }
        Ok(out.normalized())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{AxisFactor, Profile};
    use crate::scalar::qf;

    fn fin(v: i64) -> Coord {
        Coord::Fin(q(v))
    }

    fn unit_interval() -> PieceMeasure {
        PieceMeasure::lebesgue(&[(Some(q(0)), Some(q(1)))], q(1)).unwrap()
    }

    #[test]
    fn lebesgue_and_dirac_integrals() {
        let one = CoefficientFn::constant(1, q(1));
        assert_eq!(unit_interval().integrate_measure(&one, 1e-10).unwrap(), 1.0);
        let x = CoefficientFn::coordinate(1, 0);
        let d = PieceMeasure::dirac(vec![fin(3)], q(1));
        assert_eq!(d.integrate_measure(&x, 1e-10).unwrap(), 3.0);
        assert_eq!(unit_interval().exact_integral(&|_| x.clone()), Some(qf(1, 2)));
    }

    #[test]
    fn canonical_parametrization_is_lattice_normalized() {
        // segment from (0,0) to (2,2) given with direction (2,2) on t ∈ [0,1]
        let p = Piece::new(
            2,
            0,
            vec![q(0), q(0)],
            vec![vec![q(2), q(2)]],
            Polyhedron::boxed(&[(Some(q(0)), Some(q(1)))]),
            &Poly::one(2),
            &Poly::zero(2),
        )
        .unwrap()
        .unwrap();
        assert_eq!(p.directions, vec![vec![q(1), q(1)]]);
        // parameter length 2 in lattice units, density 1/2 from the change of variables
        let m = PieceMeasure::from_piece(2, Some(p));
        assert_eq!(m.exact_integral(&|_| CoefficientFn::constant(2, q(1))), Some(q(1)));
        let same = Piece::new(
            2,
            0,
            vec![q(2), q(2)],
            vec![vec![q(-1), q(-1)]],
            Polyhedron::boxed(&[(Some(q(0)), Some(q(2)))]),
            &Poly::constant(2, qf(1, 2)),
            &Poly::zero(2),
        )
        .unwrap();
        assert_eq!(PieceMeasure::from_piece(2, same), m);
    }

    #[test]
    fn hahn_jordan_split() {
        let m = PieceMeasure::dirac(vec![fin(0)], q(2)).add(&PieceMeasure::dirac(vec![fin(1)], q(-1))).unwrap();
        let (p, n) = m.total_variation_decompose().unwrap();
        assert_eq!(p, PieceMeasure::dirac(vec![fin(0)], q(2)));
        assert_eq!(n, PieceMeasure::dirac(vec![fin(1)], q(1)));
        let neg = PieceMeasure::lebesgue(&[(Some(q(0)), Some(q(1)))], q(-3)).unwrap();
        let tv = neg.total_variation().unwrap();
        assert_eq!(tv.exact_integral(&|_| CoefficientFn::constant(1, q(1))), Some(q(3)));
    }

    #[test]
    fn mixed_sign_density_is_rejected() {
        let x = Poly::var(1, 0).add(&Poly::constant(1, q(-1)));
        let r = PieceMeasure::density(1, 0, &[(Some(q(0)), Some(q(2)))], &x, &Poly::zero(1));
        assert!(matches!(r, Err(Error::SignCertificate(_))));
        let xy = Poly::var(2, 0).mul(&Poly::var(2, 1));
        let r = PieceMeasure::density(2, 0, &[(Some(q(-1)), Some(q(1))), (Some(q(0)), Some(q(1)))], &xy, &Poly::zero(2));
        assert!(matches!(r, Err(Error::SignCertificate(_))));
    }

    #[test]
    fn restriction_and_stratum_resum() {
        let m = PieceMeasure::lebesgue(&[(Some(q(0)), Some(q(2)))], q(1)).unwrap();
        let half = m
            .restrict(&Restriction::Polyhedron { stratum: 0, region: Polyhedron::boxed(&[(Some(q(0)), Some(q(1)))]) })
            .unwrap();
        assert_eq!(half, unit_interval());
        let boundary = PieceMeasure::dirac(vec![Coord::Inf, fin(0)], q(1));
        assert!(boundary.restrict(&Restriction::Stratum(0)).unwrap().is_zero());
        let dense = PieceMeasure::lebesgue(&[(Some(q(0)), Some(q(1))), (Some(q(0)), Some(q(1)))], q(1)).unwrap();
        let all = dense.add(&boundary).unwrap();
        let resum = index::submasks(1)
            .into_iter()
            .map(|l| all.restrict(&Restriction::Stratum(l)).unwrap())
            .fold(PieceMeasure::zero(2), |a, b| a.add(&b).unwrap());
        assert_eq!(resum, all);
    }

    #[test]
    fn local_finiteness_at_infinity() {
        let target = Domain::chart(1, 1);
        let flat = PieceMeasure::lebesgue(&[(Some(q(1)), None)], q(1)).unwrap();
        match flat.image(&ImageMap::OpenInclusion { target: target.clone() }) {
            Err(Error::NotLocallyFinite(w)) => {
                assert_eq!(w.ray, vec![q(1)]);
                assert_eq!(w.target_stratum, 1);
            }
            other => panic!("{other:?}"),
        }
        let decaying = PieceMeasure::density(1, 0, &[(Some(q(0)), None)], &Poly::one(1), &Poly::affine(q(0), &[q(-1)])).unwrap();
        assert_eq!(decaying.image(&ImageMap::OpenInclusion { target: target.clone() }).unwrap(), decaying);
        let gauss = PieceMeasure::density(1, 0, &[(Some(q(0)), None)], &Poly::one(1), &Poly::var(1, 0).pow(2)).unwrap();
        assert!(gauss.local_finiteness(&target, &[q(-2)]).is_err());
        assert!(gauss.neg().local_finiteness(&Domain::torus(1, 1), &[]).is_ok());
        let atoms = PieceMeasure::dirac(vec![fin(5)], q(1));
        assert_eq!(atoms.image(&ImageMap::OpenInclusion { target }).unwrap(), atoms);
    }

    #[test]
    fn decay_in_two_dimensions() {
        // exp(−x² − y²) decays on the quadrant, exp(−(x−y)²) does not
        let quadrant = Polyhedron::boxed(&[(Some(q(0)), None), (Some(q(0)), None)]);
        let x2 = Poly::var(2, 0).pow(2);
        let y2 = Poly::var(2, 1).pow(2);
        assert_eq!(decay_check(&quadrant, &x2.add(&y2).scale(&q(-1))), Decay::Decays);
        let xy = Poly::var(2, 0).mul(&Poly::var(2, 1)).scale(&q(2));
        let sq = xy.add(&x2.scale(&q(-1))).add(&y2.scale(&q(-1)));
        assert!(matches!(decay_check(&quadrant, &sq), Decay::Grows(_)));
        let lin = Poly::affine(q(0), &[q(-1), q(-1)]);
        assert_eq!(decay_check(&quadrant, &lin), Decay::Decays);
    }

    #[test]
    fn growth_beats_a_sliding_bump() {
        // e^{x²} on (0,∞) against a bump in (k, k+2) exceeds e^{k²}·∫ bump
        let m = PieceMeasure::density(1, 0, &[(Some(q(0)), None)], &Poly::one(1), &Poly::var(1, 0).pow(2)).unwrap();
        for k in 1..4 {
            let f = CoefficientFn::profile(1, AxisFactor::new(0, Profile::Bump, q(k), q(k + 2)).unwrap());
            let v = m.integrate_measure(&f, 1e-8).unwrap();
            assert!(v > libm::exp((k * k) as f64) * 0.44399381616807943 * 0.999, "{k}: {v}");
        }
        let rising = CoefficientFn::profile(1, AxisFactor::new(0, Profile::Rising, q(0), q(1)).unwrap());
        assert!(matches!(m.integrate_measure(&rising, 1e-8), Err(Error::Divergent(_))));
    }

    #[test]
    fn derivative_atom_is_flagged() {
        let d = PieceMeasure::derivative_atom(vec![fin(0)], vec![q(1)], q(1));
        let x = CoefficientFn::coordinate(1, 0);
        let e = d.integrate_against(&x, 1e-9).unwrap();
        assert_eq!(e, Evaluation { value: -1.0, non_measure: true });
        assert_eq!(d.integrate_measure(&x, 1e-9), Err(Error::NonMeasurePiece));
        assert_eq!(d.total_variation_decompose(), Err(Error::NonMeasurePiece));
    }

    #[test]
    fn stratum_inclusion_and_projection() {
        let seg = PieceMeasure::lebesgue(&[(Some(q(0)), Some(q(1)))], q(1)).unwrap();
        let up = seg.image(&ImageMap::StratumInclusion { n: 2, stratum: 1 }).unwrap();
        assert_eq!(up.pieces()[0].stratum, 1);
        assert_eq!(up.pieces()[0].directions, vec![vec![q(0), q(1)]]);
        let sq = PieceMeasure::lebesgue(&[(Some(q(0)), Some(q(1))), (Some(q(0)), Some(q(1)))], q(1)).unwrap();
        assert!(sq.image(&ImageMap::StratumProjection { axes: 1 }).is_err());
        let line = sq.restrict(&Restriction::Polyhedron {
            stratum: 0,
            region: Polyhedron::boxed(&[(Some(q(0)), Some(q(0))), (None, None)]),
        });
        assert!(line.unwrap().is_zero());
    }
}
