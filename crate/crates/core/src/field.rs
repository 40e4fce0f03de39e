//! Form fields with symbolic coefficients: Lagerberg fields on a toric chart and
//! torus-invariant complex fields in the frame `dz/z`, `i dz̄/z̄`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::{CoefficientFn, Numeric};
use crate::error::{Error, Result};
use crate::fiber::{ComplexForm, LagerbergForm};
use crate::index::{self, merge_sign, Mask};
use crate::quadrature::{self, End, Settings};
use crate::scalar::{block_sign, parity_sign, q, to_f64, ComplexScalar, Gaussian, Rational};

/// Homogeneous `(p,q)` table of coefficient functions on the block basis `x_I ∧ y_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormTable<S: Numeric = Rational> {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    terms: BTreeMap<(Mask, Mask), CoefficientFn<S>>,
}

impl<S: Numeric> FormTable<S> {
    pub fn zero(n: usize, p: usize, q: usize) -> Self {
        FormTable { n, p, q, terms: BTreeMap::new() }
    }

    pub fn from_terms<It>(n: usize, p: usize, q: usize, terms: It) -> Result<Self>
    where
        It: IntoIterator<Item = ((Mask, Mask), CoefficientFn<S>)>,
    {
        let mut t = Self::zero(n, p, q);
        for ((i, j), f) in terms {
            if index::size(i) != p || index::size(j) != q || (i | j) & !index::full(n) != 0 {
                return Err(Error::BidegreeMismatch(format!("term {}|{} in a ({p},{q}) field", index::label(i), index::label(j))));
            }
            if f.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: f.n() });
            }
            t.add_term(i, j, f);
        }
        Ok(t)
    }

    pub fn add_term(&mut self, i: Mask, j: Mask, f: CoefficientFn<S>) {
        let e = self.terms.entry((i, j)).or_insert_with(|| CoefficientFn::zero(self.n));
        *e = e.add(&f);
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Mask, Mask), &CoefficientFn<S>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: Mask, j: Mask) -> CoefficientFn<S> {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| CoefficientFn::zero(self.n))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn map(&self, f: impl Fn(&CoefficientFn<S>) -> CoefficientFn<S>) -> Self {
        let mut t = Self::zero(self.n, self.p, self.q);
        for (&(i, j), c) in &self.terms {
            t.add_term(i, j, f(c));
        }
        t
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.n, self.p, self.q) != (o.n, o.p, o.q) {
            return Err(Error::BidegreeMismatch("adding fields of different shape".into()));
        }
        let mut t = self.clone();
        for (&(i, j), c) in &o.terms {
            t.add_term(i, j, c.clone());
        }
        Ok(t)
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: o.n });
        }
        let mut t = Self::zero(self.n, self.p + o.p, self.q + o.q);
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &o.terms {
                let s = merge_sign(i, k) * merge_sign(j, l) * parity_sign(index::size(j) * index::size(k));
                if s == 0 {
                    continue;
                }
                t.add_term(i | k, j | l, a.mul(b).scale(&S::from_i64(s)));
            }
        }
        Ok(t)
    }

    /// `d′`, skipping the axes in `frozen`.
    pub fn d_first(&self, frozen: Mask) -> Self {
        let mut t = Self::zero(self.n, self.p + 1, self.q);
        for (&(i, j), f) in &self.terms {
            for a in 0..self.n {
                let bit = 1 << a;
                if i & bit != 0 || frozen & bit != 0 {
                    continue;
                }
                let d = f.partial(a);
                if !d.is_zero() {
                    t.add_term(i | bit, j, d.scale(&S::from_i64(merge_sign(bit, i))));
                }
            }
        }
        t
    }

    /// `d″`, skipping the axes in `frozen`.
    pub fn d_second(&self, frozen: Mask) -> Self {
        let mut t = Self::zero(self.n, self.p, self.q + 1);
        for (&(i, j), f) in &self.terms {
            for a in 0..self.n {
                let bit = 1 << a;
                if j & bit != 0 || frozen & bit != 0 {
                    continue;
                }
                let d = f.partial(a);
                if !d.is_zero() {
                    let s = parity_sign(self.p) * merge_sign(bit, j);
                    t.add_term(i, j | bit, d.scale(&S::from_i64(s)));
                }
            }
        }
        t
    }

    /// Swaps the two kinds of generators, `(p,q) → (q,p)`.
    pub fn swap_kinds(&self, coeff: impl Fn(&CoefficientFn<S>) -> CoefficientFn<S>) -> Self {
        let mut t = Self::zero(self.n, self.q, self.p);
        for (&(i, j), f) in &self.terms {
            let s = parity_sign(index::size(i) * index::size(j));
            t.add_term(j, i, coeff(f).scale(&S::from_i64(s)));
        }
        t
    }

    /// Hull of the supports of all coefficients.
    pub fn support_box(&self) -> Vec<(Option<Rational>, Option<Rational>)> {
        let mut acc: Option<Vec<(Option<Rational>, Option<Rational>)>> = None;
        for f in self.terms.values() {
            let b = f.support_box();
            acc = Some(match acc {
                None => b,
                Some(a) => a
                    .into_iter()
                    .zip(b)
                    .map(|((l0, h0), (l1, h1))| {
                        (
                            match (l0, l1) {
                                (Some(x), Some(y)) => Some(if x < y { x } else { y }),
                                _ => None,
                            },
                            match (h0, h1) {
                                (Some(x), Some(y)) => Some(if x > y { x } else { y }),
                                _ => None,
                            },
                        )
                    })
                    .collect(),
            });
        }
        acc.unwrap_or_else(|| vec![(Some(Rational::zero()), Some(Rational::zero())); self.n])
    }

    pub fn fiber_values(&self, u: &[f64]) -> Vec<((Mask, Mask), Complex<f64>)> {
        self.terms.iter().map(|(k, f)| (*k, f.eval(u))).collect()
    }
}

/// Declared region of stratum `from` where the field agrees with the pullback from stratum `to`:
/// `u_i ≥ threshold_i` for the listed axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood {
    pub from: Mask,
    pub to: Mask,
    pub threshold: Vec<(usize, Rational)>,
}

/// Lagerberg `(p,q)`-form on an open subset of the chart `R_∞^k × R^{n−k}`.
/// Stratum tables are keyed by their set of infinite axes; missing strata carry the zero form.
#[derive(Clone, Debug, PartialEq)]
pub struct LagerbergFormField {
    n: usize,
    infinite: Mask,
    p: usize,
    q: usize,
    strata: BTreeMap<Mask, FormTable<Rational>>,
    neighborhoods: Vec<Neighborhood>,
}

/// Result of a successful compatibility pass.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    pub neighborhoods: usize,
    pub samples: usize,
}

impl LagerbergFormField {
    /// Field supported in the open torus part of a chart with `k` infinite axes.
    pub fn dense(table: FormTable<Rational>, k: usize) -> Self {
        let (n, p, q) = (table.n, table.p, table.q);
        let mut strata = BTreeMap::new();
        strata.insert(0, table);
        LagerbergFormField { n, infinite: index::full(k), p, q, strata, neighborhoods: Vec::new() }
    }

    /// Extends a dense table to every boundary stratum by term-wise limits and declares
    /// neighborhoods beyond the profile breakpoints.
    pub fn from_dense(table: FormTable<Rational>, k: usize) -> Result<Self> {
        let mut f = Self::dense(table, k);
        let dense = f.strata[&0].clone();
        for l in index::submasks(f.infinite) {
            if l == 0 {
                continue;
            }
            let mut t = FormTable::zero(f.n, f.p, f.q);
            for (&(i, j), c) in dense.terms() {
                if (i | j) & l != 0 {
                    continue;
                }
                let mut g = c.clone();
                for a in index::elements(l) {
                    g = g.limit_at_infinity(a)?;
                }
                t.add_term(i, j, g);
            }
            f.strata.insert(l, t);
        }
        let threshold = breakpoints(&dense, f.n);
        for from in index::submasks(f.infinite) {
            for to in index::submasks(f.infinite) {
                if from & to == from && from != to {
                    let th = index::elements(to & !from).into_iter().map(|a| (a, threshold[a].clone())).collect();
                    f.neighborhoods.push(Neighborhood { from, to, threshold: th });
                }
            }
        }
        Ok(f)
    }

    /// Field from explicit stratum tables and declared neighborhoods.
    pub fn from_strata(
        n: usize,
        k: usize,
        p: usize,
        q: usize,
        strata: BTreeMap<Mask, FormTable<Rational>>,
        neighborhoods: Vec<Neighborhood>,
    ) -> Result<Self> {
        let infinite = index::full(k);
        for (l, t) in &strata {
            if l & !infinite != 0 || (t.n, t.p, t.q) != (n, p, q) {
                return Err(Error::Invalid(format!("stratum table {} does not fit the chart", index::label(*l))));
            }
        }
        Ok(LagerbergFormField { n, infinite, p, q, strata, neighborhoods })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn infinite_axes(&self) -> Mask {
        self.infinite
    }

    pub fn dense_table(&self) -> FormTable<Rational> {
        self.table(0)
    }

    pub fn table(&self, stratum: Mask) -> FormTable<Rational> {
        self.strata.get(&stratum).cloned().unwrap_or_else(|| FormTable::zero(self.n, self.p, self.q))
    }

    pub fn strata(&self) -> impl Iterator<Item = (&Mask, &FormTable<Rational>)> {
        self.strata.iter()
    }

    pub fn neighborhoods(&self) -> &[Neighborhood] {
        &self.neighborhoods
    }

    /// Coefficient of `d′u_I ∧ d″u_J` on a stratum.
    pub fn coefficient(&self, stratum: Mask, i: Mask, j: Mask) -> CoefficientFn<Rational> {
        if (i | j) & stratum != 0 {
            return CoefficientFn::zero(self.n);
        }
        self.strata.get(&stratum).map(|t| t.coeff(i, j)).unwrap_or_else(|| CoefficientFn::zero(self.n))
    }

    fn map_tables(&self, p: usize, q: usize, f: impl Fn(Mask, &FormTable<Rational>) -> FormTable<Rational>) -> Self {
        LagerbergFormField {
            n: self.n,
            infinite: self.infinite,
            p,
            q,
            strata: self.strata.iter().map(|(l, t)| (*l, f(*l, t))).collect(),
            neighborhoods: self.neighborhoods.clone(),
        }
    }

    pub fn d_first(&self) -> Self {
        self.map_tables(self.p + 1, self.q, |l, t| t.d_first(l))
    }

    pub fn d_second(&self) -> Self {
        self.map_tables(self.p, self.q + 1, |l, t| t.d_second(l))
    }

    pub fn involution_j(&self) -> Self {
        self.map_tables(self.q, self.p, |_, t| t.swap_kinds(|c| c.clone()))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        self.map_tables(self.p, self.q, |_, t| t.scale(s))
    }

    /// Wedge with a field on the same chart; neighborhoods of `self` are kept.
    pub fn wedge(&self, o: &Self) -> Result<Self> {
        if self.n != o.n || self.infinite != o.infinite {
            return Err(Error::DimensionMismatch { expected: self.n, found: o.n });
        }
        let mut strata = BTreeMap::new();
        for l in index::submasks(self.infinite) {
            strata.insert(l, self.table(l).wedge(&o.table(l))?);
        }
        Ok(LagerbergFormField {
            n: self.n,
            infinite: self.infinite,
            p: self.p + o.p,
            q: self.q + o.q,
            strata,
            neighborhoods: self.neighborhoods.clone(),
        })
    }

    /// Fiber form at a point of a stratum (coordinates on the stratum's axes are ignored).
    pub fn fiber_at(&self, stratum: Mask, u: &[f64]) -> LagerbergForm<f64> {
        let t = self.table(stratum);
        let terms = t
            .fiber_values(u)
            .into_iter()
            .filter(|((i, j), _)| (i | j) & stratum == 0)
            .map(|(k, v)| (k, v.re));
        LagerbergForm::from_terms(self.n, self.p, self.q, terms).expect("consistent table")
    }

    /// Samples every declared neighborhood and checks `ω_from = π* ω_to` there.
    pub fn check_compatibility(&self, samples: usize, seed: u64) -> Result<CompatibilityReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut count = 0;
        for nb in &self.neighborhoods {
            let src = self.table(nb.from);
            let hull = src.support_box();
            for _ in 0..samples {
                let mut u = vec![0.0; self.n];
                for (a, ua) in u.iter_mut().enumerate() {
                    let (lo, hi) = &hull[a];
                    let lo = lo.as_ref().map_or(-6.0, |x| to_f64(x) - 1.0);
                    let hi = hi.as_ref().map_or(6.0, |x| to_f64(x) + 1.0);
                    *ua = rng.gen_range(lo..=hi.max(lo + 1.0));
                }
                for (a, th) in &nb.threshold {
                    u[*a] = to_f64(th) + rng.gen_range(0.0..8.0);
                }
                let mut keys: Vec<(Mask, Mask)> = src.terms().map(|(k, _)| *k).collect();
                keys.extend(self.table(nb.to).terms().map(|(k, _)| *k));
                keys.sort();
                keys.dedup();
                for (i, j) in keys {
                    if (i | j) & nb.from != 0 {
                        continue;
                    }
                    let a = self.coefficient(nb.from, i, j).eval_real(&u);
                    let b = self.coefficient(nb.to, i, j).eval_real(&u);
                    let scale = 1.0f64.max(a.abs()).max(b.abs());
                    if (a - b).abs() > 1e-9 * scale {
                        return Err(Error::CompatibilityViolation(format!(
                            "coefficient {}|{} on stratum {{{}}} is {a:e} at u = {u:?}, expected {b:e} from stratum {{{}}}",
                            index::label(i),
                            index::label(j),
                            index::label(nb.from),
                            index::label(nb.to)
                        )));
                    }
                }
                count += 1;
            }
        }
        Ok(CompatibilityReport { neighborhoods: self.neighborhoods.len(), samples: count })
    }

    /// `∫ ω` for an `(n,n)`-field with compact support, by tensor quadrature over `N_R`.
    pub fn integrate_top(&self, tol: f64) -> Result<f64> {
        if (self.p, self.q) != (self.n, self.n) {
            return Err(Error::BidegreeMismatch("integration needs an (n,n)-field".into()));
        }
        let full = index::full(self.n);
        let f = self.coefficient(0, full, full);
        let bounds = compact_box(&f.support_box())?;
        let s = Settings::new(tol);
        let b = |k: usize, _: &[f64]| (End::Fin(bounds[k].0), End::Fin(bounds[k].1));
        let fc = f.compile();
        let v = quadrature::nested(self.n, &b, &|u| fc.eval_real(u), s)?;
        Ok(block_sign(self.n) as f64 * v)
    }
}

fn compact_box(b: &[(Option<Rational>, Option<Rational>)]) -> Result<Vec<(f64, f64)>> {
    b.iter()
        .enumerate()
        .map(|(i, (lo, hi))| match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((to_f64(lo), to_f64(hi))),
            _ => Err(Error::NonCompactSupport(i + 1)),
        })
        .collect()
}

/// Largest profile breakpoint per axis; beyond it every coefficient is constant or zero in that variable.
fn breakpoints(t: &FormTable<Rational>, n: usize) -> Vec<Rational> {
    let mut th = vec![Rational::zero(); n];
    for (_, f) in t.terms() {
        for (m, _) in f.terms() {
            for x in &m.factors {
                if x.hi > th[x.axis] {
                    th[x.axis] = x.hi.clone();
                }
            }
        }
    }
    th
}

/// Torus-invariant complex form `π^{k/2} Σ g_{IK}(u) e′_I ∧ e″_K` with `e′ = dz/z`,
/// `e″ = i dz̄/z̄` and `u = −log|z|`, plus an optional non-invariant monomial part.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantComplexFormField {
    pub table: FormTable<Gaussian>,
    pub sqrt_pi_power: i32,
    pub monomials: Vec<MonomialTerm>,
}

/// `z^a z̄^b h(u)` times a frame element.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialTerm {
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
    pub frame: (Mask, Mask),
    pub coeff: CoefficientFn<Gaussian>,
}

/// The two complex differentials acting on invariant fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexDifferential {
    Partial,
    IPartialBar,
}

impl InvariantComplexFormField {
    pub fn new(table: FormTable<Gaussian>, sqrt_pi_power: i32) -> Self {
        InvariantComplexFormField { table, sqrt_pi_power, monomials: Vec::new() }
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.table.p, self.table.q)
    }

    /// `∂` and `i∂̄` act as `−½ d′` and `−½ d″` on frame coefficients.
    pub fn differentiate(&self, kind: ComplexDifferential) -> Result<Self> {
        if !self.monomials.is_empty() {
            return Err(Error::WrongAlgebra("differentials act on the invariant part only".into()));
        }
        let half = Gaussian::new(-q(1) / q(2), Rational::zero());
        let t = match kind {
            ComplexDifferential::Partial => self.table.d_first(0),
            ComplexDifferential::IPartialBar => self.table.d_second(0),
        };
        Ok(InvariantComplexFormField::new(t.scale(&half), self.sqrt_pi_power))
    }

    /// `F` fixes the frame and conjugates coefficients.
    pub fn involution_f(&self) -> Self {
        let mut r = InvariantComplexFormField::new(self.table.map(|c| c.conj()), self.sqrt_pi_power);
        r.monomials = self
            .monomials
            .iter()
            .map(|m| MonomialTerm { z: m.zbar.clone(), zbar: m.z.clone(), frame: m.frame, coeff: m.coeff.conj() })
            .collect();
        r
    }

    /// Complex conjugation: `ē′ = −i e″`, `ē″ = −i e′`.
    pub fn conjugate(&self) -> Self {
        let (p, qd) = self.bidegree();
        let f = Gaussian::i_pow(-((p + qd) as i64));
        InvariantComplexFormField::new(self.table.swap_kinds(|c| c.conj().scale(&f)), self.sqrt_pi_power)
    }

    pub fn scale(&self, s: &Gaussian) -> Self {
        InvariantComplexFormField::new(self.table.scale(s), self.sqrt_pi_power)
    }

    /// Multiplies by `π^{k/2}`.
    pub fn times_sqrt_pi(&self, k: i32) -> Self {
        let mut r = self.clone();
        r.sqrt_pi_power += k;
        r
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        Ok(InvariantComplexFormField::new(self.table.wedge(&o.table)?, self.sqrt_pi_power + o.sqrt_pi_power))
    }

    /// Haar average over the compact torus.
    pub fn average_over_s(&self) -> Self {
        let mut t = self.table.clone();
        for m in &self.monomials {
            if m.z != m.zbar {
                continue;
            }
            let expo: Vec<Rational> = m.z.iter().map(|&a| q(-2 * a as i64)).collect();
            t.add_term(m.frame.0, m.frame.1, m.coeff.times_exp(&expo));
        }
        InvariantComplexFormField::new(t, self.sqrt_pi_power)
    }

    /// Value of the invariant part on the frame at `u`, with the `π` power applied.
    pub fn fiber_at(&self, u: &[f64]) -> ComplexForm<Complex<f64>> {
        let s = libm::pow(core::f64::consts::PI, self.sqrt_pi_power as f64 / 2.0);
        let terms = self.table.fiber_values(u).into_iter().map(|(k, v)| (k, v * s));
        ComplexForm::from_terms(self.table.n, self.table.p, self.table.q, terms).expect("consistent table")
    }

    /// `∫ ω` over the torus for an `(n,n)`-field, reduced to radii `r = e^{−u}`:
    /// each `e′_j ∧ e″_j` integrates to `4π dr_j / r_j`.
    pub fn integrate_top(&self, tol: f64) -> Result<f64> {
        let (n, p, qd) = (self.table.n, self.table.p, self.table.q);
        if (p, qd) != (n, n) {
            return Err(Error::BidegreeMismatch("integration needs an (n,n)-field".into()));
        }
        let full = index::full(n);
        let g = self.table.coeff(full, full);
        let bounds = compact_box(&g.support_box())?;
        let radii: Vec<(f64, f64)> = bounds.iter().map(|&(lo, hi)| (libm::exp(-hi), libm::exp(-lo))).collect();
        let b = |k: usize, _: &[f64]| (End::Fin(radii[k].0), End::Fin(radii[k].1));
        let g = g.compile();
        let integrand = |r: &[f64]| {
            let u: Vec<f64> = r.iter().map(|x| -libm::log(*x)).collect();
            let jac: f64 = r.iter().product();
            g.eval(&u).re / jac
        };
        // relative scale between the two variables is absorbed by the tolerance share
        let factor = libm::pow(core::f64::consts::PI, self.sqrt_pi_power as f64 / 2.0)
            * libm::pow(4.0 * core::f64::consts::PI, n as f64);
        let s = Settings::new(tol / factor.max(1.0));
        let v = quadrature::nested(n, &b, &integrand, s)?;
        Ok(block_sign(n) as f64 * factor * v)
    }

    /// Inverse of [`trop_pullback_field`] on its image.
    pub fn to_lagerberg(&self) -> Option<FormTable<Rational>> {
        let (p, qd) = self.bidegree();
        if self.sqrt_pi_power != -((p + qd) as i32) || !self.monomials.is_empty() {
            return None;
        }
        let f = Gaussian::new(q(-2), Rational::zero());
        let mut scale = Gaussian::one();
        for _ in 0..p + qd {
            scale = scale * f.clone();
        }
        let mut t = FormTable::zero(self.table.n, p, qd);
        for (&(i, j), c) in self.table.terms() {
            t.add_term(i, j, c.scale(&scale).to_real()?);
        }
        Some(t)
    }
}

/// Normalized pullback along the tropicalization map:
/// `d′u_j ↦ −dz_j/(2√π z_j)`, `d″u_j ↦ −i dz̄_j/(2√π z̄_j)`.
pub fn trop_pullback_field(a: &FormTable<Rational>) -> InvariantComplexFormField {
    let k = a.p + a.q;
    let c = Gaussian::new(Rational::one() / num_traits::pow(q(-2), k), Rational::zero());
    InvariantComplexFormField::new(a.to_complex().scale(&c), -(k as i32))
}

impl<S: Numeric> FormTable<S> {
    fn map_into<T: Numeric>(&self, f: impl Fn(&CoefficientFn<S>) -> CoefficientFn<T>) -> FormTable<T> {
        let mut t = FormTable::zero(self.n, self.p, self.q);
        for (&(i, j), c) in self.terms() {
            t.add_term(i, j, f(c));
        }
        t
    }
}

impl FormTable<Rational> {
    pub fn to_complex(&self) -> FormTable<Gaussian> {
        self.map_into(|c| c.complexify())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{AxisFactor, Profile};

    type F = CoefficientFn<Rational>;

    #[test]
    fn d_first_of_coordinate_times_generator() {
        // d′(u₁ d′u₂) = d′u₁ ∧ d′u₂
        let t = FormTable::from_terms(2, 1, 0, [((0b10, 0), F::coordinate(2, 0))]).unwrap();
        let d = t.d_first(0);
        let expect = FormTable::from_terms(2, 2, 0, [((0b11, 0), F::constant(2, q(1)))]).unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn differentials_square_to_zero_and_anticommute() {
        let f = F::coordinate(2, 0)
            .mul(&F::bump_box(&[(q(0), q(2)), (q(-1), q(1))]).unwrap())
            .mul(&F::exp_linear(vec![q(1), q(3)]));
        let t = FormTable::from_terms(2, 0, 0, [((0, 0), f)]).unwrap();
        assert!(t.d_first(0).d_first(0).is_zero());
        assert!(t.d_second(0).d_second(0).is_zero());
        let a = t.d_first(0).d_second(0);
        let b = t.d_second(0).d_first(0);
        assert!(a.add(&b).unwrap().is_zero());
    }

    #[test]
    fn decaying_coefficient_is_incompatible_at_infinity() {
        let t = FormTable::from_terms(1, 0, 0, [((0, 0), F::exp_linear(vec![q(-2)]))]).unwrap();
        let f = LagerbergFormField::from_dense(t, 1).unwrap();
        assert!(matches!(f.check_compatibility(20, 1), Err(Error::CompatibilityViolation(_))));
    }

    #[test]
    fn eventually_constant_function_is_compatible() {
        let rising = F::profile(1, AxisFactor::new(0, Profile::Rising, q(0), q(1)).unwrap());
        let t = FormTable::from_terms(1, 0, 0, [((0, 0), rising)]).unwrap();
        let f = LagerbergFormField::from_dense(t, 1).unwrap();
        assert!(f.check_compatibility(50, 1).is_ok());
    }

    #[test]
    fn nonvanishing_top_coefficient_near_boundary_is_rejected() {
        let rising = F::profile(1, AxisFactor::new(0, Profile::Rising, q(0), q(1)).unwrap());
        let t = FormTable::from_terms(1, 1, 1, [((1, 1), rising)]).unwrap();
        let f = LagerbergFormField::from_dense(t, 1).unwrap();
        assert!(matches!(f.check_compatibility(20, 3), Err(Error::CompatibilityViolation(_))));
    }

    #[test]
    fn bump_integrates_equally_on_both_sides() {
        let f = F::bump_box(&[(q(0), q(1))]).unwrap();
        let t = FormTable::from_terms(1, 1, 1, [((1, 1), f)]).unwrap();
        let trop = LagerbergFormField::dense(t.clone(), 0).integrate_top(1e-10).unwrap();
        let cplx = trop_pullback_field(&t).integrate_top(1e-10).unwrap();
        assert!((trop - cplx).abs() < 2e-10, "{trop} vs {cplx}");
        assert!((trop - 0.2219969080840397).abs() < 1e-8, "{trop}");
    }
}
