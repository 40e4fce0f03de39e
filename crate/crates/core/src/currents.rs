//! Currents on tropical charts whose co-coefficients are signed piecewise measures.
//!
//! A current `T` of bidegree `(p,p)` on an open set `U` of a chart acts on compactly
//! supported `(q,q)`-form fields, `q = n − p`, through its co-coefficients
//! `T^{IJ}(f) = (−1)^{q(q−1)/2} T(f d′u_I ∧ d″u_J)`, so that
//! `T(α) = (−1)^{q(q−1)/2} Σ T^{IJ}(α_{IJ})`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::{AxisFactor, CoefficientFn, Profile};
use crate::complex::{Balancing, WeightedComplex};
use crate::error::{Error, RayWitness, Result};
use crate::fiber::LagerbergForm;
use crate::field::{FormTable, LagerbergFormField};
use crate::index::{self, Mask};
use crate::linalg::{self, Definiteness};
use crate::measures::{stratum_of, Density, Domain, Evaluation, ImageMap, PieceMeasure, Restriction};
use crate::poly::Poly;
use crate::polyhedron::Polyhedron;
use crate::positivity::weak_not_positive_form;
use crate::quadrature::{self, End, Settings};
use crate::scalar::{block_sign, q, qf, to_f64, Coord, Rational};

/// Currents given by a closed formula instead of co-coefficient measures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evaluator {
    /// `f ↦ ∫_0^∞ e^{2e^x} f′(x) dx` on `(0, ∞] ⊂ R_∞`, acting on functions.
    DoubleExponentialDerivative,
}

impl Evaluator {
    fn evaluate(&self, alpha: &LagerbergFormField, tol: f64) -> Result<f64> {
        match self {
            Evaluator::DoubleExponentialDerivative => {
                let f = alpha.coefficient(0, 0, 0).partial(0);
                let b = f.support_box();
                let Some(hi) = b[0].1.as_ref().map(to_f64) else {
                    return Err(Error::Divergent("derivative of the test function reaches infinity".into()));
                };
                let lo = b[0].0.as_ref().map(to_f64).unwrap_or(0.0).max(0.0);
                if hi <= lo {
                    return Ok(0.0);
                }
                let fc = f.compile();
                let mut g = |x: f64| libm::exp(2.0 * libm::exp(x)) * fc.eval_real(&[x]);
                let (rough, _) = quadrature::gk15(&mut g, lo, hi);
                let (v, _) = quadrature::integrate_1d(&mut g, End::Fin(lo), End::Fin(hi), Settings::new(tol * rough.abs().max(1.0)))?;
                if !v.is_finite() {
                    return Err(Error::Invalid("value exceeds the floating-point range".into()));
                }
                Ok(v)
            }
        }
    }

    fn anchors(&self) -> Vec<Anchor> {
        match self {
            Evaluator::DoubleExponentialDerivative => vec![Anchor { stratum: 0, point: vec![qf(3, 2)] }],
        }
    }
}

/// Which differential a closedness witness tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Differential {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Closedness {
    /// `exact` marks verdicts settled symbolically (vacuous degree or balancing).
    Closed { max_relative_residual: f64, tests: usize, exact: bool },
    /// `|T(dβ)| = residual` for the test form `β`.
    NotClosed { witness: LagerbergFormField, differential: Differential, residual: f64 },
}

impl Closedness {
    pub fn is_closed(&self) -> bool {
        matches!(self, Closedness::Closed { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosednessOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ClosednessOptions {
    fn default() -> Self {
        ClosednessOptions { samples: 100, tol: 1e-8, seed: 0 }
    }
}

/// Where a pointwise positivity defect was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Atom(Vec<Coord>),
    Piece { stratum: Mask, point: Vec<Rational> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PositivityWitness {
    NotSymmetric { i: Mask, j: Mask },
    NonMeasure { i: Mask, j: Mask },
    NegativeDiagonal { i: Mask },
    /// `|T^{IJ}|² > T^{II} T^{JJ}` on matched mass, so the mixed estimate fails for some weights.
    EstimateFails { i: Mask, j: Mask, at: Location },
    /// `Σ x_I x_J T^{IJ} < 0` at `at`.
    Indefinite { at: Location, direction: Vec<(Mask, Rational)> },
    NegativeTestForm { form: LagerbergFormField, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurrentVerdict {
    Positive,
    NotPositive(PositivityWitness),
    Unknown(String),
}

impl CurrentVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, CurrentVerdict::Positive)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositivityOptions {
    /// Sample points per non-constant density matrix.
    pub samples: usize,
    pub test_forms: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for PositivityOptions {
    fn default() -> Self {
        PositivityOptions { samples: 64, test_forms: 6, tol: 1e-8, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CFinite {
    Finite,
    Infinite { i: Mask, j: Mask, witness: RayWitness },
    Undecided(String),
}

/// Point near which test forms are placed; `point` has zeros on the infinite axes of `stratum`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Anchor {
    stratum: Mask,
    point: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagerbergCurrent {
    domain: Domain,
    p: usize,
    cocoeffs: BTreeMap<(Mask, Mask), PieceMeasure>,
    evaluator: Option<Evaluator>,
    source: Option<WeightedComplex>,
}

impl LagerbergCurrent {
    pub fn new(domain: Domain, p: usize, cocoeffs: BTreeMap<(Mask, Mask), PieceMeasure>) -> Result<Self> {
        let n = domain.n;
        if p > n {
            return Err(Error::BidegreeMismatch(format!("bidegree ({p},{p}) on R^{n}")));
        }
        let qd = n - p;
        let mut kept = BTreeMap::new();
        for ((i, j), m) in cocoeffs {
            if index::size(i) != qd || index::size(j) != qd || (i | j) & !index::full(n) != 0 {
                return Err(Error::BidegreeMismatch(format!("co-coefficient {}|{} of a ({p},{p})-current", index::label(i), index::label(j))));
            }
            if m.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.n() });
            }
            if m.is_zero() {
                continue;
            }
            if !m.lives_in(&domain.clone().without_axes(i | j)) {
                return Err(Error::SupportEscapesU(format!("co-coefficient {}|{}", index::label(i), index::label(j))));
            }
            kept.insert((i, j), m);
        }
        Ok(LagerbergCurrent { domain, p, cocoeffs: kept, evaluator: None, source: None })
    }

    pub fn zero(domain: Domain, p: usize) -> Self {
        LagerbergCurrent { domain, p, cocoeffs: BTreeMap::new(), evaluator: None, source: None }
    }

    pub fn with_evaluator(domain: Domain, p: usize, evaluator: Evaluator) -> Self {
        LagerbergCurrent { domain, p, cocoeffs: BTreeMap::new(), evaluator: Some(evaluator), source: None }
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Degree of the test forms.
    pub fn q(&self) -> usize {
        self.domain.n - self.p
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn evaluator(&self) -> Option<&Evaluator> {
        self.evaluator.as_ref()
    }

    /// Complex this current integrates over, when built by [`integration_current`].
    pub fn source(&self) -> Option<&WeightedComplex> {
        self.source.as_ref()
    }

    pub fn cocoefficient(&self, i: Mask, j: Mask) -> PieceMeasure {
        self.cocoeffs.get(&(i, j)).cloned().unwrap_or_else(|| PieceMeasure::zero(self.n()))
    }

    pub fn cocoefficients(&self) -> impl Iterator<Item = (&(Mask, Mask), &PieceMeasure)> {
        self.cocoeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.evaluator.is_none() && self.cocoeffs.is_empty()
    }

    /// Strata carrying mass of some co-coefficient.
    pub fn strata(&self) -> BTreeSet<Mask> {
        self.cocoeffs.values().flat_map(|m| m.strata()).collect()
    }

    fn measures_only(&self, what: &str) -> Result<()> {
        if self.evaluator.is_some() {
            return Err(Error::Invalid(format!("{what} needs co-coefficient measures")));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.measures_only("addition")?;
        o.measures_only("addition")?;
        if self.domain != o.domain || self.p != o.p {
            return Err(Error::BidegreeMismatch("currents on different domains or bidegrees".into()));
        }
        let mut m = self.cocoeffs.clone();
        for (k, v) in &o.cocoeffs {
            let e = m.entry(*k).or_insert_with(|| PieceMeasure::zero(self.n()));
            *e = e.add(v)?;
        }
        m.retain(|_, v| !v.is_zero());
        Ok(LagerbergCurrent { cocoeffs: m, ..Self::zero(self.domain.clone(), self.p) })
    }

    pub fn scale(&self, c: &Rational) -> Result<Self> {
        self.measures_only("scaling")?;
        let m = self.cocoeffs.iter().map(|(k, v)| (*k, v.scale(c))).filter(|(_, v)| !v.is_zero()).collect();
        Ok(LagerbergCurrent { cocoeffs: m, ..Self::zero(self.domain.clone(), self.p) })
    }

    fn check_form(&self, alpha: &LagerbergFormField) -> Result<()> {
        let qd = self.q();
        if alpha.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: alpha.n() });
        }
        if alpha.bidegree() != (qd, qd) {
            let (a, b) = alpha.bidegree();
            return Err(Error::BidegreeMismatch(format!("({a},{b})-form against a current on ({qd},{qd})-forms")));
        }
        if alpha.infinite_axes() != index::full(self.domain.k) {
            return Err(Error::Invalid("form and current live on different charts".into()));
        }
        for (&l, t) in alpha.strata() {
            if t.is_zero() {
                continue;
            }
            if !self.domain.contains_box(l, &t.support_box()) {
                return Err(Error::SupportEscapesU(format!("test form support on stratum {}", index::label(l))));
            }
        }
        Ok(())
    }

    /// `s_q · T^{IJ}(α_{IJ})` for every co-coefficient.
    pub fn evaluate_parts(&self, alpha: &LagerbergFormField, tol: f64) -> Result<Vec<((Mask, Mask), Evaluation)>> {
        self.check_form(alpha)?;
        if let Some(e) = &self.evaluator {
            return Ok(vec![((0, 0), Evaluation { value: e.evaluate(alpha, tol)?, non_measure: true })]);
        }
        let s = block_sign(self.q()) as f64;
        let mut out = Vec::new();
        for (&(i, j), m) in &self.cocoeffs {
            let mut e = m.integrate_with(&|l| alpha.coefficient(l, i, j), tol)?;
            e.value *= s;
            out.push(((i, j), e));
        }
        Ok(out)
    }

    /// `T(α)`; `non_measure` flags contributions that are not integrals against measures.
    pub fn evaluate(&self, alpha: &LagerbergFormField, tol: f64) -> Result<Evaluation> {
        let parts = self.evaluate_parts(alpha, tol)?;
        Ok(Evaluation {
            value: parts.iter().map(|(_, e)| e.value).sum(),
            non_measure: parts.iter().any(|(_, e)| e.non_measure),
        })
    }

    /// `T(α)` computed exactly when every piece is bounded and polynomial against `α`.
    pub fn evaluate_exact(&self, alpha: &LagerbergFormField) -> Option<Rational> {
        self.check_form(alpha).ok()?;
        if self.evaluator.is_some() {
            return None;
        }
        let mut v = Rational::zero();
        for (&(i, j), m) in &self.cocoeffs {
            v += m.exact_integral(&|l| alpha.coefficient(l, i, j))?;
        }
        Some(v * q(block_sign(self.q())))
    }

    fn anchors(&self, rng: &mut ChaCha8Rng) -> Vec<Anchor> {
        let mut out = BTreeSet::new();
        let fin = |pt: &[Coord]| pt.iter().map(|c| c.finite().cloned().unwrap_or_else(Rational::zero)).collect::<Vec<_>>();
        for m in self.cocoeffs.values() {
            for a in m.atoms() {
                out.insert(Anchor { stratum: stratum_of(&a.point), point: fin(&a.point) });
            }
            for a in m.derivative_atoms() {
                out.insert(Anchor { stratum: stratum_of(&a.point), point: fin(&a.point) });
            }
            for p in m.pieces() {
                let mut ts: Vec<Vec<Rational>> = p.region.vertices().into_iter().take(6).collect();
                ts.extend(p.region.interior_point());
                ts.extend(p.region.sample(rng, 2, 3.0));
                for t in ts {
                    out.insert(Anchor { stratum: p.stratum, point: p.point_exact(&t) });
                }
            }
        }
        if let Some(e) = &self.evaluator {
            out.extend(e.anchors());
        }
        if out.is_empty() {
            out.insert(Anchor { stratum: 0, point: vec![Rational::zero(); self.n()] });
        }
        out.into_iter().collect()
    }

    /// A bump around the anchor on its finite axes, rising to 1 towards its infinite axes,
    /// kept inside the domain, times `c₀ + c₁(u_b − x_b)`.
    fn test_coefficient(&self, anchor: &Anchor, rng: &mut ChaCha8Rng, linear: bool) -> Result<CoefficientFn> {
        let n = self.n();
        let d = &self.domain;
        let mut f = CoefficientFn::constant(n, q(rng.gen_range(1..=3)));
        let mut finite_axes = Vec::new();
        for a in 0..n {
            if anchor.stratum & (1 << a) != 0 {
                let lo = d.lower[a].clone().map(|l| l + Rational::one()).unwrap_or_else(Rational::one);
                let start = if lo < Rational::one() { Rational::one() } else { lo };
                let hi = &start + Rational::one();
                f = f.mul(&CoefficientFn::profile(n, AxisFactor::new(a, Profile::Rising, start, hi)?));
                continue;
            }
            let mut c = anchor.point[a].clone();
            let mut r = Rational::one();
            if let Some(l) = &d.lower[a] {
                if c <= *l {
                    c = l + Rational::one();
                }
                let room = (&c - l) / q(2);
                if room < r {
                    r = room;
                }
            }
            if let Some(h) = &d.upper[a] {
                if c >= *h {
                    c = h - Rational::one();
                }
                let room = (h - &c) / q(2);
                if room < r {
                    r = room;
                }
            }
            finite_axes.push((a, c.clone()));
            f = f.mul(&CoefficientFn::profile(n, AxisFactor::new(a, Profile::Bump, &c - &r, &c + &r)?));
        }
        if linear && !finite_axes.is_empty() {
            let (b, c) = &finite_axes[rng.gen_range(0..finite_axes.len())];
            let slope = q(rng.gen_range(-2..=2));
            let lin = CoefficientFn::coordinate(n, *b).add(&CoefficientFn::constant(n, -c.clone())).scale(&slope);
            f = f.mul(&CoefficientFn::constant(n, q(4)).add(&lin));
        }
        Ok(f)
    }

    /// Samples `T(d′β)` and `T(d″β)` for bump test forms placed at the current's mass.
    /// Currents integrating over a weighted complex are decided by balancing.
    pub fn closedness_test(&self, opts: &ClosednessOptions) -> Result<Closedness> {
        let (n, qd) = (self.n(), self.q());
        if qd == 0 || self.is_zero() {
            return Ok(Closedness::Closed { max_relative_residual: 0.0, tests: 0, exact: true });
        }
        let exact = self.source.as_ref().map(|c| c.balancing_check() == Balancing::Balanced);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let anchors = self.anchors(&mut rng);
        let quad_tol = (opts.tol * 1e-2).max(1e-13);
        let mut best: Option<(f64, f64, LagerbergFormField, Differential)> = None;
        let mut max_rel: f64 = 0.0;
        let mut tests = 0;
        for s in 0..opts.samples {
            let anchor = &anchors[s % anchors.len()];
            let free: Vec<usize> = (0..n).filter(|a| anchor.stratum & (1 << a) == 0).collect();
            if free.len() < qd {
                continue;
            }
            let kind = if s % 2 == 0 { Differential::First } else { Differential::Second };
            let (pd, qq) = match kind {
                Differential::First => (qd - 1, qd),
                Differential::Second => (qd, qd - 1),
            };
            let i = random_subset(&free, pd, &mut rng);
            let j = random_subset(&free, qq, &mut rng);
            let g = self.test_coefficient(anchor, &mut rng, true)?;
            let beta = LagerbergFormField::from_dense(FormTable::from_terms(n, pd, qq, [((i, j), g)])?, self.domain.k)?;
            let d = match kind {
                Differential::First => beta.d_first(),
                Differential::Second => beta.d_second(),
            };
            let parts = self.evaluate_parts(&d, quad_tol)?;
            let value: f64 = parts.iter().map(|(_, e)| e.value).sum();
            let scale = 1.0 + parts.iter().map(|(_, e)| e.value.abs()).sum::<f64>();
            let rel = value.abs() / scale;
            tests += 1;
            max_rel = max_rel.max(rel);
            if best.as_ref().is_none_or(|b| rel > b.0) {
                best = Some((rel, value.abs(), beta, kind));
            }
        }
        let not_closed = match exact {
            Some(balanced) => !balanced,
            None => max_rel > opts.tol,
        };
        match best {
            Some((_, residual, witness, differential)) if not_closed => Ok(Closedness::NotClosed { witness, differential, residual }),
            _ => Ok(Closedness::Closed { max_relative_residual: max_rel, tests, exact: exact.is_some() }),
        }
    }

    /// Symmetry, measure co-coefficients, nonnegative diagonal, pointwise semidefiniteness of
    /// the co-coefficient matrix on matched mass, then sampled positive test forms.
    pub fn positivity_check(&self, opts: &PositivityOptions) -> Result<CurrentVerdict> {
        for (&(i, j), m) in &self.cocoeffs {
            if self.cocoefficient(j, i) != *m {
                return Ok(CurrentVerdict::NotPositive(PositivityWitness::NotSymmetric { i, j }));
            }
        }
        for (&(i, j), m) in &self.cocoeffs {
            if !m.is_measure() {
                return Ok(CurrentVerdict::NotPositive(PositivityWitness::NonMeasure { i, j }));
            }
        }
        for (&(i, j), m) in &self.cocoeffs {
            if i == j && !m.is_positive() {
                return Ok(CurrentVerdict::NotPositive(PositivityWitness::NegativeDiagonal { i }));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        match self.pointwise_check(opts, &mut rng)? {
            CurrentVerdict::Positive => {}
            other => return Ok(other),
        }
        if let Some(w) = self.test_form_check(opts, &mut rng)? {
            return Ok(CurrentVerdict::NotPositive(w));
        }
        if self.evaluator.is_some() {
            return Ok(CurrentVerdict::Unknown("no negative test form found for a formula-defined current".into()));
        }
        Ok(CurrentVerdict::Positive)
    }

    fn pointwise_check(&self, opts: &PositivityOptions, rng: &mut ChaCha8Rng) -> Result<CurrentVerdict> {
        let mut atoms: BTreeMap<Vec<Coord>, BTreeMap<(Mask, Mask), Rational>> = BTreeMap::new();
        type Span = (Mask, Vec<Rational>, Vec<Vec<Rational>>);
        let mut spans: BTreeMap<Span, Vec<(Polyhedron, (Mask, Mask), Density)>> = BTreeMap::new();
        for (&ij, m) in &self.cocoeffs {
            for a in m.atoms() {
                *atoms.entry(a.point.clone()).or_default().entry(ij).or_insert_with(Rational::zero) += &a.weight;
            }
            for p in m.pieces() {
                spans.entry((p.stratum, p.origin.clone(), p.directions.clone())).or_default().push((p.region.clone(), ij, p.density.clone()));
            }
        }
        for (pt, entries) in atoms {
            if let Some(w) = matrix_defect(&entries) {
                return Ok(CurrentVerdict::NotPositive(w(Location::Atom(pt))));
            }
        }
        for ((stratum, origin, dirs), items) in spans {
            let mut regions: Vec<Polyhedron> = Vec::new();
            for (r, _, _) in &items {
                if !regions.contains(r) {
                    regions.push(r.clone());
                }
            }
            for a in 0..regions.len() {
                for b in a + 1..regions.len() {
                    if regions[a].intersect(&regions[b]).has_interior() {
                        return Ok(CurrentVerdict::Unknown("co-coefficient densities overlap on unmatched pieces".into()));
                    }
                }
            }
            for region in regions {
                let group: Vec<&(Polyhedron, (Mask, Mask), Density)> = items.iter().filter(|(r, _, _)| *r == region).collect();
                let same_quad = group.iter().all(|(_, _, d)| d.quad == group[0].2.quad);
                let constant = group.iter().all(|(_, _, d)| d.pol.degree() == 0);
                let mut ts: Vec<Vec<Rational>> = region.interior_point().into_iter().collect();
                if !constant || !same_quad {
                    ts.extend(region.vertices().into_iter().take(8));
                    ts.extend(region.sample(rng, opts.samples, 4.0));
                }
                let at = |t: &[Rational]| {
                    let mut u = origin.clone();
                    for (tj, d) in t.iter().zip(&dirs) {
                        for (x, y) in u.iter_mut().zip(d) {
                            *x += tj * y;
                        }
                    }
                    Location::Piece { stratum, point: u }
                };
                for t in ts {
                    if same_quad {
                        let mut entries: BTreeMap<(Mask, Mask), Rational> = BTreeMap::new();
                        for (_, ij, d) in &group {
                            *entries.entry(*ij).or_insert_with(Rational::zero) += d.pol.eval(&t) * q(d.sign.value());
                        }
                        if let Some(w) = matrix_defect(&entries) {
                            return Ok(CurrentVerdict::NotPositive(w(at(&t))));
                        }
                    } else {
                        let tf: Vec<f64> = t.iter().map(to_f64).collect();
                        let mut entries: BTreeMap<(Mask, Mask), f64> = BTreeMap::new();
                        for (_, ij, d) in &group {
                            *entries.entry(*ij).or_insert(0.0) += d.pol.eval_f64(&tf) * libm::exp(d.quad.eval_f64(&tf)) * d.sign.value() as f64;
                        }
                        if float_indefinite(&entries) {
                            return Ok(CurrentVerdict::Unknown(format!(
                                "co-coefficient matrix appears indefinite at a sampled point of stratum {} (floating point)",
                                index::label(stratum)
                            )));
                        }
                    }
                }
            }
        }
        Ok(CurrentVerdict::Positive)
    }

    fn test_form_check(&self, opts: &PositivityOptions, rng: &mut ChaCha8Rng) -> Result<Option<PositivityWitness>> {
        let (n, qd) = (self.n(), self.q());
        let anchors: Vec<Anchor> = self.anchors(rng).into_iter().filter(|a| a.stratum == 0).collect();
        if anchors.is_empty() {
            return Ok(None);
        }
        let subs = index::subsets(n, qd);
        for s in 0..opts.test_forms {
            let anchor = &anchors[s % anchors.len()];
            let x: Vec<Rational> = subs.iter().map(|_| q(rng.gen_range(-2..=2))).collect();
            let gram: Vec<Vec<Rational>> = x.iter().map(|a| x.iter().map(|b| a * b).collect()).collect();
            let form = LagerbergForm::from_gram(n, qd, &gram);
            let bump = self.test_coefficient(anchor, rng, false)?;
            let table = FormTable::from_terms(n, qd, qd, form.terms().map(|(&k, c)| (k, bump.scale(c))))?;
            if table.is_zero() {
                continue;
            }
            let alpha = LagerbergFormField::from_dense(table, self.domain.k)?;
            let parts = self.evaluate_parts(&alpha, (opts.tol * 1e-2).max(1e-13))?;
            let value: f64 = parts.iter().map(|(_, e)| e.value).sum();
            let scale = 1.0 + parts.iter().map(|(_, e)| e.value.abs()).sum::<f64>();
            if value < -opts.tol * scale {
                return Ok(Some(PositivityWitness::NegativeTestForm { form: alpha, value }));
            }
        }
        Ok(None)
    }

    /// `T = Σ_σ T_σ` with `T_σ` the restriction of every co-coefficient to the stratum `σ`.
    pub fn canonical_decomposition(&self) -> Result<BTreeMap<Mask, LagerbergCurrent>> {
        self.measures_only("canonical decomposition")?;
        let mut out = BTreeMap::new();
        for l in self.strata() {
            let mut m = BTreeMap::new();
            for (&ij, mu) in &self.cocoeffs {
                let r = mu.restrict(&Restriction::Stratum(l))?;
                if !r.is_zero() {
                    m.insert(ij, r);
                }
            }
            out.insert(l, LagerbergCurrent { cocoeffs: m, ..Self::zero(self.domain.clone(), self.p) });
        }
        Ok(out)
    }

    /// Whether each `e^{−u_I−u_J}|T^{IJ}|` extends with locally finite mass to `target`.
    pub fn c_finite_test_in(&self, target: &Domain) -> Result<CFinite> {
        self.measures_only("C-finiteness")?;
        let n = self.n();
        for (&(i, j), m) in &self.cocoeffs {
            let tv = m.total_variation()?;
            let ell: Vec<Rational> = (0..n).map(|a| -(q(i64::from(i >> a & 1)) + q(i64::from(j >> a & 1)))).collect();
            match tv.local_finiteness(target, &ell) {
                Ok(()) => {}
                Err(Error::NotLocallyFinite(witness)) => return Ok(CFinite::Infinite { i, j, witness }),
                Err(Error::Undecided(why)) => return Ok(CFinite::Undecided(why)),
                Err(e) => return Err(e),
            }
        }
        Ok(CFinite::Finite)
    }

    pub fn c_finite_test(&self) -> Result<CFinite> {
        self.c_finite_test_in(&self.domain)
    }

    /// Extension by zero from `U ∖ E` to `target = U`, co-coefficient by co-coefficient.
    pub fn extend_by_zero(&self, target: &Domain) -> Result<Self> {
        self.measures_only("extension by zero")?;
        if target.n != self.n() || target.k != self.domain.k {
            return Err(Error::DimensionMismatch { expected: self.n(), found: target.n });
        }
        match self.c_finite_test_in(target)? {
            CFinite::Finite => {}
            CFinite::Infinite { witness, .. } => return Err(Error::NotCFinite(witness)),
            CFinite::Undecided(why) => return Err(Error::Undecided(why)),
        }
        let mut m = BTreeMap::new();
        for (&(i, j), mu) in &self.cocoeffs {
            m.insert((i, j), mu.image(&ImageMap::OpenInclusion { target: target.clone().without_axes(i | j) })?);
        }
        LagerbergCurrent::new(target.clone(), self.p, m)
    }

    /// Drops the mass on strata that `dom` does not contain.
    pub fn restrict_to(&self, dom: &Domain) -> Result<Self> {
        self.measures_only("restriction")?;
        let mut m = BTreeMap::new();
        for (&ij, mu) in &self.cocoeffs {
            let mut r = PieceMeasure::zero(self.n());
            for l in mu.strata() {
                if dom.allows_stratum(l) {
                    r = r.add(&mu.restrict(&Restriction::Stratum(l))?)?;
                }
            }
            if !r.is_zero() {
                m.insert(ij, r);
            }
        }
        LagerbergCurrent::new(dom.clone(), self.p, m)
    }

    /// `β ∧ T`, acting by `α ↦ T(β ∧ α)`, for a `(a,a)`-form field `β` without profile factors.
    pub fn wedge_with_form(&self, beta: &LagerbergFormField) -> Result<Self> {
        self.measures_only("wedge with a form")?;
        let n = self.n();
        let (a, b) = beta.bidegree();
        if a != b {
            return Err(Error::NotSquareBidegree(a, b));
        }
        let qt = self.q();
        if a > qt || beta.n() != n {
            return Err(Error::BidegreeMismatch(format!("({a},{a})-form against a ({},{})-current", self.p, self.p)));
        }
        let qs = qt - a;
        let unit = |i: Mask, j: Mask, d: usize| LagerbergForm::from_terms(n, d, d, [((i, j), Rational::one())]);
        let mut out: BTreeMap<(Mask, Mask), PieceMeasure> = BTreeMap::new();
        for (&(bi, bj), m) in &self.cocoeffs {
            for l in m.strata() {
                let ml = m.restrict(&Restriction::Stratum(l))?;
                for (&(k, kl), c) in beta.table(l).terms() {
                    if k & !bi != 0 || kl & !bj != 0 || (k | kl) & l != 0 {
                        continue;
                    }
                    let (i, j) = (bi & !k, bj & !kl);
                    let eps = unit(k, kl, a)?.wedge(&unit(i, j, qs)?)?.coeff(bi, bj);
                    let sign = eps * q(block_sign(qs) * block_sign(qt));
                    let contrib = ml.times_coefficient(c)?.scale(&sign);
                    let e = out.entry((i, j)).or_insert_with(|| PieceMeasure::zero(n));
                    *e = e.add(&contrib)?;
                }
            }
        }
        LagerbergCurrent::new(self.domain.clone(), self.p + a, out)
    }
}

fn random_subset(from: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Mask {
    let mut v = from.to_vec();
    for i in 0..k {
        let j = rng.gen_range(i..v.len());
        v.swap(i, j);
    }
    v[..k].iter().fold(0, |m, &a| m | (1 << a))
}

type WitnessAt = alloc::boxed::Box<dyn Fn(Location) -> PositivityWitness>;

/// Exact semidefiniteness of a symmetric matrix indexed by `q`-subsets.
fn matrix_defect(entries: &BTreeMap<(Mask, Mask), Rational>) -> Option<WitnessAt> {
    let rows: Vec<Mask> = entries.keys().flat_map(|&(i, j)| [i, j]).collect::<BTreeSet<_>>().into_iter().collect();
    let get = |i: Mask, j: Mask| entries.get(&(i, j)).cloned().unwrap_or_else(Rational::zero);
    for (a, &i) in rows.iter().enumerate() {
        for &j in &rows[a + 1..] {
            let x = get(i, j);
            if !x.is_zero() && &x * &x > get(i, i) * get(j, j) {
                return Some(alloc::boxed::Box::new(move |at| PositivityWitness::EstimateFails { i, j, at }));
            }
        }
    }
    let m: Vec<Vec<Rational>> = rows.iter().map(|&i| rows.iter().map(|&j| get(i, j)).collect()).collect();
    match linalg::ldl_psd(&m) {
        Definiteness::Psd { .. } => None,
        Definiteness::Indefinite { witness, .. } => {
            let direction: Vec<(Mask, Rational)> = rows.iter().copied().zip(witness).collect();
            Some(alloc::boxed::Box::new(move |at| PositivityWitness::Indefinite { at, direction: direction.clone() }))
        }
    }
}

fn float_indefinite(entries: &BTreeMap<(Mask, Mask), f64>) -> bool {
    let rows: Vec<Mask> = entries.keys().flat_map(|&(i, j)| [i, j]).collect::<BTreeSet<_>>().into_iter().collect();
    let m: Vec<Vec<f64>> = rows.iter().map(|&i| rows.iter().map(|&j| entries.get(&(i, j)).copied().unwrap_or(0.0)).collect()).collect();
    let norm = m.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    linalg::symmetric_eigenvalues(&m).iter().any(|&l| l < -1e-9 * norm)
}

/// `δ_C`: co-coefficients `m · det(A_I) det(A_J) · λ_Δ` on every cell, `A` a lattice basis
/// of the cell's span.
pub fn integration_current(c: &WeightedComplex, domain: Domain) -> Result<LagerbergCurrent> {
    let (n, d) = (c.n(), c.dim());
    if domain.n != n {
        return Err(Error::DimensionMismatch { expected: domain.n, found: n });
    }
    let mut m: BTreeMap<(Mask, Mask), PieceMeasure> = BTreeMap::new();
    let subs = index::subsets(n, d);
    for (idx, (cell, ch)) in c.cells().iter().zip(c.charts()).enumerate() {
        if cell.weight == 0 {
            continue;
        }
        let w = q(cell.weight);
        if d == 0 {
            let pt = cell.vertices[0].iter().cloned().map(Coord::Fin).collect();
            let e = m.entry((0, 0)).or_insert_with(|| PieceMeasure::zero(n));
            *e = e.add(&PieceMeasure::dirac(pt, w))?;
            continue;
        }
        let minors: Vec<Rational> = subs
            .iter()
            .map(|&s| {
                let rows: Vec<Vec<Rational>> = index::elements(s).into_iter().map(|r| ch.basis.iter().map(|b| b[r].clone()).collect()).collect();
                linalg::det(&rows)
            })
            .collect();
        for (a, &i) in subs.iter().enumerate() {
            for (b, &j) in subs.iter().enumerate() {
                let weight = &w * &minors[a] * &minors[b];
                if weight.is_zero() {
                    continue;
                }
                let piece = c.piece(idx, weight)?;
                let e = m.entry((i, j)).or_insert_with(|| PieceMeasure::zero(n));
                *e = e.add(&PieceMeasure::from_piece(n, piece))?;
            }
        }
    }
    let mut t = LagerbergCurrent::new(domain, n - d, m)?;
    t.source = Some(c.clone());
    Ok(t)
}

/// `T(f d′u∧d″u) = ∫_0^∞ e^{x²} f(x) dx` on `(0, ∞]`: positive and closed on the open
/// part, without C-finite mass at infinity.
pub fn exponential_square_current() -> LagerbergCurrent {
    let dom = Domain::chart(1, 1).with_lower(0, q(0));
    let x2 = Poly::var(1, 0).pow(2);
    let mu = PieceMeasure::density(1, 0, &[(Some(q(0)), None)], &Poly::one(1), &x2).expect("valid density");
    LagerbergCurrent::new(dom, 0, BTreeMap::from([((1, 1), mu)])).expect("valid current")
}

/// `f ↦ ∫_0^∞ e^{2e^x} f′(x) dx` on functions of `(0, ∞]`: closed for degree reasons but
/// negative on nonnegative bumps.
pub fn double_exponential_current() -> LagerbergCurrent {
    LagerbergCurrent::with_evaluator(Domain::chart(1, 1).with_lower(0, q(0)), 1, Evaluator::DoubleExponentialDerivative)
}

/// `T(g d′u∧d″u) = ∫_0^∞ e^{2x} g(x) dx` on `(0, ∞]`.
pub fn exponential_current() -> LagerbergCurrent {
    let dom = Domain::chart(1, 1).with_lower(0, q(0));
    let mu = PieceMeasure::density(1, 0, &[(Some(q(0)), None)], &Poly::one(1), &Poly::var(1, 0).scale(&q(2))).expect("valid density");
    LagerbergCurrent::new(dom, 0, BTreeMap::from([((1, 1), mu)])).expect("valid current")
}

/// `ω ∧ T′` on `R^4`, with `ω` the constant weakly positive non-positive `(2,2)`-form and
/// `T′` the `(0,0)`-current `f·τ ↦ T′(f)` given by `top`.
pub fn weak_form_times(top: PieceMeasure) -> Result<LagerbergCurrent> {
    let n = 4;
    let t = LagerbergCurrent::new(Domain::torus(n, 0), 0, BTreeMap::from([((15, 15), top)]))?;
    let w = weak_not_positive_form();
    let table = FormTable::from_terms(n, 2, 2, w.terms().map(|(&k, c)| (k, CoefficientFn::constant(n, c.clone()))))?;
    t.wedge_with_form(&LagerbergFormField::dense(table, 0))
}

/// `ω ∧ [R^4]`: weakly positive, not positive, off-diagonal mass with vanishing diagonal.
pub fn weakly_positive_lebesgue() -> LagerbergCurrent {
    let lebesgue = PieceMeasure::lebesgue(&vec![(None, None); 4], Rational::one()).expect("whole space");
    weak_form_times(lebesgue).expect("bidegrees fit")
}

/// `ω ∧ T′` with `T′(f τ) = ∂f/∂u₁(0)`: some co-coefficient is not a measure.
pub fn weakly_positive_derivative() -> LagerbergCurrent {
    let origin = vec![Coord::Fin(Rational::zero()); 4];
    let top = PieceMeasure::derivative_atom(origin, vec![q(1), q(0), q(0), q(0)], -Rational::one());
    weak_form_times(top).expect("bidegrees fit")
}

/// Label of a co-coefficient for reports.
pub fn cocoefficient_label(i: Mask, j: Mask) -> String {
    format!("{}|{}", index::label(i), index::label(j))
}

impl core::fmt::Display for Location {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Location::Atom(p) => {
                let v: Vec<String> = p.iter().map(|c| c.to_string()).collect();
                write!(f, "atom at ({})", v.join(", "))
            }
            Location::Piece { stratum, point } => {
                let v: Vec<String> = point.iter().map(crate::scalar::fmt_rational).collect();
                write!(f, "stratum {} near ({})", index::label(*stratum), v.join(", "))
            }
        }
    }
}
