//! Coefficient functions `Σ c · u^a · exp(ℓ·u) · ∏ profile(u_i)` and their exact derivatives.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::jet::{bump_derivative, step_derivative};
use crate::scalar::{q, to_f64, ComplexScalar, Gaussian, Rational, Scalar};

/// Scalars that can be evaluated in floating point.
pub trait Numeric: Scalar {
    fn to_c64(&self) -> Complex<f64>;
}

impl Numeric for Rational {
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(to_f64(self), 0.0)
    }
}

impl Numeric for Gaussian {
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(to_f64(&self.re), to_f64(&self.im))
    }
}

impl Numeric for f64 {
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(*self, 0.0)
    }
}

/// Standard one-variable profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Profile {
    /// `exp(−1/(1−t²))` rescaled to `(lo, hi)`.
    Bump,
    /// Smooth step rising from 0 at `lo` to 1 at `hi`.
    Rising,
    /// Smooth step falling from 1 at `lo` to 0 at `hi`.
    Falling,
}

/// A profile along one axis, differentiated `order` times.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxisFactor {
    pub axis: usize,
    pub profile: Profile,
    pub lo: Rational,
    pub hi: Rational,
    pub order: u32,
}

impl AxisFactor {
    pub fn new(axis: usize, profile: Profile, lo: Rational, hi: Rational) -> Result<AxisFactor> {
        if lo >= hi {
            return Err(Error::Invalid("profile interval must have lo < hi".into()));
        }
        Ok(AxisFactor { axis, profile, lo, hi, order: 0 })
    }

    pub fn eval(&self, x: f64) -> f64 {
        profile_value(self.profile, to_f64(&self.lo), to_f64(&self.hi), self.order, x)
    }

    /// Closed support as `(lower, upper)`; `None` is unbounded.
    pub fn support(&self) -> (Option<Rational>, Option<Rational>) {
        match (self.profile, self.order) {
            (Profile::Bump, _) | (_, 1..) => (Some(self.lo.clone()), Some(self.hi.clone())),
            (Profile::Rising, 0) => (Some(self.lo.clone()), None),
            (Profile::Falling, 0) => (None, Some(self.hi.clone())),
        }
    }

    /// Constant value for `u_axis ≥ hi`.
    pub fn value_beyond(&self) -> i64 {
        i64::from(self.profile == Profile::Rising && self.order == 0)
    }

    /// Constant value for `u_axis ≤ lo`.
    pub fn value_before(&self) -> i64 {
        i64::from(self.profile == Profile::Falling && self.order == 0)
    }
}


fn profile_value(profile: Profile, lo: f64, hi: f64, order: u32, x: f64) -> f64 {
    let w = hi - lo;
    let k = order as usize;
    match profile {
        Profile::Bump => {
            let t = (2.0 * x - lo - hi) / w;
            libm::pow(2.0 / w, k as f64) * bump_derivative(t, k)
        }
        Profile::Rising => libm::pow(1.0 / w, k as f64) * step_derivative((x - lo) / w, k),
        Profile::Falling => {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * libm::pow(1.0 / w, k as f64) * step_derivative((hi - x) / w, k)
        }
    }
}

/// Shape of a term: powers, linear exponent and the multiset of profile factors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub powers: Vec<u32>,
    pub expo: Vec<Rational>,
    pub factors: Vec<AxisFactor>,
}

impl Monomial {
    pub fn one(n: usize) -> Monomial {
        Monomial { powers: vec![0; n], expo: vec![Rational::zero(); n], factors: Vec::new() }
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        let mut factors: Vec<AxisFactor> = self.factors.iter().chain(&o.factors).cloned().collect();
        factors.sort();
        Monomial {
            powers: self.powers.iter().zip(&o.powers).map(|(a, b)| a + b).collect(),
            expo: self.expo.iter().zip(&o.expo).map(|(a, b)| a + b).collect(),
            factors,
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        let mut v = 1.0;
        let mut lin = 0.0;
        for (i, (&a, l)) in self.powers.iter().zip(&self.expo).enumerate() {
            if a > 0 {
                v *= libm::pow(u[i], a as f64);
            }
            if !l.is_zero() {
                lin += to_f64(l) * u[i];
            }
        }
        for f in &self.factors {
            v *= f.eval(u[f.axis]);
            if v == 0.0 {
                return 0.0;
            }
        }
        v * libm::exp(lin)
    }

    pub fn depends_on(&self, axis: usize) -> bool {
        self.powers[axis] > 0 || !self.expo[axis].is_zero() || self.factors.iter().any(|f| f.axis == axis)
    }
}

struct CompiledTerm {
    c: Complex<f64>,
    powers: Vec<(usize, f64)>,
    expo: Vec<(usize, f64)>,
    factors: Vec<(usize, Profile, f64, f64, u32)>,
}

/// [`CoefficientFn`] with every rational converted once; evaluates to the same values.
pub struct Compiled {
    terms: Vec<CompiledTerm>,
}

impl Compiled {
    pub fn eval(&self, u: &[f64]) -> Complex<f64> {
        let mut s = Complex::new(0.0, 0.0);
        'terms: for t in &self.terms {
            let mut v = 1.0;
            for &(axis, profile, lo, hi, order) in &t.factors {
                v *= profile_value(profile, lo, hi, order, u[axis]);
                if v == 0.0 {
                    continue 'terms;
                }
            }
            for &(i, a) in &t.powers {
                v *= libm::pow(u[i], a);
            }
            let lin: f64 = t.expo.iter().map(|&(i, l)| l * u[i]).sum();
            s += t.c * (v * libm::exp(lin));
        }
        s
    }

    pub fn eval_real(&self, u: &[f64]) -> f64 {
        self.eval(u).re
    }
}

/// Finite sum of coefficient-weighted monomials in normal form.
#[derive(Clone, PartialEq)]
pub struct CoefficientFn<S = Rational> {
    n: usize,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Numeric> CoefficientFn<S> {
    pub fn zero(n: usize) -> Self {
        CoefficientFn { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: S) -> Self {
        Self::term(c, Monomial::one(n))
    }

    pub fn term(c: S, m: Monomial) -> Self {
        let n = m.powers.len();
        let mut f = Self::zero(n);
        f.push(m, c);
        f
    }

    /// `u_axis`.
    pub fn coordinate(n: usize, axis: usize) -> Self {
        let mut m = Monomial::one(n);
        m.powers[axis] = 1;
        Self::term(S::one(), m)
    }

    /// `exp(ℓ·u)`.
    pub fn exp_linear(expo: Vec<Rational>) -> Self {
        let n = expo.len();
        Self::term(S::one(), Monomial { powers: vec![0; n], expo, factors: Vec::new() })
    }

    pub fn profile(n: usize, f: AxisFactor) -> Self {
        let mut m = Monomial::one(n);
        m.factors.push(f);
        Self::term(S::one(), m)
    }

    /// Product of bumps on a box.
    pub fn bump_box(bounds: &[(Rational, Rational)]) -> Result<Self> {
        let n = bounds.len();
        let mut f = Self::constant(n, S::one());
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            f = f.mul(&Self::profile(n, AxisFactor::new(i, Profile::Bump, lo.clone(), hi.clone())?));
        }
        Ok(f)
    }

    fn push(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(S::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.push(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        let mut r = Self::zero(self.n);
        for (m, c) in &self.terms {
            r.push(m.clone(), f(c));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.push(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        r
    }

    /// Multiplies by `exp(ℓ·u)`.
    pub fn times_exp(&self, expo: &[Rational]) -> Self {
        let mut r = Self::zero(self.n);
        for (m, c) in &self.terms {
            let mut m = m.clone();
            for (a, b) in m.expo.iter_mut().zip(expo) {
                *a += b;
            }
            r.push(m, c.clone());
        }
        r
    }

    /// Exact partial derivative `∂/∂u_axis`.
    pub fn partial(&self, axis: usize) -> Self {
        let mut r = Self::zero(self.n);
        for (m, c) in &self.terms {
            let a = m.powers[axis];
            if a > 0 {
                let mut d = m.clone();
                d.powers[axis] -= 1;
                r.push(d, c.clone() * S::from_i64(a as i64));
            }
            if !m.expo[axis].is_zero() {
                r.push(m.clone(), c.clone() * S::from_rational(&m.expo[axis]));
            }
            for (k, f) in m.factors.iter().enumerate() {
                if f.axis == axis {
                    let mut d = m.clone();
                    d.factors[k].order += 1;
                    d.factors.sort();
                    r.push(d, c.clone());
                }
            }
        }
        r
    }

    pub fn eval(&self, u: &[f64]) -> Complex<f64> {
        let mut s = Complex::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let v = m.eval(u);
            if v != 0.0 {
                s += c.to_c64() * v;
            }
        }
        s
    }

    pub fn eval_real(&self, u: &[f64]) -> f64 {
        self.eval(u).re
    }

    /// Floating-point snapshot for repeated evaluation inside quadrature loops.
    pub fn compile(&self) -> Compiled {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| CompiledTerm {
                c: c.to_c64(),
                powers: m.powers.iter().enumerate().filter(|(_, &a)| a > 0).map(|(i, &a)| (i, f64::from(a))).collect(),
                expo: m.expo.iter().enumerate().filter(|(_, l)| !l.is_zero()).map(|(i, l)| (i, to_f64(l))).collect(),
                factors: m.factors.iter().map(|f| (f.axis, f.profile, to_f64(&f.lo), to_f64(&f.hi), f.order)).collect(),
            })
            .collect();
        Compiled { terms }
    }

    pub fn depends_on(&self, axis: usize) -> bool {
        self.terms.keys().any(|m| m.depends_on(axis))
    }

    /// Whether every term is `c · u^a · exp(ℓ·u)`.
    pub fn is_factor_free(&self) -> bool {
        self.terms.keys().all(|m| m.factors.is_empty())
    }

    /// Whether every term is a plain polynomial monomial.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| m.factors.is_empty() && m.expo.iter().all(Zero::is_zero))
    }

    /// Per-axis hull of the supports of all terms; `None` is unbounded.
    pub fn support_box(&self) -> Vec<(Option<Rational>, Option<Rational>)> {
        let mut hull: Vec<Option<(Option<Rational>, Option<Rational>)>> = vec![None; self.n];
        for m in self.terms.keys() {
            for (i, h) in hull.iter_mut().enumerate() {
                let mut lo: Option<Rational> = None;
                let mut hi: Option<Rational> = None;
                for f in m.factors.iter().filter(|f| f.axis == i) {
                    let (a, b) = f.support();
                    if let Some(a) = a {
                        lo = Some(match lo {
                            Some(l) if l > a => l,
                            _ => a,
                        });
                    }
                    if let Some(b) = b {
                        hi = Some(match hi {
                            Some(h) if h < b => h,
                            _ => b,
                        });
                    }
                }
                *h = Some(match h.take() {
                    None => (lo, hi),
                    Some((l0, h0)) => (
                        match (l0, lo) {
                            (Some(a), Some(b)) => Some(if a < b { a } else { b }),
                            _ => None,
                        },
                        match (h0, hi) {
                            (Some(a), Some(b)) => Some(if a > b { a } else { b }),
                            _ => None,
                        },
                    ),
                });
            }
        }
        hull.into_iter().map(|h| h.unwrap_or((Some(Rational::zero()), Some(Rational::zero())))).collect()
    }

    /// Term-wise value for `u_axis → +∞`, assuming each surviving term is eventually
    /// constant in that variable; growing terms are reported as divergent.
    pub fn limit_at_infinity(&self, axis: usize) -> Result<Self> {
        let mut r = Self::zero(self.n);
        for (m, c) in &self.terms {
            let mut m = m.clone();
            let c = c.clone();
            let mut keep = Vec::new();
            let mut vanishes = false;
            for f in m.factors.drain(..) {
                if f.axis != axis {
                    keep.push(f);
                } else if f.value_beyond() == 0 {
                    vanishes = true;
                }
            }
            m.factors = keep;
            if vanishes || m.expo[axis].is_negative() {
                continue;
            }
            if m.expo[axis].is_positive() || m.powers[axis] > 0 {
                return Err(Error::Divergent(alloc::format!("coefficient grows along axis {}", axis + 1)));
            }
            r.push(m, c);
        }
        Ok(r)
    }

    /// Substitutes `u_axis = value`.
    pub fn fix_axis(&self, axis: usize, value: &Rational) -> Result<Self> {
        let mut r = Self::zero(self.n);
        let x = to_f64(value);
        for (m, c) in &self.terms {
            let mut m = m.clone();
            let mut c = c.clone();
            let a = m.powers[axis];
            if a > 0 {
                c = c * S::from_rational(&num_traits::pow(value.clone(), a as usize));
                m.powers[axis] = 0;
            }
            if !m.expo[axis].is_zero() {
                return Err(Error::FamilyEscape("exponential evaluated at a point".into()));
            }
            let mut keep = Vec::new();
            let mut scale = 1.0;
            for f in m.factors.drain(..) {
                if f.axis == axis {
                    scale *= f.eval(x);
                } else {
                    keep.push(f);
                }
            }
            if scale != 1.0 && scale != 0.0 {
                return Err(Error::FamilyEscape("profile evaluated at a point".into()));
            }
            m.factors = keep;
            if scale != 0.0 {
                r.push(m, c);
            }
        }
        Ok(r)
    }
}

impl CoefficientFn<Rational> {
    pub fn complexify(&self) -> CoefficientFn<Gaussian> {
        let mut r = CoefficientFn::zero(self.n);
        for (m, c) in &self.terms {
            r.push(m.clone(), Gaussian::new(c.clone(), Rational::zero()));
        }
        r
    }

    /// Polynomial `Σ c u^a` when [`is_polynomial`](Self::is_polynomial) holds.
    pub fn to_polynomial(&self) -> Option<crate::poly::Poly> {
        if !self.is_polynomial() {
            return None;
        }
        let mut p = crate::poly::Poly::zero(self.n);
        for (m, c) in &self.terms {
            p.add_term(m.powers.clone(), c.clone());
        }
        Some(p)
    }

    pub fn from_polynomial(p: &crate::poly::Poly) -> Self {
        let mut r = Self::zero(p.nvars());
        for (a, c) in p.terms() {
            let mut m = Monomial::one(p.nvars());
            m.powers = a.clone();
            r.push(m, c.clone());
        }
        r
    }
}

impl CoefficientFn<Gaussian> {
    pub fn conj(&self) -> Self {
        self.map(ComplexScalar::conj)
    }

    /// Real part when all coefficients are real.
    pub fn to_real(&self) -> Option<CoefficientFn<Rational>> {
        let mut r = CoefficientFn::zero(self.n);
        for (m, c) in &self.terms {
            if !c.im.is_zero() {
                return None;
            }
            r.push(m.clone(), c.re.clone());
        }
        Some(r)
    }
}

impl<S: Numeric> fmt::Debug for CoefficientFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c:?}")?;
            for (i, &a) in m.powers.iter().enumerate() {
                if a > 0 {
                    write!(f, "·u{}^{}", i + 1, a)?;
                }
            }
            if m.expo.iter().any(|e| !e.is_zero()) {
                write!(f, "·exp({:?})", m.expo)?;
            }
            for x in &m.factors {
                write!(f, "·{:?}{}[{},{}]^({})", x.profile, x.axis + 1, x.lo, x.hi, x.order)?;
            }
        }
        Ok(())
    }
}

/// `q(a)/q(b)` shorthand used by callers building intervals.
pub fn interval(a: i64, b: i64) -> (Rational, Rational) {
    (q(a), q(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = CoefficientFn<Rational>;

    #[test]
    fn derivative_of_product_matches_difference() {
        let n = 2;
        let f = F::coordinate(n, 0)
            .mul(&F::coordinate(n, 1))
            .mul(&F::bump_box(&[interval(-1, 2), interval(0, 3)]).unwrap())
            .mul(&F::exp_linear(vec![q(1), q(-2)]));
        let d = f.partial(0);
        let u = [0.4, 1.3];
        let h = 1e-6;
        let fd = (f.eval_real(&[u[0] + h, u[1]]) - f.eval_real(&[u[0] - h, u[1]])) / (2.0 * h);
        assert!((fd - d.eval_real(&u)).abs() < 1e-6);
    }

    #[test]
    fn mixed_partials_commute() {
        let f = F::coordinate(2, 0)
            .mul(&F::profile(2, AxisFactor::new(1, Profile::Rising, q(0), q(1)).unwrap()))
            .mul(&F::exp_linear(vec![q(2), q(1)]));
        assert_eq!(f.partial(0).partial(1), f.partial(1).partial(0));
    }

    #[test]
    fn limits_toward_infinity() {
        let rising = F::profile(1, AxisFactor::new(0, Profile::Rising, q(0), q(1)).unwrap());
        assert_eq!(rising.limit_at_infinity(0).unwrap(), F::constant(1, q(1)));
        let decay = F::exp_linear(vec![q(-2)]);
        assert!(decay.limit_at_infinity(0).unwrap().is_zero());
        assert!(F::coordinate(1, 0).limit_at_infinity(0).is_err());
    }

    #[test]
    fn support_of_bump_box() {
        let f = F::bump_box(&[interval(0, 1), interval(2, 5)]).unwrap();
        let b = f.support_box();
        assert_eq!(b[1], (Some(q(2)), Some(q(5))));
    }
}
