//! Exact rational polynomials: affine substitution, simplex integrals and univariate sign tests.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::linalg;
use crate::scalar::{q, to_f64, Rational};

/// Multivariate polynomial with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Poly {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Poly {
        Poly::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Poly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    /// `c + a·x`.
    pub fn affine(c: Rational, a: &[Rational]) -> Poly {
        let mut p = Poly::constant(a.len(), c);
        for (i, ai) in a.iter().enumerate() {
            p = p.add(&Poly::var(a.len(), i).scale(ai));
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        let mut r = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c * s);
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut r = Poly::one(self.nvars);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (e, c) in &self.terms {
            let mut t = to_f64(c);
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= libm::pow(*xi, k as f64);
                }
            }
            s += t;
        }
        s
    }

    /// Floating-point snapshot for repeated evaluation.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (to_f64(c), e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, f64::from(k))).collect()))
                .collect(),
        }
    }

    /// `p(b + A t)` as a polynomial in `t`; `a` has one column per new variable.
    pub fn compose_affine(&self, b: &[Rational], a: &[Vec<Rational>]) -> Poly {
        let d = a.first().map_or(0, |r| r.len());
        let lin: Vec<Poly> = (0..self.nvars).map(|i| Poly::affine(b[i].clone(), &a[i])).collect();
        let mut r = Poly::zero(d);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(d, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&lin[i].pow(k));
                }
            }
            r = r.add(&t);
        }
        r
    }

    /// Univariate coefficients when `nvars == 1`.
    pub fn to_univariate(&self) -> Option<UPoly> {
        if self.nvars != 1 {
            return None;
        }
        let deg = self.degree() as usize;
        let mut c = vec![Rational::zero(); deg + 1];
        for (e, v) in &self.terms {
            c[e[0] as usize] = v.clone();
        }
        Some(UPoly::new(c))
    }
}

fn factorial(k: u32) -> Rational {
    let mut f = Rational::one();
    for i in 2..=k {
        f *= q(i as i64);
    }
    f
}

/// [`Poly`] with coefficients converted to `f64` once.
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, f64)>)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| e.iter().fold(*c, |t, &(i, k)| t * libm::pow(x[i], k))).sum()
    }
}

/// `∫_Δ p dt` over the `d`-simplex with the given `d+1` vertices in `R^d`.
pub fn integrate_simplex(p: &Poly, vertices: &[Vec<Rational>]) -> Rational {
    let d = p.nvars();
    if vertices.len() != d + 1 {
        return Rational::zero();
    }
    let v0 = &vertices[0];
    // columns v_i − v_0
    let edges: Vec<Vec<Rational>> = (0..d).map(|r| (1..=d).map(|i| &vertices[i][r] - &v0[r]).collect()).collect();
    let jac = linalg::det(&edges).abs();
    let s = p.compose_affine(v0, &edges);
    let mut total = Rational::zero();
    for (e, c) in s.terms() {
        let mut num = Rational::one();
        for &k in e {
            num *= factorial(k);
        }
        let deg: u32 = e.iter().sum();
        total += c * num / factorial(deg + d as u32);
    }
    total * jac
}

/// Univariate polynomial, lowest coefficient first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly(pub Vec<Rational>);

impl UPoly {
    pub fn new(mut c: Vec<Rational>) -> UPoly {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn deg(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut s = Rational::zero();
        for c in self.0.iter().rev() {
            s = s * x + c;
        }
        s
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect())
    }

    fn sub(&self, o: &UPoly) -> UPoly {
        let n = self.0.len().max(o.0.len());
        UPoly::new(
            (0..n)
                .map(|i| {
                    self.0.get(i).cloned().unwrap_or_else(Rational::zero) - o.0.get(i).cloned().unwrap_or_else(Rational::zero)
                })
                .collect(),
        )
    }

    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let mut r = self.0.clone();
        if d.is_zero() || r.len() < d.0.len() {
            return (UPoly(Vec::new()), self.clone());
        }
        let mut quo = vec![Rational::zero(); r.len() - d.0.len() + 1];
        let ld = d.lead();
        for k in (0..quo.len()).rev() {
            let c = &r[k + d.deg()] / &ld;
            for (j, dj) in d.0.iter().enumerate() {
                r[k + j] -= &c * dj;
            }
            quo[k] = c;
        }
        (UPoly::new(quo), UPoly::new(r))
    }

    fn monic(&self) -> UPoly {
        let l = self.lead();
        UPoly(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Product of the factors of odd multiplicity (Yun's square-free decomposition).
    pub fn odd_part(&self) -> UPoly {
        if self.deg() == 0 {
            return UPoly::new(vec![Rational::one()]);
        }
        let d = self.derivative();
        let a0 = self.gcd(&d);
        let mut b = self.divrem(&a0).0;
        let mut c = d.divrem(&a0).0;
        let mut dd = c.sub(&b.derivative());
        let mut out = UPoly::new(vec![Rational::one()]);
        let mut i = 1;
        while b.deg() > 0 {
            let a = b.gcd(&dd);
            if i % 2 == 1 {
                out = UPoly::new(mul_u(&out.0, &a.0));
            }
            b = b.divrem(&a).0;
            c = dd.divrem(&a).0;
            dd = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    fn sign_at(&self, x: Option<&Rational>, plus_inf: bool) -> i32 {
        let v = match x {
            Some(x) => self.eval(x),
            None => {
                let l = self.lead();
                if plus_inf || self.deg() % 2 == 0 {
                    l
                } else {
                    -l
                }
            }
        };
        if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Number of distinct real roots in the open interval `(a, b)` (`None` is infinite).
    pub fn count_roots(&self, a: Option<&Rational>, b: Option<&Rational>) -> usize {
        if self.deg() == 0 {
            return 0;
        }
        let mut s = self.divrem(&self.gcd(&self.derivative())).0;
        for x in [a, b].into_iter().flatten() {
            let lin = UPoly::new(vec![-x.clone(), Rational::one()]);
            while s.deg() > 0 && s.eval(x).is_zero() {
                s = s.divrem(&lin).0;
            }
        }
        if s.deg() == 0 {
            return 0;
        }
        let mut seq = vec![s.clone(), s.derivative()];
        while !seq.last().unwrap().is_zero() {
            let k = seq.len();
            let r = seq[k - 2].divrem(&seq[k - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(UPoly(r.0.iter().map(|c| -c.clone()).collect()));
        }
        let changes = |x: Option<&Rational>, plus: bool| {
            let signs: Vec<i32> = seq.iter().map(|p| p.sign_at(x, plus)).filter(|&s| s != 0).collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        changes(a, false).saturating_sub(changes(b, true))
    }

    /// Sign (`1`, `−1`, or `0` for the zero polynomial) when the polynomial does not
    /// change sign on `(a, b)`; `None` otherwise.
    pub fn constant_sign_on(&self, a: Option<&Rational>, b: Option<&Rational>) -> Option<i32> {
        if self.is_zero() {
            return Some(0);
        }
        if self.odd_part().count_roots(a, b) > 0 {
            return None;
        }
        let probe = match (a, b) {
            (Some(a), Some(b)) => (a + b) / q(2),
            (Some(a), None) => a + q(1),
            (None, Some(b)) => b - q(1),
            (None, None) => Rational::zero(),
        };
        // nudge off a root of even multiplicity
        let mut x = probe;
        let mut step = q(1) / q(7);
        for _ in 0..64 {
            let v = self.eval(&x);
            if !v.is_zero() {
                return Some(if v.is_positive() { 1 } else { -1 });
            }
            let cand = &x + &step;
            if b.is_none_or(|b| &cand < b) && a.is_none_or(|a| &cand > a) {
                x = cand;
            }
            step /= q(2);
        }
        None
    }
}

fn mul_u(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}
