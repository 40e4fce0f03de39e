//! Bigraded exterior algebras at a single fiber: Lagerberg forms in `d′u_i, d″u_j`
//! and complex forms in `du_i, dū_j`, stored in block basis `x_I ∧ y_J`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::marker::PhantomData;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::index::{self, merge_sign, Mask};
use crate::scalar::{block_sign, parity_sign, ComplexScalar, Gaussian, Rational, Scalar};

/// Marker for the real Lagerberg algebra generated by `d′u_i`, `d″u_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Lagerberg;

/// Marker for the complex algebra generated by `du_i`, `dū_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Dolbeault;

pub trait Algebra: Clone + Copy + fmt::Debug + PartialEq + Default {
    const FIRST: &'static str;
    const SECOND: &'static str;
}

impl Algebra for Lagerberg {
    const FIRST: &'static str = "d'u";
    const SECOND: &'static str = "d''u";
}

impl Algebra for Dolbeault {
    const FIRST: &'static str = "du";
    const SECOND: &'static str = "dū";
}

/// Homogeneous `(p,q)`-form; absent keys are zero coefficients.
#[derive(Clone, PartialEq)]
pub struct FiberForm<A, S> {
    n: usize,
    p: usize,
    q: usize,
    terms: BTreeMap<(Mask, Mask), S>,
    _alg: PhantomData<A>,
}

pub type LagerbergForm<S = Rational> = FiberForm<Lagerberg, S>;
pub type ComplexForm<S = Gaussian> = FiberForm<Dolbeault, S>;

impl<A: Algebra, S: Scalar> FiberForm<A, S> {
    pub fn zero(n: usize, p: usize, q: usize) -> Self {
        FiberForm { n, p, q, terms: BTreeMap::new(), _alg: PhantomData }
    }

    /// Builds a form from `((I, J), c)` pairs, summing repeated keys.
    pub fn from_terms<It>(n: usize, p: usize, q: usize, terms: It) -> Result<Self>
    where
        It: IntoIterator<Item = ((Mask, Mask), S)>,
    {
        let mut f = Self::zero(n, p, q);
        for ((i, j), c) in terms {
            f.add_term(i, j, c)?;
        }
        Ok(f)
    }

    pub fn add_term(&mut self, i: Mask, j: Mask, c: S) -> Result<()> {
        let limit = index::full(self.n);
        if i & !limit != 0 || j & !limit != 0 {
            return Err(Error::Invalid(alloc::format!("index outside 1..{}", self.n)));
        }
        if index::size(i) != self.p || index::size(j) != self.q {
            return Err(Error::BidegreeMismatch(alloc::format!(
                "term {}|{} in a ({},{})-form",
                index::label(i),
                index::label(j),
                self.p,
                self.q
            )));
        }
        let entry = self.terms.entry((i, j)).or_insert_with(S::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&(i, j));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Mask, Mask), &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: Mask, j: Mask) -> S {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if (self.p, self.q) != (other.p, other.q) {
            return Err(Error::BidegreeMismatch(alloc::format!(
                "({},{}) vs ({},{})",
                self.p,
                self.q,
                other.p,
                other.q
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    /// Applies `f` to every coefficient, dropping zeros.
    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (*k, f(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        FiberForm { n: self.n, p: self.p, q: self.q, terms, _alg: PhantomData }
    }

    /// Graded-commutative product; all degree-one generators anticommute.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut out = Self::zero(self.n, self.p + other.p, self.q + other.q);
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &other.terms {
                let s1 = merge_sign(i, k);
                let s2 = merge_sign(j, l);
                if s1 == 0 || s2 == 0 {
                    continue;
                }
                // move x_K past y_J
                let sign = s1 * s2 * parity_sign(index::size(j) * index::size(k));
                let c = (a.clone() * b.clone()).signed(sign);
                let key = (i | k, j | l);
                let entry = out.terms.entry(key).or_insert_with(S::zero);
                *entry = entry.clone() + c;
                if entry.is_zero() {
                    out.terms.remove(&key);
                }
            }
        }
        Ok(out)
    }

    /// Coefficient of `x_{[n]} ∧ y_{[n]}`.
    pub fn top_coefficient(&self) -> S {
        let f = index::full(self.n);
        self.coeff(f, f)
    }

    /// A `(p,0)`-form with coefficients indexed by the `p`-subsets in lexicographic order.
    pub fn first_kind(n: usize, p: usize, coeffs: &[S]) -> Self {
        let subsets = index::subsets(n, p);
        let mut f = Self::zero(n, p, 0);
        for (m, c) in subsets.iter().zip(coeffs) {
            if !c.is_zero() {
                f.terms.insert((*m, 0), c.clone());
            }
        }
        f
    }

    /// Coefficient vector of a `(p,0)`-form over the lexicographic `p`-subsets.
    pub fn first_kind_coeffs(&self) -> Vec<S> {
        index::subsets(self.n, self.p).into_iter().map(|m| self.coeff(m, 0)).collect()
    }

    /// Square coefficient array `c_{KL}` of a `(p,p)`-form over lexicographic subsets.
    pub fn coefficient_matrix(&self) -> Result<Vec<Vec<S>>> {
        if self.p != self.q {
            return Err(Error::NotSquareBidegree(self.p, self.q));
        }
        let subs = index::subsets(self.n, self.p);
        Ok(subs.iter().map(|&k| subs.iter().map(|&l| self.coeff(k, l)).collect()).collect())
    }
}

impl<A: Algebra, S: Scalar> fmt::Debug for FiberForm<A, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})-form[n={}] ", self.p, self.q, self.n)?;
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| {
                let mut s = alloc::format!("{c:?}");
                for e in index::one_based(i) {
                    s.push_str(&alloc::format!("·{}{}", A::FIRST, e));
                }
                for e in index::one_based(j) {
                    s.push_str(&alloc::format!("·{}{}", A::SECOND, e));
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl<S: Scalar> FiberForm<Lagerberg, S> {
    /// The algebra involution swapping `d′u_i` and `d″u_i`.
    pub fn involution_j(&self) -> Self {
        let mut out = Self::zero(self.n, self.q, self.p);
        for (&(i, j), c) in &self.terms {
            let sign = parity_sign(index::size(i) * index::size(j));
            out.terms.insert((j, i), c.clone().signed(sign));
        }
        out
    }

    /// `J a = (-1)^p a` for a `(p,p)`-form.
    pub fn is_symmetric(&self) -> bool {
        self.p == self.q && self.involution_j() == self.scale(&S::from_i64(parity_sign(self.p)))
    }

    /// `τ_n = d′u_1∧d″u_1∧…∧d′u_n∧d″u_n`.
    pub fn tau(n: usize) -> Self {
        let f = index::full(n);
        let mut t = Self::zero(n, n, n);
        t.terms.insert((f, f), S::from_i64(block_sign(n)));
        t
    }

    /// `⟨a, b⟩` with `a ∧ b = ⟨a, b⟩ τ_n`.
    pub fn dual_pairing(&self, other: &Self) -> Result<S> {
        if self.p + other.p != self.n || self.q + other.q != self.n {
            return Err(Error::BidegreeMismatch(alloc::format!(
                "({},{}) and ({},{}) are not complementary in dimension {}",
                self.p,
                self.q,
                other.p,
                other.q,
                self.n
            )));
        }
        Ok(self.wedge(other)?.top_coefficient().signed(block_sign(self.n)))
    }

    /// Gram matrix `M_{KL} = (-1)^{p(p-1)/2} c_{KL}` of the quadratic form `|a|`.
    pub fn gram(&self) -> Result<Vec<Vec<S>>> {
        let s = block_sign(self.p);
        Ok(self
            .coefficient_matrix()?
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.signed(s)).collect())
            .collect())
    }

    /// Inverse of [`gram`](Self::gram).
    pub fn from_gram(n: usize, p: usize, m: &[Vec<S>]) -> Self {
        let subs = index::subsets(n, p);
        let s = block_sign(p);
        let mut out = Self::zero(n, p, p);
        for (a, &k) in subs.iter().enumerate() {
            for (b, &l) in subs.iter().enumerate() {
                let c = m[a][b].clone().signed(s);
                if !c.is_zero() {
                    out.terms.insert((k, l), c);
                }
            }
        }
        out
    }

    /// `(-1)^{p(p-1)/2} α ∧ J α` for a `(p,0)`-form `α`; its Gram matrix is `a aᵀ`.
    pub fn positive_generator(alpha: &Self) -> Result<Self> {
        if alpha.q != 0 {
            return Err(Error::BidegreeMismatch("generator needs a (p,0)-form".into()));
        }
        Ok(alpha.wedge(&alpha.involution_j())?.scale(&S::from_i64(block_sign(alpha.p))))
    }
}

/// Coefficient domains with a complexification used by the embedding.
pub trait Complexify: Scalar {
    type C: ComplexScalar;
    fn complexify(&self) -> Self::C;
}

impl Complexify for Rational {
    type C = Gaussian;
    fn complexify(&self) -> Gaussian {
        Complex::new(self.clone(), Rational::zero())
    }
}

impl Complexify for f64 {
    type C = Complex<f64>;
    fn complexify(&self) -> Complex<f64> {
        Complex::new(*self, 0.0)
    }
}

impl<S: Complexify> FiberForm<Lagerberg, S> {
    /// Algebra map `d′u_j ↦ du_j`, `d″u_j ↦ i dū_j`.
    pub fn embed(&self) -> FiberForm<Dolbeault, S::C> {
        let mut out = FiberForm::zero(self.n, self.p, self.q);
        for (&(i, j), c) in &self.terms {
            let v = c.complexify() * S::C::i_pow(index::size(j) as i64);
            out.terms.insert((i, j), v);
        }
        out
    }
}

impl FiberForm<Dolbeault, Gaussian> {
    /// Preimage under the embedding; `None` unless the form is fixed by `F`.
    pub fn to_lagerberg(&self) -> Option<LagerbergForm<Rational>> {
        let mut out = LagerbergForm::zero(self.n, self.p, self.q);
        for (&(i, j), c) in &self.terms {
            let v = c.clone() * Gaussian::i_pow(-(index::size(j) as i64));
            if !v.im.is_zero() {
                return None;
            }
            out.terms.insert((i, j), v.re);
        }
        Some(out)
    }
}

impl<S: ComplexScalar> FiberForm<Dolbeault, S> {
    /// Complex conjugation: antilinear, `du ↦ dū`.
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero(self.n, self.q, self.p);
        for (&(i, j), c) in &self.terms {
            let sign = parity_sign(index::size(i) * index::size(j));
            out.terms.insert((j, i), c.conj().signed(sign));
        }
        out
    }

    /// Antilinear involution with `F(du) = du`, `F(dū) = -dū`.
    pub fn involution_f(&self) -> Self {
        let mut out = Self::zero(self.n, self.p, self.q);
        for (&(i, j), c) in &self.terms {
            out.terms.insert((i, j), c.conj().signed(parity_sign(index::size(j))));
        }
        out
    }

    /// Real forms: `conj(a) = a`.
    pub fn is_real(&self) -> bool {
        self.conjugate() == *self
    }

    /// `ω_n = du_1∧i dū_1∧…∧du_n∧i dū_n`.
    pub fn omega(n: usize) -> Self {
        let f = index::full(n);
        let mut t = Self::zero(n, n, n);
        t.terms.insert((f, f), S::i_pow(n as i64).signed(block_sign(n)));
        t
    }

    /// `⟨a, b⟩` with `a ∧ b = ⟨a, b⟩ ω_n`.
    pub fn dual_pairing(&self, other: &Self) -> Result<S> {
        if self.p + other.p != self.n || self.q + other.q != self.n {
            return Err(Error::BidegreeMismatch("pairing needs complementary bidegrees".into()));
        }
        let top = self.wedge(other)?.top_coefficient();
        Ok((top * S::i_pow(-(self.n as i64))).signed(block_sign(self.n)))
    }

    /// Hermitian Gram matrix `M_{KL} = (-1)^{p(p-1)/2} i^{-p} c_{KL}`.
    pub fn gram(&self) -> Result<Vec<Vec<S>>> {
        let f = S::i_pow(-(self.p as i64)).signed(block_sign(self.p));
        Ok(self
            .coefficient_matrix()?
            .into_iter()
            .map(|row| row.into_iter().map(|c| c * f.clone()).collect())
            .collect())
    }

    /// Inverse of [`gram`](Self::gram).
    pub fn from_gram(n: usize, p: usize, m: &[Vec<S>]) -> Self {
        let subs = index::subsets(n, p);
        let f = S::i_pow(p as i64).signed(block_sign(p));
        let mut out = Self::zero(n, p, p);
        for (a, &k) in subs.iter().enumerate() {
            for (b, &l) in subs.iter().enumerate() {
                let c = m[a][b].clone() * f.clone();
                if !c.is_zero() {
                    out.terms.insert((k, l), c);
                }
            }
        }
        out
    }
}

/// Involutions acting on fiber forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Involution {
    J,
    Conjugation,
    F,
}

/// A fiber form of either algebra with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyForm {
    Lagerberg(LagerbergForm<Rational>),
    Complex(ComplexForm<Gaussian>),
}

pub fn apply_involution(kind: Involution, a: &AnyForm) -> Result<AnyForm> {
    match (kind, a) {
        (Involution::J, AnyForm::Lagerberg(f)) => Ok(AnyForm::Lagerberg(f.involution_j())),
        (Involution::Conjugation, AnyForm::Complex(f)) => Ok(AnyForm::Complex(f.conjugate())),
        (Involution::F, AnyForm::Complex(f)) => Ok(AnyForm::Complex(f.involution_f())),
        (Involution::J, AnyForm::Complex(_)) => {
            Err(Error::WrongAlgebra("J acts on Lagerberg forms".into()))
        }
        (_, AnyForm::Lagerberg(_)) => {
            Err(Error::WrongAlgebra("conjugation and F act on complex forms".into()))
        }
    }
}
