//! Scalar types: exact rationals, Gaussian rationals, doubles, and extended reals.

use alloc::string::String;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational numbers.
pub type Rational = BigRational;
/// Exact Gaussian rationals `a + ib`.
pub type Gaussian = Complex<Rational>;

/// Integer rational.
pub fn q(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Fraction `num/den`.
pub fn qf(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Gaussian rational `re + i·im` from rationals.
pub fn gq(re: Rational, im: Rational) -> Gaussian {
    Complex::new(re, im)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Best rational with denominator at most `max_den` (continued fractions).
pub fn rational_approx(x: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut v = libm::fabs(x);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    for _ in 0..64 {
        let a = libm::floor(v);
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return Rational::zero();
    }
    let r = Rational::new(BigInt::from(h1), BigInt::from(k1));
    if neg {
        -r
    } else {
        r
    }
}

/// Parses `"3"`, `"-1/2"`, `"−1/2"` (unicode minus), `"0.25"`, `"1e-3"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t: String = s.trim().replace('\u{2212}', "-");
    let bad = || Error::Parse(alloc::format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((a, b)) = t.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (&t[..], 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = alloc::format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(num);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Renders a rational as `"a"` or `"a/b"`.
pub fn fmt_rational(x: &Rational) -> String {
    if x.is_integer() {
        alloc::format!("{}", x.numer())
    } else {
        alloc::format!("{}/{}", x.numer(), x.denom())
    }
}

/// `(-1)^k`.
pub fn parity_sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(-1)^{p(p-1)/2}`, the reordering sign between interleaved and block products.
pub fn block_sign(p: usize) -> i64 {
    parity_sign(p * p.saturating_sub(1) / 2)
}

/// Ring operations shared by every coefficient domain of forms.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    /// `self · (±1)`.
    fn signed(self, sign: i64) -> Self {
        match sign {
            1 => self,
            -1 => -self,
            0 => Self::zero(),
            s => self * Self::from_i64(s),
        }
    }
}

/// Scalars carrying complex structure.
pub trait ComplexScalar: Scalar {
    fn i() -> Self;
    fn conj(&self) -> Self;

    /// `i^k` for any integer `k`.
    fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::one(),
            1 => Self::i(),
            2 => -Self::one(),
            _ => -Self::i(),
        }
    }
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        q(v)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        to_f64(r)
    }
}

impl Scalar for Gaussian {
    fn from_i64(v: i64) -> Self {
        Complex::new(q(v), Rational::zero())
    }
    fn from_rational(r: &Rational) -> Self {
        Complex::new(r.clone(), Rational::zero())
    }
}

impl Scalar for Complex<f64> {
    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }
    fn from_rational(r: &Rational) -> Self {
        Complex::new(to_f64(r), 0.0)
    }
}

impl ComplexScalar for Gaussian {
    fn i() -> Self {
        Complex::new(Rational::zero(), Rational::one())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

impl ComplexScalar for Complex<f64> {
    fn i() -> Self {
        Complex::new(0.0, 1.0)
    }
    fn conj(&self) -> Self {
        Complex::new(self.re, -self.im)
    }
}

/// A coordinate of `R_∞ = R ∪ {∞}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    Fin(Rational),
    Inf,
}

impl Coord {
    pub fn is_inf(&self) -> bool {
        matches!(self, Coord::Inf)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Coord::Fin(x) => Some(x),
            Coord::Inf => None,
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Fin(x) => f.write_str(&fmt_rational(x)),
            Coord::Inf => f.write_str("inf"),
        }
    }
}
