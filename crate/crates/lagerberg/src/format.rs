//! JSON encodings of fans, forms, fields, measures, currents and complexes.
//!
//! Rationals are written as integers or `"a/b"` strings, chart coordinates additionally
//! as `"inf"`. Index sets are one-based lists. Every encoder output parses back to an
//! equal object.

use std::collections::BTreeMap;

use lagerberg_core::coeff::{AxisFactor, CoefficientFn, Monomial, Profile};
use lagerberg_core::complex::{Cell, WeightedComplex};
use lagerberg_core::correspondence::{InvariantComplexCurrent, KernelExemplar};
use lagerberg_core::currents::{Evaluator, LagerbergCurrent};
use lagerberg_core::fan::{validate_fan, Fan};
use lagerberg_core::fiber::{ComplexForm, LagerbergForm};
use lagerberg_core::field::{FormTable, LagerbergFormField, Neighborhood};
use lagerberg_core::index::{self, Mask};
use lagerberg_core::measures::{Atom, DerivativeAtom, Domain, Piece, PieceMeasure, Sign};
use lagerberg_core::poly::Poly;
use lagerberg_core::polyhedron::{Halfspace, Polyhedron};
use lagerberg_core::scalar::{fmt_rational, parse_rational, q, Coord, Gaussian, Rational};
use num_traits::{ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer};
use serde_json::{json, Value};

/// Failure to turn decoded JSON into a valid object.
#[derive(Debug)]
pub struct FormatError(pub String);

impl std::fmt::Display for FormatError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for FormatError {}

impl From<lagerberg_core::Error> for FormatError {
    fn from(e: lagerberg_core::Error) -> Self {
        FormatError(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(FormatError(msg.into()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Text(String),
}

/// A rational read from an integer or a decimal/fraction string.
#[derive(Clone, Debug, PartialEq)]
pub struct Q(pub Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Num::deserialize(d)? {
            Num::Int(v) => Ok(Q(q(v))),
            Num::Text(s) => parse_rational(&s).map(Q).map_err(D::Error::custom),
        }
    }
}

/// A chart coordinate: a rational or `"inf"`.
#[derive(Clone, Debug, PartialEq)]
pub struct C(pub Coord);

impl<'de> Deserialize<'de> for C {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Num::deserialize(d)? {
            Num::Int(v) => Ok(C(Coord::Fin(q(v)))),
            Num::Text(s) if s == "inf" || s == "∞" => Ok(C(Coord::Inf)),
            Num::Text(s) => parse_rational(&s).map(|r| C(Coord::Fin(r))).map_err(D::Error::custom),
        }
    }
}

fn rats(v: &[Q]) -> Vec<Rational> {
    v.iter().map(|x| x.0.clone()).collect()
}

pub fn rat(x: &Rational) -> Value {
    match (x.is_integer(), x.to_i64()) {
        (true, Some(v)) => json!(v),
        _ => json!(fmt_rational(x)),
    }
}

pub fn rat_vec(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rat).collect())
}

pub fn coord(c: &Coord) -> Value {
    match c {
        Coord::Fin(x) => rat(x),
        Coord::Inf => json!("inf"),
    }
}

pub fn coord_vec(v: &[Coord]) -> Value {
    Value::Array(v.iter().map(coord).collect())
}

pub fn mask(m: Mask) -> Value {
    json!(index::one_based(m))
}

fn to_mask(ix: &[usize], n: usize) -> Result<Mask> {
    index::from_one_based(ix, n).ok_or_else(|| FormatError(format!("index set {ix:?} does not fit in 1..={n}")))
}

// ---------------------------------------------------------------------------
// domains

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub n: usize,
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub lower: Option<Vec<Option<Q>>>,
    #[serde(default)]
    pub upper: Option<Vec<Option<Q>>>,
    /// Infinite axes whose point at infinity belongs to the set; all of them by default.
    #[serde(default)]
    pub closed: Option<Vec<usize>>,
    #[serde(default)]
    pub excluded: Vec<Vec<usize>>,
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        let (n, k) = (self.n, self.k);
        if k > n || n > 31 {
            return bad(format!("chart with {k} infinite axes in rank {n}"));
        }
        let bound = |v: &Option<Vec<Option<Q>>>| -> Result<Vec<Option<Rational>>> {
            match v {
                None => Ok(vec![None; n]),
                Some(v) if v.len() == n => Ok(v.iter().map(|x| x.as_ref().map(|x| x.0.clone())).collect()),
                Some(v) => bad(format!("bound list of length {} for rank {n}", v.len())),
            }
        };
        let lower = bound(&self.lower)?;
        let upper = bound(&self.upper)?;
        let mut d = Domain::chart(n, k);
        for (a, (lo, hi)) in lower.into_iter().zip(upper).enumerate() {
            if let (Some(l), Some(h)) = (&lo, &hi) {
                if l >= h {
                    return bad(format!("empty range on axis {}", a + 1));
                }
            }
            if let Some(l) = lo {
                d = d.with_lower(a, l);
            }
            if let Some(h) = hi {
                d = d.with_upper(a, h);
            }
        }
        if let Some(c) = &self.closed {
            let m = to_mask(c, n)?;
            if m & !index::full(k) != 0 {
                return bad("only infinite axes can be closed");
            }
            d.closed &= m;
        }
        for e in &self.excluded {
            d = d.without(to_mask(e, n)?);
        }
        Ok(d)
    }
}

pub fn domain_json(d: &Domain) -> Value {
    let b = |v: &[Option<Rational>]| Value::Array(v.iter().map(|x| x.as_ref().map_or(Value::Null, rat)).collect());
    json!({
        "n": d.n,
        "k": d.k,
        "lower": b(&d.lower),
        "upper": b(&d.upper),
        "closed": mask(d.closed),
        "excluded": d.excluded.iter().map(|&m| mask(m)).collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------------------
// polynomials and polyhedra

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub e: Vec<u32>,
    pub c: Q,
}

pub fn build_poly(terms: &[TermSpec], nvars: usize) -> Result<Poly> {
    let mut p = Poly::zero(nvars);
    for t in terms {
        if t.e.len() != nvars {
            return bad(format!("exponent vector of length {} in {nvars} variables", t.e.len()));
        }
        p.add_term(t.e.clone(), t.c.0.clone());
    }
    Ok(p)
}

pub fn poly_json(p: &Poly) -> Value {
    Value::Array(p.terms().map(|(e, c)| json!({"e": e, "c": rat(c)})).collect())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    /// `a · t ≤ b`.
    pub a: Vec<Q>,
    pub b: Q,
}

pub fn build_region(rows: &[RowSpec], d: usize) -> Result<Polyhedron> {
    let mut hs = Vec::with_capacity(rows.len());
    for r in rows {
        if r.a.len() != d {
            return bad(format!("half-space normal of length {} in dimension {d}", r.a.len()));
        }
        hs.push(Halfspace::new(rats(&r.a), r.b.0.clone()));
    }
    Ok(Polyhedron::new(d, hs))
}

pub fn region_json(p: &Polyhedron) -> Value {
    Value::Array(p.rows().iter().map(|h| json!({"a": rat_vec(&h.normal), "b": rat(&h.bound)})).collect())
}

// ---------------------------------------------------------------------------
// measures

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub pt: Vec<C>,
    pub w: Q,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeAtomSpec {
    pub pt: Vec<C>,
    pub dir: Vec<Q>,
    pub w: Q,
}

/// A density piece, either on a box of a stratum or on a parametrized polyhedron.
/// `frame: "u"` (default) writes `pol` and `quad` in chart coordinates, `frame: "t"` in
/// the piece parameters.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    #[serde(default)]
    pub stratum: Vec<usize>,
    #[serde(default, rename = "box")]
    pub bounds: Option<Vec<(Option<Q>, Option<Q>)>>,
    #[serde(default)]
    pub origin: Option<Vec<Q>>,
    #[serde(default)]
    pub directions: Option<Vec<Vec<Q>>>,
    #[serde(default)]
    pub region: Option<Vec<RowSpec>>,
    pub pol: Vec<TermSpec>,
    #[serde(default)]
    pub quad: Vec<TermSpec>,
    #[serde(default)]
    pub frame: Option<String>,
    #[serde(default)]
    pub sign: Option<String>,
}

impl PieceSpec {
    pub fn build(&self, n: usize) -> Result<Option<Piece>> {
        let stratum = to_mask(&self.stratum, n)?;
        let frame = self.frame.as_deref().unwrap_or("u");
        let sign = match self.sign.as_deref() {
            None | Some("+") => Sign::Plus,
            Some("-") => Sign::Minus,
            Some(s) => return bad(format!("unknown sign {s:?}")),
        };
        if let Some(b) = &self.bounds {
            if self.origin.is_some() || self.directions.is_some() || self.region.is_some() {
                return bad("a piece has either a box or origin/directions/region");
            }
            if frame != "u" || sign != Sign::Plus {
                return bad("box pieces take chart-coordinate densities without a sign");
            }
            if b.len() != n {
                return bad(format!("box of length {} for rank {n}", b.len()));
            }
            let bounds: Vec<_> = b.iter().map(|(l, h)| (l.as_ref().map(|x| x.0.clone()), h.as_ref().map(|x| x.0.clone()))).collect();
            let pol = build_poly(&self.pol, n)?;
            let quad = build_poly(&self.quad, n)?;
            return Ok(Piece::on_box(n, stratum, &bounds, &pol, &quad)?);
        }
        let (Some(o), Some(ds), Some(r)) = (&self.origin, &self.directions, &self.region) else {
            return bad("a piece needs a box or origin, directions and region");
        };
        let directions: Vec<Vec<Rational>> = ds.iter().map(|v| rats(v)).collect();
        let d = directions.len();
        let region = build_region(r, d)?;
        match frame {
            "u" => {
                if sign != Sign::Plus {
                    return bad("a sign is only given with frame \"t\"");
                }
                let pol = build_poly(&self.pol, n)?;
                let quad = build_poly(&self.quad, n)?;
                Ok(Piece::new(n, stratum, rats(o), directions, region, &pol, &quad)?)
            }
            "t" => {
                let pol = build_poly(&self.pol, d)?;
                let quad = build_poly(&self.quad, d)?;
                Ok(Piece::from_parametrized(n, stratum, rats(o), directions, region, pol, quad, sign)?)
            }
            f => bad(format!("unknown frame {f:?}")),
        }
    }
}

pub fn piece_json(p: &Piece) -> Value {
    json!({
        "stratum": index::one_based(p.stratum),
        "origin": rat_vec(&p.origin),
        "directions": p.directions.iter().map(|v| rat_vec(v)).collect::<Vec<_>>(),
        "region": region_json(&p.region),
        "frame": "t",
        "pol": poly_json(&p.density.pol),
        "quad": poly_json(&p.density.quad),
        "sign": if p.density.sign == Sign::Plus { "+" } else { "-" },
    })
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub pieces: Vec<PieceSpec>,
    #[serde(default)]
    pub derivative_atoms: Vec<DerivativeAtomSpec>,
}

impl MeasureSpec {
    pub fn build(&self, n: usize) -> Result<PieceMeasure> {
        let pt = |v: &[C]| -> Result<Vec<Coord>> {
            if v.len() != n {
                return bad(format!("point of length {} for rank {n}", v.len()));
            }
            Ok(v.iter().map(|c| c.0.clone()).collect())
        };
        let mut atoms = Vec::new();
        for a in &self.atoms {
            atoms.push(Atom { point: pt(&a.pt)?, weight: a.w.0.clone() });
        }
        let mut pieces = Vec::new();
        for p in &self.pieces {
            pieces.extend(p.build(n)?);
        }
        let mut ders = Vec::new();
        for a in &self.derivative_atoms {
            if a.dir.len() != n {
                return bad("derivative direction has the wrong length");
            }
            ders.push(DerivativeAtom { point: pt(&a.pt)?, direction: rats(&a.dir), weight: a.w.0.clone() });
        }
        Ok(PieceMeasure::from_parts(n, atoms, pieces, ders)?)
    }
}

pub fn measure_json(m: &PieceMeasure) -> Value {
    json!({
        "atoms": m.atoms().iter().map(|a| json!({"pt": coord_vec(&a.point), "w": rat(&a.weight)})).collect::<Vec<_>>(),
        "pieces": m.pieces().iter().map(piece_json).collect::<Vec<_>>(),
        "derivative_atoms": m.derivative_atoms().iter()
            .map(|a| json!({"pt": coord_vec(&a.point), "dir": rat_vec(&a.direction), "w": rat(&a.weight)}))
            .collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------------------
// currents

/// Co-coefficient key `"1,2|3,4"`; `"|"` is the pair of empty sets.
pub fn parse_key(key: &str, n: usize) -> Result<(Mask, Mask)> {
    let Some((a, b)) = key.split_once('|') else {
        return bad(format!("co-coefficient key {key:?} lacks '|'"));
    };
    let side = |s: &str| -> Result<Mask> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        if s.trim().is_empty() {
            return Ok(0);
        }
        let ix: std::result::Result<Vec<usize>, _> = s.split(',').map(|x| x.trim().parse::<usize>()).collect();
        to_mask(&ix.map_err(|_| FormatError(format!("bad index list in {key:?}")))?, n)
    };
    Ok((side(a)?, side(b)?))
}

pub fn key_json(i: Mask, j: Mask) -> String {
    let s = |m: Mask| index::one_based(m).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!("{}|{}", s(i), s(j))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentSpec {
    pub bidegree: (usize, usize),
    pub domain: DomainSpec,
    #[serde(default)]
    pub cocoeffs: BTreeMap<String, MeasureSpec>,
    #[serde(default)]
    pub evaluator: Option<String>,
    #[serde(default)]
    pub shadow: bool,
    #[serde(default)]
    pub kernel: Vec<String>,
}

/// A decoded current: Lagerberg, or an invariant complex current given by its shadows.
#[derive(Clone, Debug)]
pub enum AnyCurrent {
    Lagerberg(LagerbergCurrent),
    Shadow(InvariantComplexCurrent),
}

impl CurrentSpec {
    fn measures(&self, n: usize) -> Result<BTreeMap<(Mask, Mask), PieceMeasure>> {
        let mut m = BTreeMap::new();
        for (k, v) in &self.cocoeffs {
            let key = parse_key(k, n)?;
            if m.insert(key, v.build(n)?).is_some() {
                return bad(format!("co-coefficient {k:?} given twice"));
            }
        }
        Ok(m)
    }

    pub fn build(&self) -> Result<AnyCurrent> {
        let (p, p2) = self.bidegree;
        if p != p2 {
            return bad(format!("bidegree ({p},{p2}) is not of the form (p,p)"));
        }
        let domain = self.domain.build()?;
        let n = domain.n;
        if self.shadow {
            if self.evaluator.is_some() {
                return bad("shadow currents carry no evaluator");
            }
            let mut s = InvariantComplexCurrent::from_shadows(domain, p, self.measures(n)?)?;
            for k in &self.kernel {
                match k.as_str() {
                    "fixed_point_mass" => s = s.add(&InvariantComplexCurrent::fixed_point_mass()).map_err(|e| FormatError(format!("kernel exemplar: {e}")))?,
                    other => return bad(format!("unknown kernel exemplar {other:?}")),
                }
            }
            return Ok(AnyCurrent::Shadow(s));
        }
        if !self.kernel.is_empty() {
            return bad("kernel exemplars belong to shadow currents");
        }
        match self.evaluator.as_deref() {
            None => Ok(AnyCurrent::Lagerberg(LagerbergCurrent::new(domain, p, self.measures(n)?)?)),
            Some("double_exponential_derivative") => {
                if !self.cocoeffs.is_empty() {
                    return bad("an evaluator current has no co-coefficient measures");
                }
                if (n, p) != (1, 0) {
                    return bad("the double exponential derivative acts on (1,1)-forms on R");
                }
                Ok(AnyCurrent::Lagerberg(LagerbergCurrent::with_evaluator(domain, p, Evaluator::DoubleExponentialDerivative)))
            }
            Some(e) => bad(format!("unknown evaluator {e:?}")),
        }
    }
}

fn measures_json<'a>(it: impl Iterator<Item = (&'a (Mask, Mask), &'a PieceMeasure)>) -> Value {
    let mut m = serde_json::Map::new();
    for (&(i, j), mu) in it {
        m.insert(key_json(i, j), measure_json(mu));
    }
    Value::Object(m)
}

pub fn current_json(t: &LagerbergCurrent) -> Value {
    let mut v = json!({
        "bidegree": [t.p(), t.p()],
        "domain": domain_json(t.domain()),
        "cocoeffs": measures_json(t.cocoefficients()),
    });
    if let Some(Evaluator::DoubleExponentialDerivative) = t.evaluator() {
        v["evaluator"] = json!("double_exponential_derivative");
    }
    v
}

pub fn shadow_json(s: &InvariantComplexCurrent) -> Value {
    let mut v = json!({
        "bidegree": [s.p(), s.p()],
        "domain": domain_json(s.domain()),
        "cocoeffs": measures_json(s.shadows()),
        "shadow": true,
    });
    if !s.kernel().is_empty() {
        v["kernel"] = s.kernel().iter().map(|k| match k {
            KernelExemplar::FixedPointMass => json!("fixed_point_mass"),
        }).collect();
    }
    v
}

// ---------------------------------------------------------------------------
// fans and complexes

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    pub rank: usize,
    pub cones: Vec<Vec<Vec<i64>>>,
}

impl FanSpec {
    pub fn build(&self) -> Result<Fan> {
        Ok(validate_fan(self.rank, &self.cones)?)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub vertices: Vec<Vec<Q>>,
    #[serde(default)]
    pub rays: Vec<Vec<Q>>,
    pub weight: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub n: usize,
    pub cells: Vec<CellSpec>,
}

impl ComplexSpec {
    pub fn build(&self) -> Result<WeightedComplex> {
        let mut cells = Vec::new();
        for c in &self.cells {
            if c.vertices.is_empty() {
                return bad("a cell needs at least one vertex");
            }
            if c.vertices.iter().chain(&c.rays).any(|v| v.len() != self.n) {
                return bad(format!("cell generator outside R^{}", self.n));
            }
            cells.push(Cell::new(c.vertices.iter().map(|v| rats(v)).collect(), c.rays.iter().map(|v| rats(v)).collect(), c.weight));
        }
        if cells.is_empty() {
            return bad("a complex needs at least one cell");
        }
        Ok(WeightedComplex::new(self.n, cells)?)
    }
}

pub fn complex_json(c: &WeightedComplex) -> Value {
    json!({
        "n": c.n(),
        "cells": c.cells().iter().map(|cell| json!({
            "vertices": cell.vertices.iter().map(|v| rat_vec(v)).collect::<Vec<_>>(),
            "rays": cell.rays.iter().map(|v| rat_vec(v)).collect::<Vec<_>>(),
            "weight": cell.weight,
        })).collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------------------
// fiber forms

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(Q),
    Complex((Q, Q)),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormTermSpec {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub c: Scalar,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub n: usize,
    pub bidegree: (usize, usize),
    /// `"lagerberg"` (default) or `"complex"`.
    #[serde(default)]
    pub algebra: Option<String>,
    pub terms: Vec<FormTermSpec>,
}

#[derive(Clone, Debug)]
pub enum AnyForm {
    Lagerberg(LagerbergForm),
    Complex(ComplexForm),
}

impl FormSpec {
    pub fn build(&self) -> Result<AnyForm> {
        let (n, (p, qd)) = (self.n, self.bidegree);
        let keyed = |t: &FormTermSpec| -> Result<(Mask, Mask)> {
            let (i, j) = (to_mask(&t.i, n)?, to_mask(&t.j, n)?);
            if index::size(i) != p || index::size(j) != qd {
                return bad(format!("term {:?}|{:?} has the wrong bidegree", t.i, t.j));
            }
            Ok((i, j))
        };
        match self.algebra.as_deref().unwrap_or("lagerberg") {
            "lagerberg" => {
                let mut f = LagerbergForm::zero(n, p, qd);
                for t in &self.terms {
                    let (i, j) = keyed(t)?;
                    let Scalar::Real(c) = &t.c else { return bad("Lagerberg coefficients are real") };
                    f.add_term(i, j, c.0.clone())?;
                }
                Ok(AnyForm::Lagerberg(f))
            }
            "complex" => {
                let mut f = ComplexForm::zero(n, p, qd);
                for t in &self.terms {
                    let (i, j) = keyed(t)?;
                    let c = match &t.c {
                        Scalar::Real(c) => Gaussian::new(c.0.clone(), Rational::zero()),
                        Scalar::Complex((a, b)) => Gaussian::new(a.0.clone(), b.0.clone()),
                    };
                    f.add_term(i, j, c)?;
                }
                Ok(AnyForm::Complex(f))
            }
            a => bad(format!("unknown algebra {a:?}")),
        }
    }
}

pub fn form_json(f: &LagerbergForm) -> Value {
    let (p, qd) = f.bidegree();
    json!({
        "n": f.n(),
        "bidegree": [p, qd],
        "terms": f.terms().map(|(&(i, j), c)| json!({"i": mask(i), "j": mask(j), "c": rat(c)})).collect::<Vec<_>>(),
    })
}

pub fn complex_form_json(f: &ComplexForm) -> Value {
    let (p, qd) = f.bidegree();
    json!({
        "n": f.n(),
        "bidegree": [p, qd],
        "algebra": "complex",
        "terms": f.terms().map(|(&(i, j), c)| json!({"i": mask(i), "j": mask(j), "c": [rat(&c.re), rat(&c.im)]})).collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------------------
// form fields

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub axis: usize,
    pub profile: String,
    pub lo: Q,
    pub hi: Q,
    #[serde(default)]
    pub order: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientTermSpec {
    pub c: Q,
    #[serde(default)]
    pub powers: Option<Vec<u32>>,
    #[serde(default)]
    pub expo: Option<Vec<Q>>,
    #[serde(default)]
    pub factors: Vec<FactorSpec>,
}

pub fn build_coefficient(terms: &[CoefficientTermSpec], n: usize) -> Result<CoefficientFn> {
    let mut f = CoefficientFn::zero(n);
    for t in terms {
        let mut m = Monomial::one(n);
        if let Some(p) = &t.powers {
            if p.len() != n {
                return bad("power vector has the wrong length");
            }
            m.powers = p.clone();
        }
        if let Some(e) = &t.expo {
            if e.len() != n {
                return bad("exponent vector has the wrong length");
            }
            m.expo = rats(e);
        }
        for fs in &t.factors {
            if fs.axis == 0 || fs.axis > n {
                return bad(format!("factor axis {} outside 1..={n}", fs.axis));
            }
            let profile = match fs.profile.as_str() {
                "bump" => Profile::Bump,
                "rising" => Profile::Rising,
                "falling" => Profile::Falling,
                p => return bad(format!("unknown profile {p:?}")),
            };
            let mut a = AxisFactor::new(fs.axis - 1, profile, fs.lo.0.clone(), fs.hi.0.clone())?;
            a.order = fs.order;
            m.factors.push(a);
        }
        m.factors.sort();
        f = f.add(&CoefficientFn::term(t.c.0.clone(), m));
    }
    Ok(f)
}

pub fn coefficient_json(f: &CoefficientFn) -> Value {
    Value::Array(
        f.terms()
            .map(|(m, c)| {
                let mut t = json!({"c": rat(c)});
                if m.powers.iter().any(|&a| a > 0) {
                    t["powers"] = json!(m.powers);
                }
                if m.expo.iter().any(|x| !x.is_zero()) {
                    t["expo"] = rat_vec(&m.expo);
                }
                if !m.factors.is_empty() {
                    t["factors"] = m.factors.iter().map(|a| json!({
                        "axis": a.axis + 1,
                        "profile": match a.profile { Profile::Bump => "bump", Profile::Rising => "rising", Profile::Falling => "falling" },
                        "lo": rat(&a.lo),
                        "hi": rat(&a.hi),
                        "order": a.order,
                    })).collect();
                }
                t
            })
            .collect(),
    )
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTermSpec {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub coeff: Vec<CoefficientTermSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborhoodSpec {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub threshold: Vec<(usize, Q)>,
}

/// A form field on a chart. With `dense` only, boundary strata are filled in by limits;
/// with `strata` every stratum table and neighborhood is explicit.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub n: usize,
    #[serde(default)]
    pub k: usize,
    pub bidegree: (usize, usize),
    #[serde(default)]
    pub dense: Option<Vec<FieldTermSpec>>,
    #[serde(default)]
    pub strata: Option<BTreeMap<String, Vec<FieldTermSpec>>>,
    #[serde(default)]
    pub neighborhoods: Vec<NeighborhoodSpec>,
}

impl FieldSpec {
    fn table(&self, terms: &[FieldTermSpec]) -> Result<FormTable> {
        let (n, (p, qd)) = (self.n, self.bidegree);
        let mut t = FormTable::zero(n, p, qd);
        for term in terms {
            let (i, j) = (to_mask(&term.i, n)?, to_mask(&term.j, n)?);
            if index::size(i) != p || index::size(j) != qd {
                return bad(format!("term {:?}|{:?} has the wrong bidegree", term.i, term.j));
            }
            t.add_term(i, j, build_coefficient(&term.coeff, n)?);
        }
        Ok(t)
    }

    pub fn build(&self) -> Result<LagerbergFormField> {
        if self.k > self.n {
            return bad("more infinite axes than the rank");
        }
        match (&self.dense, &self.strata) {
            (Some(d), None) => {
                if !self.neighborhoods.is_empty() {
                    return bad("neighborhoods of a dense field are derived, not declared");
                }
                Ok(LagerbergFormField::from_dense(self.table(d)?, self.k)?)
            }
            (None, Some(s)) => {
                let mut strata = BTreeMap::new();
                for (key, terms) in s {
                    let ix: Vec<usize> = if key.trim().is_empty() {
                        Vec::new()
                    } else {
                        key.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| FormatError(format!("bad stratum key {key:?}")))?
                    };
                    strata.insert(to_mask(&ix, self.n)?, self.table(terms)?);
                }
                let mut hoods = Vec::new();
                for h in &self.neighborhoods {
                    let mut th = Vec::new();
                    for (a, v) in &h.threshold {
                        if *a == 0 || *a > self.n {
                            return bad("threshold axis out of range");
                        }
                        th.push((a - 1, v.0.clone()));
                    }
                    hoods.push(Neighborhood { from: to_mask(&h.from, self.n)?, to: to_mask(&h.to, self.n)?, threshold: th });
                }
                Ok(LagerbergFormField::from_strata(self.n, self.k, self.bidegree.0, self.bidegree.1, strata, hoods)?)
            }
            _ => bad("a field gives exactly one of \"dense\" and \"strata\""),
        }
    }
}

fn table_json(t: &FormTable) -> Value {
    Value::Array(t.terms().map(|(&(i, j), c)| json!({"i": mask(i), "j": mask(j), "coeff": coefficient_json(c)})).collect())
}

pub fn field_json(f: &LagerbergFormField) -> Value {
    let (p, qd) = f.bidegree();
    let mut strata = serde_json::Map::new();
    for (&l, t) in f.strata() {
        let key = index::one_based(l).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        strata.insert(key, table_json(t));
    }
    json!({
        "n": f.n(),
        "k": index::size(f.infinite_axes()),
        "bidegree": [p, qd],
        "strata": strata,
        "neighborhoods": f.neighborhoods().iter().map(|h| json!({
            "from": mask(h.from),
            "to": mask(h.to),
            "threshold": h.threshold.iter().map(|(a, v)| json!([a + 1, rat(v)])).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse<T: for<'de> Deserialize<'de>>(v: Value) -> T {
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn rationals_and_coords() {
        let v: Vec<Q> = parse(json!([3, "1/2", "-0.25"]));
        assert_eq!(rats(&v), vec![q(3), lagerberg_core::scalar::qf(1, 2), lagerberg_core::scalar::qf(-1, 4)]);
        let c: Vec<C> = parse(json!(["inf", 2]));
        assert_eq!(c[0].0, Coord::Inf);
        assert_eq!(rat(&lagerberg_core::scalar::qf(6, 4)), json!("3/2"));
        assert_eq!(rat(&q(-7)), json!(-7));
    }

    #[test]
    fn keys() {
        assert_eq!(parse_key("1,2|3", 3).unwrap(), (0b011, 0b100));
        assert_eq!(parse_key("|", 2).unwrap(), (0, 0));
        assert_eq!(key_json(0b101, 0), "1,3|");
        assert!(parse_key("1,4|2", 3).is_err());
        assert!(parse_key("12", 3).is_err());
    }

    #[test]
    fn domain_round_trip() {
        let s: DomainSpec = parse(json!({"n": 2, "k": 1, "lower": [null, "-1"], "excluded": [[1]]}));
        let d = s.build().unwrap();
        assert_eq!(d, Domain::chart(2, 1).with_lower(1, q(-1)).without(1));
        let back: DomainSpec = parse(domain_json(&d));
        assert_eq!(back.build().unwrap(), d);
    }

    #[test]
    fn piece_frames_agree() {
        let u: PieceSpec = parse(json!({
            "origin": [0, 0], "directions": [[1, 1]], "region": [{"a": [-1], "b": 0}, {"a": [1], "b": 2}],
            "pol": [{"e": [1, 0], "c": 1}]
        }));
        let p = u.build(2).unwrap().unwrap();
        let t: PieceSpec = parse(piece_json(&p));
        assert_eq!(t.build(2).unwrap().unwrap(), p);
    }

    #[test]
    fn current_round_trip() {
        let s: CurrentSpec = parse(json!({
            "bidegree": [1, 1],
            "domain": {"n": 2},
            "cocoeffs": {
                "1|1": {"pieces": [{"box": [["0", "1"], [null, null]], "stratum": [], "pol": [{"e": [0, 0], "c": 1}], "quad": [{"e": [0, 2], "c": -1}]}]},
                "2|2": {"atoms": [{"pt": [0, 0], "w": "1/3"}]}
            }
        }));
        let AnyCurrent::Lagerberg(t) = s.build().unwrap() else { panic!() };
        let back: CurrentSpec = parse(current_json(&t));
        let AnyCurrent::Lagerberg(t2) = back.build().unwrap() else { panic!() };
        assert_eq!(t, t2);
    }

    #[test]
    fn field_round_trip() {
        let s: FieldSpec = parse(json!({
            "n": 2, "k": 1, "bidegree": [1, 1],
            "dense": [{"i": [2], "j": [2], "coeff": [{"c": 2, "powers": [0, 1], "factors": [
                {"axis": 1, "profile": "rising", "lo": 0, "hi": 1},
                {"axis": 2, "profile": "bump", "lo": -1, "hi": 1}
            ]}]}]
        }));
        let f = s.build().unwrap();
        let back: FieldSpec = parse(field_json(&f));
        assert_eq!(back.build().unwrap(), f);
    }

    #[test]
    fn forms() {
        let s: FormSpec = parse(json!({"n": 2, "bidegree": [1, 1], "terms": [{"i": [1], "j": [1], "c": 1}, {"i": [2], "j": [2], "c": "1/2"}]}));
        let AnyForm::Lagerberg(f) = s.build().unwrap() else { panic!() };
        let back: FormSpec = parse(form_json(&f));
        let AnyForm::Lagerberg(g) = back.build().unwrap() else { panic!() };
        assert_eq!(f, g);
        let bad: FormSpec = parse(json!({"n": 2, "bidegree": [1, 1], "terms": [{"i": [1, 2], "j": [1], "c": 1}]}));
        assert!(bad.build().is_err());
    }
}
