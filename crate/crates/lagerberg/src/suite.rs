//! The counterexample suite and a seeded family of closed positive currents.

use std::collections::BTreeMap;

use lagerberg_core::complex::{Cell, WeightedComplex};
use lagerberg_core::correspondence::{lift, InvariantComplexCurrent};
use lagerberg_core::currents::{
    double_exponential_current, exponential_current, exponential_square_current, integration_current, weakly_positive_derivative,
    weakly_positive_lebesgue, ClosednessOptions, CurrentVerdict, LagerbergCurrent, PositivityOptions, PositivityWitness,
};
use lagerberg_core::index::Mask;
use lagerberg_core::measures::{Domain, PieceMeasure};
use lagerberg_core::poly::Poly;
use lagerberg_core::scalar::{q, qf, Coord, Rational};
use lagerberg_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::format::current_json;
use crate::witness;

/// One check of one example: what was expected and what came out.
#[derive(Clone, Debug)]
pub struct Check {
    pub example: &'static str,
    pub check: &'static str,
    pub expected: &'static str,
    pub got: String,
    pub details: Value,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.got == self.expected
    }

    pub fn to_json(&self) -> Value {
        json!({
            "example": self.example,
            "check": self.check,
            "expected": self.expected,
            "got": self.got,
            "passed": self.passed(),
            "details": self.details,
        })
    }
}

fn outcome<T>(r: lagerberg_core::Result<T>, f: impl FnOnce(T) -> (&'static str, Value)) -> (String, Value) {
    match r {
        Ok(v) => {
            let (s, d) = f(v);
            (s.to_string(), d)
        }
        Err(e) => ("error".to_string(), json!({"message": e.to_string()})),
    }
}

fn lift_outcome(t: &LagerbergCurrent, opts: &PositivityOptions) -> (String, Value) {
    match lift(t, opts) {
        Ok(_) => ("lifted".into(), Value::Null),
        Err(Error::NotPositive(why)) => ("rejected".into(), json!({"reason": "not positive", "message": why})),
        Err(Error::NotCFinite(w)) => ("rejected".into(), json!({"reason": "no C-finite mass", "witness": witness::ray_witness(&w)})),
        Err(e) => ("error".into(), json!({"message": e.to_string()})),
    }
}

fn witness_kind(v: &lagerberg_core::Result<CurrentVerdict>) -> String {
    match v {
        Ok(CurrentVerdict::NotPositive(w)) => match w {
            PositivityWitness::NotSymmetric { .. } => "not_symmetric",
            PositivityWitness::NonMeasure { .. } => "non_measure",
            PositivityWitness::NegativeDiagonal { .. } => "negative_diagonal",
            PositivityWitness::EstimateFails { .. } => "estimate_fails",
            PositivityWitness::Indefinite { .. } => "indefinite",
            PositivityWitness::NegativeTestForm { .. } => "negative_test_form",
        }
        .to_string(),
        Ok(_) => "none".to_string(),
        Err(_) => "error".to_string(),
    }
}

/// Runs every example against its known behaviour.
pub fn counterexamples(popts: &PositivityOptions, copts: &ClosednessOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |example, check, expected, (got, details): (String, Value)| {
        out.push(Check { example, check, expected, got, details });
    };

    let t = exponential_square_current();
    push("exponential_square", "positivity", "positive", outcome(t.positivity_check(popts), |v| witness::current_verdict(&v)));
    push("exponential_square", "c_finite", "infinite", outcome(t.c_finite_test(), |v| witness::c_finite(&v)));
    push("exponential_square", "closedness", "not_closed", outcome(t.closedness_test(copts), |v| witness::closedness(&v)));

    let t = exponential_current();
    push("exponential", "c_finite", "infinite", outcome(t.c_finite_test(), |v| witness::c_finite(&v)));

    let t = double_exponential_current();
    push("double_exponential_derivative", "closedness", "closed", outcome(t.closedness_test(copts), |v| witness::closedness(&v)));
    let v = t.positivity_check(popts);
    push("double_exponential_derivative", "witness", "negative_test_form", (witness_kind(&v), Value::Null));
    push("double_exponential_derivative", "positivity", "not_positive", outcome(v, |v| witness::current_verdict(&v)));
    push("double_exponential_derivative", "lift", "rejected", lift_outcome(&t, popts));

    let s = InvariantComplexCurrent::fixed_point_mass();
    push("fixed_point_mass", "shadow", "nonzero", ((if s.is_zero() { "zero" } else { "nonzero" }).into(), Value::Null));
    push(
        "fixed_point_mass",
        "push_forward",
        "zero",
        outcome(s.push_forward(), |t| (if t.is_zero() { "zero" } else { "nonzero" }, current_json(&t))),
    );

    let t = weakly_positive_lebesgue();
    let v = t.positivity_check(popts);
    push("weakly_positive_lebesgue", "witness", "estimate_fails", (witness_kind(&v), Value::Null));
    push("weakly_positive_lebesgue", "positivity", "not_positive", outcome(v, |v| witness::current_verdict(&v)));

    let t = weakly_positive_derivative();
    let v = t.positivity_check(popts);
    push("weakly_positive_derivative", "witness", "non_measure", (witness_kind(&v), Value::Null));
    push("weakly_positive_derivative", "positivity", "not_positive", outcome(v, |v| witness::current_verdict(&v)));
    out
}

// ---------------------------------------------------------------------------
// random closed positive currents

fn pt(v: &[Rational]) -> Vec<Rational> {
    v.to_vec()
}

fn small(rng: &mut ChaCha8Rng) -> Rational {
    qf(rng.gen_range(-6..=6), rng.gen_range(1..=2))
}

const DIRECTIONS: [(i64, i64); 8] = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (1, -2), (2, -1)];

/// Cells of a one-dimensional tropical cycle in `R²`: a translated tropical line or a
/// classical line split at a point.
fn curve_cells(rng: &mut ChaCha8Rng) -> Vec<Cell> {
    let c = vec![small(rng), small(rng)];
    let w = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        [(-1, 0), (0, -1), (1, 1)].iter().map(|&(a, b)| Cell::new(vec![pt(&c)], vec![vec![q(a), q(b)]], w)).collect()
    } else {
        let (a, b) = DIRECTIONS[rng.gen_range(0..DIRECTIONS.len())];
        [1, -1].iter().map(|&s| Cell::new(vec![pt(&c)], vec![vec![q(s * a), q(s * b)]], w)).collect()
    }
}

fn full_cells(n: usize, w: i64) -> Vec<Cell> {
    let origin = vec![Rational::from_integer(0.into()); n];
    let signs: Vec<Vec<i64>> = (0..1 << n).map(|s: usize| (0..n).map(|a| if s >> a & 1 == 1 { -1 } else { 1 }).collect()).collect();
    signs
        .iter()
        .map(|sg| {
            let rays = (0..n).map(|a| (0..n).map(|b| q(if a == b { sg[a] } else { 0 })).collect()).collect();
            Cell::new(vec![origin.clone()], rays, w)
        })
        .collect()
}

fn random_point(n: usize, stratum: Mask, rng: &mut ChaCha8Rng) -> Vec<Coord> {
    (0..n).map(|a| if stratum >> a & 1 == 1 { Coord::Inf } else { Coord::Fin(small(rng)) }).collect()
}

/// The whole stratum line `{u_a = ∞}` of a rank-2 chart, weight `w`, acting on
/// `(1,1)`-forms along the free axis.
fn stratum_line(axis: usize, w: i64) -> lagerberg_core::Result<(Mask, PieceMeasure)> {
    let free = 1 - axis;
    let mu = PieceMeasure::density(2, 1 << axis, &[(None, None), (None, None)], &Poly::constant(2, q(w)), &Poly::zero(2))?;
    Ok((1 << free, mu))
}

/// A random closed positive current with piece co-coefficients, possibly with mass on
/// boundary strata. Rank 1 or 2, charts with up to `n` infinite axes.
pub fn random_closed_positive(rng: &mut ChaCha8Rng) -> lagerberg_core::Result<LagerbergCurrent> {
    let n = rng.gen_range(1..=2usize);
    let k = rng.gen_range(0..=n);
    let dom = Domain::chart(n, k);
    let qd = rng.gen_range(0..=n);
    let p = n - qd;
    match qd {
        0 => {
            let strata = dom.strata();
            let mut mu = PieceMeasure::zero(n);
            for _ in 0..rng.gen_range(1..=3) {
                let l = strata[rng.gen_range(0..strata.len())];
                mu = mu.add(&PieceMeasure::dirac(random_point(n, l, rng), q(rng.gen_range(1..=5))))?;
            }
            if rng.gen_bool(0.5) {
                let lo = small(rng);
                let bounds: Vec<_> = (0..n).map(|_| (Some(lo.clone()), Some(&lo + q(1)))).collect();
                let pol = Poly::constant(n, q(1)).add(&Poly::var(n, 0).pow(2));
                mu = mu.add(&PieceMeasure::density(n, 0, &bounds, &pol, &Poly::zero(n))?)?;
            }
            LagerbergCurrent::new(dom, p, BTreeMap::from([((0, 0), mu)]))
        }
        _ if qd == n => integration_current(&WeightedComplex::new(n, full_cells(n, rng.gen_range(1..=3)))?, dom),
        _ => {
            // n = 2, curves
            let mut cells = Vec::new();
            for _ in 0..rng.gen_range(1..=2) {
                cells.extend(curve_cells(rng));
            }
            let mut t = integration_current(&WeightedComplex::new(2, cells)?, dom.clone())?;
            if k > 0 && rng.gen_bool(0.7) {
                let axis = rng.gen_range(0..k);
                let (i, mu) = stratum_line(axis, rng.gen_range(1..=3))?;
                t = t.add(&LagerbergCurrent::new(dom, p, BTreeMap::from([((i, i), mu)]))?)?;
            }
            Ok(t)
        }
    }
}

/// Candidates for the closed+positive filter: the family above plus perturbations that
/// break closedness (unbalanced weights, truncated densities) or positivity (negative weights).
pub fn random_candidate(rng: &mut ChaCha8Rng) -> lagerberg_core::Result<LagerbergCurrent> {
    match rng.gen_range(0..4) {
        0 => {
            let mut cells = curve_cells(rng);
            cells[0].weight += 1;
            integration_current(&WeightedComplex::new(2, cells)?, Domain::chart(2, rng.gen_range(0..=2)))
        }
        1 => {
            let lo = small(rng);
            let mu = PieceMeasure::density(1, 0, &[(Some(lo.clone()), Some(lo + q(2)))], &Poly::one(1), &Poly::zero(1))?;
            LagerbergCurrent::new(Domain::chart(1, 1), 0, BTreeMap::from([((1, 1), mu)]))
        }
        2 => random_closed_positive(rng)?.scale(&q(-1)),
        _ => random_closed_positive(rng),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
