//! Verdicts, certificates and witnesses as report values.

use lagerberg_core::complex::{describe, Balancing};
use lagerberg_core::currents::{CFinite, Closedness, CurrentVerdict, Differential, Location, PositivityWitness};
use lagerberg_core::error::RayWitness;
use lagerberg_core::positivity::{Answer, Certificate, PositivityVerdict, Tier, Witness};
use lagerberg_core::scalar::Gaussian;
use lagerberg_core::Rational;
use serde_json::{json, Value};

use crate::format::{coord_vec, field_json, key_json, mask, rat, rat_vec};

pub fn tier_name(t: Tier) -> &'static str {
    match t {
        Tier::Strong => "strong",
        Tier::Positive => "positive",
        Tier::Weak => "weak",
    }
}

pub fn parse_tier(s: &str) -> Option<Tier> {
    match s {
        "strong" => Some(Tier::Strong),
        "positive" => Some(Tier::Positive),
        "weak" => Some(Tier::Weak),
        _ => None,
    }
}

pub fn gaussian(z: &Gaussian) -> Value {
    json!([rat(&z.re), rat(&z.im)])
}

fn scaled<S>(v: &[(Rational, Vec<S>)], sv: &dyn Fn(&S) -> Value, w: &str, x: &str) -> Value {
    v.iter().map(|(d, l)| json!({ w: rat(d), x: l.iter().map(sv).collect::<Vec<_>>() })).collect()
}

/// `(verdict, details)` for a fiber-form positivity verdict.
pub fn form_verdict<F, S>(v: &PositivityVerdict<F, S>, fv: &dyn Fn(&F) -> Value, sv: &dyn Fn(&S) -> Value) -> (&'static str, Value) {
    let tier = tier_name(v.tier);
    match &v.answer {
        Answer::Yes(c) => {
            let cert = match c {
                Certificate::GramFactors(f) => json!({"kind": "gram_factors", "factors": scaled(f, sv, "d", "l")}),
                Certificate::Decomposables(f) => json!({"kind": "decomposables", "terms": scaled(f, sv, "w", "xi")}),
                Certificate::PluckerShift { multipliers, residual } => json!({
                    "kind": "plucker_shift",
                    "multipliers": rat_vec(multipliers),
                    "residual": scaled(residual, sv, "d", "l"),
                }),
            };
            ("yes", json!({"tier": tier, "certificate": cert}))
        }
        Answer::No(w) => {
            let wit = match w {
                Witness::NotSymmetric => json!({"kind": "not_symmetric"}),
                Witness::NegativeDirection { direction, value, dual, pairing } => json!({
                    "kind": "negative_direction",
                    "direction": direction.iter().map(sv).collect::<Vec<_>>(),
                    "value": rat(value),
                    "dual": fv(dual),
                    "pairing": rat(pairing),
                }),
                Witness::NegativeDecomposable { direction, value, dual, pairing } => json!({
                    "kind": "negative_decomposable",
                    "direction": direction.iter().map(sv).collect::<Vec<_>>(),
                    "value": rat(value),
                    "dual": fv(dual),
                    "pairing": rat(pairing),
                }),
                Witness::NoDecomposableInRange { multipliers, dual, pairing } => json!({
                    "kind": "no_decomposable_in_range",
                    "multipliers": rat_vec(multipliers),
                    "dual": fv(dual),
                    "pairing": rat(pairing),
                }),
            };
            ("no", json!({"tier": tier, "witness": wit}))
        }
        Answer::Unknown => ("unknown", json!({"tier": tier})),
    }
}

pub fn location(l: &Location) -> Value {
    match l {
        Location::Atom(p) => json!({"atom": coord_vec(p)}),
        Location::Piece { stratum, point } => json!({"stratum": mask(*stratum), "point": rat_vec(point)}),
    }
}

pub fn positivity_witness(w: &PositivityWitness) -> Value {
    match w {
        PositivityWitness::NotSymmetric { i, j } => json!({"kind": "not_symmetric", "cocoeff": key_json(*i, *j)}),
        PositivityWitness::NonMeasure { i, j } => json!({"kind": "non_measure", "cocoeff": key_json(*i, *j)}),
        PositivityWitness::NegativeDiagonal { i } => json!({"kind": "negative_diagonal", "cocoeff": key_json(*i, *i)}),
        PositivityWitness::EstimateFails { i, j, at } => json!({"kind": "estimate_fails", "cocoeff": key_json(*i, *j), "at": location(at)}),
        PositivityWitness::Indefinite { at, direction } => json!({
            "kind": "indefinite",
            "at": location(at),
            "direction": direction.iter().map(|(m, x)| json!({"index": mask(*m), "x": rat(x)})).collect::<Vec<_>>(),
        }),
        PositivityWitness::NegativeTestForm { form, value } => json!({"kind": "negative_test_form", "value": value, "form": field_json(form)}),
    }
}

pub fn current_verdict(v: &CurrentVerdict) -> (&'static str, Value) {
    match v {
        CurrentVerdict::Positive => ("positive", Value::Null),
        CurrentVerdict::NotPositive(w) => ("not_positive", json!({"witness": positivity_witness(w)})),
        CurrentVerdict::Unknown(why) => ("unknown", json!({"reason": why})),
    }
}

pub fn differential_name(d: Differential) -> &'static str {
    match d {
        Differential::First => "first",
        Differential::Second => "second",
    }
}

pub fn closedness(c: &Closedness) -> (&'static str, Value) {
    match c {
        Closedness::Closed { max_relative_residual, tests, exact } => {
            ("closed", json!({"max_relative_residual": max_relative_residual, "tests": tests, "exact": exact}))
        }
        Closedness::NotClosed { witness, differential, residual } => (
            "not_closed",
            json!({"differential": differential_name(*differential), "residual": residual, "witness": field_json(witness)}),
        ),
    }
}

pub fn ray_witness(w: &RayWitness) -> Value {
    json!({"density": w.density, "target_stratum": mask(w.target_stratum), "ray": rat_vec(&w.ray)})
}

pub fn c_finite(c: &CFinite) -> (&'static str, Value) {
    match c {
        CFinite::Finite => ("finite", Value::Null),
        CFinite::Infinite { i, j, witness } => ("infinite", json!({"cocoeff": key_json(*i, *j), "witness": ray_witness(witness)})),
        CFinite::Undecided(why) => ("undecided", json!({"reason": why})),
    }
}

pub fn balancing(b: &Balancing) -> (&'static str, Value) {
    match b {
        Balancing::Balanced => ("balanced", Value::Null),
        Balancing::Unbalanced { face, residual } => ("unbalanced", json!({"face": describe(face), "residual": rat_vec(residual)})),
    }
}
