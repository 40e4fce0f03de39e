use std::collections::BTreeMap;

use lagerberg_core::coeff::CoefficientFn;
use lagerberg_core::complex::{Cell, WeightedComplex};
use lagerberg_core::correspondence::{lift, round_trip_verify, InvariantComplexCurrent, RoundTrip};
use lagerberg_core::currents::{integration_current, CFinite, LagerbergCurrent, PositivityOptions};
use lagerberg_core::field::{FormTable, LagerbergFormField};
use lagerberg_core::index::{self, Mask};
use lagerberg_core::measures::{Domain, PieceMeasure};
use lagerberg_core::poly::Poly;
use lagerberg_core::scalar::{q, qf, Coord, Rational};
use lagerberg_core::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type F = CoefficientFn<Rational>;

fn small(rng: &mut ChaCha8Rng) -> Rational {
    qf(rng.gen_range(-4..=4), rng.gen_range(1..=2))
}

/// Positive currents of every bidegree on a chart of rank 1 or 2; `open` keeps all mass on
/// the dense stratum.
fn positive_current(rng: &mut ChaCha8Rng, open: bool) -> LagerbergCurrent {
    let n = rng.gen_range(1..=2usize);
    let k = rng.gen_range(0..=n);
    let dom = if open { Domain::torus(n, k) } else { Domain::chart(n, k) };
    let d = rng.gen_range(0..=n);
    if d == 0 {
        let strata = dom.strata();
        let mut mu = PieceMeasure::zero(n);
        for _ in 0..rng.gen_range(1..=3) {
            let l = strata[rng.gen_range(0..strata.len())];
            let pt = (0..n).map(|a| if l >> a & 1 == 1 { Coord::Inf } else { Coord::Fin(small(rng)) }).collect();
            mu = mu.add(&PieceMeasure::dirac(pt, q(rng.gen_range(1..=4)))).unwrap();
        }
        let lo = small(rng);
        let b: Vec<_> = (0..n).map(|_| (Some(lo.clone()), Some(&lo + q(1)))).collect();
        mu = mu.add(&PieceMeasure::density(n, 0, &b, &Poly::constant(n, q(1)).add(&Poly::var(n, 0).pow(2)), &Poly::zero(n)).unwrap()).unwrap();
        return LagerbergCurrent::new(dom, n, BTreeMap::from([((0, 0), mu)])).unwrap();
    }
    let c: Vec<Rational> = (0..n).map(|_| small(rng)).collect();
    let w = rng.gen_range(1..=3);
    let cells: Vec<Cell> = if d == n {
        // the whole space, cut into orthants at c
        (0..1usize << n)
            .map(|s| {
                let rays = (0..n).map(|a| (0..n).map(|b| q(if a == b { if s >> a & 1 == 1 { -1 } else { 1 } } else { 0 })).collect()).collect();
                Cell::new(vec![c.clone()], rays, w)
            })
            .collect()
    } else {
        // a tropical line at c
        [(-1, 0), (0, -1), (1, 1)].iter().map(|&(a, b)| Cell::new(vec![c.clone()], vec![vec![q(a), q(b)]], w)).collect()
    };
    integration_current(&WeightedComplex::new(n, cells).unwrap(), dom).unwrap()
}

/// A `(q,q)` test form with bump coefficients supported in the dense stratum.
fn test_form(t: &LagerbergCurrent, rng: &mut ChaCha8Rng) -> LagerbergFormField {
    let (n, qd) = (t.n(), t.q());
    let subs = index::subsets(n, qd);
    let mut terms: Vec<((Mask, Mask), F)> = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let b: Vec<(Rational, Rational)> = (0..n).map(|_| { let lo = rng.gen_range(-3..=1); (q(lo), q(lo + rng.gen_range(2..=4))) }).collect();
        let f = F::bump_box(&b).unwrap().mul(&F::constant(n, q(rng.gen_range(-3..=3))).add(&F::coordinate(n, rng.gen_range(0..n))));
        terms.push(((subs[rng.gen_range(0..subs.len())], subs[rng.gen_range(0..subs.len())]), f));
    }
    LagerbergFormField::dense(FormTable::from_terms(n, qd, qd, terms).unwrap(), t.domain().k)
}

fn opts(seed: u64) -> PositivityOptions {
    PositivityOptions { seed, ..Default::default() }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn currents_are_the_sum_of_their_cocoefficients(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = positive_current(&mut rng, false);
        let alpha = test_form(&t, &mut rng);
        let whole = t.evaluate(&alpha, 1e-10).unwrap().value;
        let mut sum = 0.0;
        for (&ij, mu) in t.cocoefficients() {
            let single = LagerbergCurrent::new(t.domain().clone(), t.p(), BTreeMap::from([(ij, mu.clone())])).unwrap();
            sum += single.evaluate(&alpha, 1e-10).unwrap().value;
        }
        prop_assert!(close(whole, sum), "{} vs {}", whole, sum);
        let rebuilt = LagerbergCurrent::new(t.domain().clone(), t.p(), t.cocoefficients().map(|(k, m)| (*k, m.clone())).collect()).unwrap();
        prop_assert_eq!(rebuilt.cocoefficients().collect::<Vec<_>>(), t.cocoefficients().collect::<Vec<_>>());
    }

    #[test]
    fn decomposition_sums_to_the_current_and_ignores_piece_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = positive_current(&mut rng, false);
        let parts = t.canonical_decomposition().unwrap();
        let mut sum = LagerbergCurrent::zero(t.domain().clone(), t.p());
        for (&l, part) in &parts {
            prop_assert!(part.strata().iter().all(|&s| s == l));
            sum = sum.add(part).unwrap();
        }
        prop_assert_eq!(sum.cocoefficients().collect::<Vec<_>>(), t.cocoefficients().collect::<Vec<_>>());
        let shuffled: BTreeMap<(Mask, Mask), PieceMeasure> = t
            .cocoefficients()
            .map(|(k, m)| {
                let mut atoms = m.atoms().to_vec();
                let mut pieces = m.pieces().to_vec();
                atoms.shuffle(&mut rng);
                pieces.shuffle(&mut rng);
                (*k, PieceMeasure::from_parts(m.n(), atoms, pieces, m.derivative_atoms().to_vec()).unwrap())
            })
            .collect();
        let t2 = LagerbergCurrent::new(t.domain().clone(), t.p(), shuffled).unwrap();
        prop_assert_eq!(t2.canonical_decomposition().unwrap(), parts);
    }

    #[test]
    fn extension_by_zero_is_undone_by_restriction(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = positive_current(&mut rng, true);
        let target = Domain::chart(t.n(), t.domain().k);
        match t.c_finite_test_in(&target).unwrap() {
            CFinite::Finite => {
                let e = t.extend_by_zero(&target).unwrap();
                prop_assert!(e.strata().iter().all(|&l| l == 0));
                let back = e.restrict_to(t.domain()).unwrap();
                prop_assert_eq!(back.cocoefficients().collect::<Vec<_>>(), t.cocoefficients().collect::<Vec<_>>());
            }
            CFinite::Infinite { .. } => prop_assert!(matches!(t.extend_by_zero(&target), Err(Error::NotCFinite(_)))),
            CFinite::Undecided(_) => {}
        }
    }

    #[test]
    fn positive_currents_are_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = positive_current(&mut rng, false);
        prop_assert!(t.positivity_check(&opts(seed)).unwrap().is_positive());
        let alpha = test_form(&t, &mut rng);
        let a = t.evaluate(&alpha, 1e-10).unwrap().value;
        let b = t.evaluate(&alpha.involution_j(), 1e-10).unwrap().value;
        let s = if t.q() % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(close(b, s * a), "{} vs {}", b, s * a);
    }

    #[test]
    fn lifting_succeeds_exactly_on_c_finite_currents(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = positive_current(&mut rng, false);
        let finite = t.c_finite_test().unwrap();
        let s = lift(&t, &opts(seed));
        match finite {
            CFinite::Finite => {
                let s = s.unwrap();
                let back = s.push_forward().unwrap();
                prop_assert_eq!(back.cocoefficients().collect::<Vec<_>>(), t.cocoefficients().collect::<Vec<_>>());
                prop_assert!(back.positivity_check(&opts(seed)).unwrap().is_positive());
            }
            CFinite::Infinite { .. } => prop_assert!(matches!(s, Err(Error::NotCFinite(_)))),
            CFinite::Undecided(_) => prop_assert!(s.is_err()),
        }
        let neg = t.scale(&q(-1)).unwrap();
        prop_assert!(matches!(lift(&neg, &opts(seed)), Err(Error::NotPositive(_))));
    }

    #[test]
    fn positive_shadows_push_forward_to_positive_currents(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = positive_current(&mut rng, false);
        let scale = q(4).pow(t.q() as i32) * qf(rng.gen_range(1..=5), rng.gen_range(1..=3));
        let shadows = t.cocoefficients().map(|(k, m)| (*k, m.scale(&scale))).collect();
        let s = InvariantComplexCurrent::from_shadows(t.domain().clone(), t.p(), shadows).unwrap();
        prop_assert!(s.push_forward().unwrap().positivity_check(&opts(seed)).unwrap().is_positive());
    }
}

#[test]
fn dense_currents_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let suite: Vec<LagerbergCurrent> = (0..16).map(|_| positive_current(&mut rng, true)).collect();
    for (t, r) in suite.iter().zip(round_trip_verify(&suite, &PositivityOptions::default())) {
        match t.c_finite_test().unwrap() {
            CFinite::Finite => assert_eq!(r, RoundTrip::Exact, "{t:?}"),
            _ => assert!(matches!(r, RoundTrip::Failed(_))),
        }
    }
}
