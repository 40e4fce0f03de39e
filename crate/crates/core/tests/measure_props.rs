use lagerberg_core::coeff::CoefficientFn;
use lagerberg_core::index::Mask;
use lagerberg_core::measures::PieceMeasure;
use lagerberg_core::poly::Poly;
use lagerberg_core::scalar::{q, qf, Coord, Rational};
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type F = CoefficientFn<Rational>;

fn bounded_box(n: usize, rng: &mut ChaCha8Rng) -> Vec<(Option<Rational>, Option<Rational>)> {
    (0..n)
        .map(|_| {
            let lo = rng.gen_range(-3..=2);
            (Some(q(lo)), Some(q(lo + rng.gen_range(1..=3))))
        })
        .collect()
}

fn poly(n: usize, rng: &mut ChaCha8Rng) -> Poly {
    let mut p = Poly::constant(n, qf(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
    for _ in 0..rng.gen_range(0..=2) {
        let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        p.add_term(e, q(rng.gen_range(-2..=2)));
    }
    p
}

/// `±(c + Σ even monomials)`, which keeps one sign everywhere.
fn signed_weight(n: usize, rng: &mut ChaCha8Rng) -> Poly {
    let mut p = Poly::constant(n, qf(rng.gen_range(1..=3), rng.gen_range(1..=2)));
    for _ in 0..rng.gen_range(0..=2) {
        let e: Vec<u32> = (0..n).map(|_| 2 * rng.gen_range(0..=1)).collect();
        p.add_term(e, q(rng.gen_range(0..=2)));
    }
    if rng.gen_bool(0.5) { p.scale(&q(-1)) } else { p }
}

/// Signed combination of Dirac masses and polynomial densities on bounded boxes.
fn measure(n: usize, rng: &mut ChaCha8Rng) -> PieceMeasure {
    let mut m = PieceMeasure::zero(n);
    for _ in 0..rng.gen_range(0..=2) {
        let pt = (0..n).map(|_| Coord::Fin(qf(rng.gen_range(-6..=6), 2))).collect();
        m = m.add(&PieceMeasure::dirac(pt, q(rng.gen_range(-3..=3)))).unwrap();
    }
    for _ in 0..rng.gen_range(0..=2) {
        let b = bounded_box(n, rng);
        m = m.add(&PieceMeasure::density(n, 0, &b, &signed_weight(n, rng), &Poly::zero(n)).unwrap()).unwrap();
    }
    m
}

fn test_fn(n: usize, rng: &mut ChaCha8Rng) -> F {
    F::from_polynomial(&poly(n, rng))
}

fn exact(m: &PieceMeasure, f: &F) -> Rational {
    m.exact_integral(&|_: Mask| f.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn integration_is_bilinear(seed in any::<u64>(), c in -5i64..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let (mu, nu) = (measure(n, &mut rng), measure(n, &mut rng));
        let (f, g) = (test_fn(n, &mut rng), test_fn(n, &mut rng));
        let c = q(c);
        prop_assert_eq!(exact(&mu.add(&nu).unwrap(), &f), exact(&mu, &f) + exact(&nu, &f));
        prop_assert_eq!(exact(&mu.scale(&c), &f), &c * exact(&mu, &f));
        prop_assert_eq!(exact(&mu, &f.add(&g.scale(&c))), exact(&mu, &f) + &c * exact(&mu, &g));
        prop_assert_eq!(exact(&mu.neg(), &f), -exact(&mu, &f));
    }

    #[test]
    fn addition_and_scaling_are_consistent(seed in any::<u64>(), a in -4i64..=4, b in -4i64..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let mu = measure(n, &mut rng);
        let f = test_fn(n, &mut rng);
        let (a, b) = (q(a), q(b));
        let lhs = mu.scale(&a).add(&mu.scale(&b)).unwrap();
        prop_assert_eq!(exact(&lhs, &f), exact(&mu.scale(&(&a + &b)), &f));
        prop_assert!(mu.add(&mu.neg()).unwrap().is_zero() || exact(&mu.add(&mu.neg()).unwrap(), &f) == q(0));
        prop_assert_eq!(mu.scale(&a).scale(&b), mu.scale(&(&a * &b)));
    }

    #[test]
    fn quadrature_matches_exact_integrals(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let mu = measure(n, &mut rng);
        let f = test_fn(n, &mut rng);
        let x = lagerberg_core::scalar::to_f64(&exact(&mu, &f));
        let y = mu.integrate_measure(&f, 1e-10).unwrap();
        prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()), "{} vs {}", x, y);
    }

    #[test]
    fn total_variation_adds_over_disjoint_boxes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        // unit cubes along the first axis never overlap
        let mut mu = PieceMeasure::zero(n);
        let mut expected = q(0);
        for k in 0..rng.gen_range(1..=4) {
            let w = q(rng.gen_range(-5..=5));
            let b: Vec<_> = (0..n).map(|a| if a == 0 { (Some(q(2 * k)), Some(q(2 * k + 1))) } else { (Some(q(0)), Some(q(1))) }).collect();
            expected += w.abs();
            mu = mu.add(&PieceMeasure::lebesgue(&b, w).unwrap()).unwrap();
        }
        let one = F::constant(n, q(1));
        let tv = mu.total_variation().unwrap();
        prop_assert!(tv.is_positive() || tv.is_zero());
        prop_assert_eq!(exact(&tv, &one), expected);
        let (pos, neg) = mu.total_variation_decompose().unwrap();
        prop_assert_eq!(exact(&pos, &one) - exact(&neg, &one), exact(&mu, &one));
    }
}
