use lagerberg_core::fiber::{ComplexForm, LagerbergForm};
use lagerberg_core::index::{self, Mask};
use lagerberg_core::positivity::{complex_positivity_verdict, positivity_verdict, Tier, VerdictOptions};
use lagerberg_core::scalar::{q, qf, Gaussian, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gi(re: i64, im: i64) -> Gaussian {
    Gaussian::new(q(re), q(im))
}

fn lagerberg(n: usize, p: usize, qd: usize, rng: &mut ChaCha8Rng) -> LagerbergForm {
    let (si, sj) = (index::subsets(n, p), index::subsets(n, qd));
    let terms: Vec<((Mask, Mask), Rational)> = (0..rng.gen_range(0..=4))
        .map(|_| ((si[rng.gen_range(0..si.len())], sj[rng.gen_range(0..sj.len())]), qf(rng.gen_range(-5..=5), rng.gen_range(1..=3))))
        .collect();
    LagerbergForm::from_terms(n, p, qd, terms).unwrap()
}

fn complex(n: usize, p: usize, qd: usize, rng: &mut ChaCha8Rng) -> ComplexForm {
    let (si, sj) = (index::subsets(n, p), index::subsets(n, qd));
    let terms: Vec<((Mask, Mask), Gaussian)> = (0..rng.gen_range(0..=4))
        .map(|_| ((si[rng.gen_range(0..si.len())], sj[rng.gen_range(0..sj.len())]), gi(rng.gen_range(-4..=4), rng.gen_range(-4..=4))))
        .collect();
    ComplexForm::from_terms(n, p, qd, terms).unwrap()
}

fn shape(rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
    let n = rng.gen_range(1..=4);
    (n, rng.gen_range(0..=n), rng.gen_range(0..=n))
}

/// Symmetric Gram matrix with small integer entries, of either sign.
fn symmetric(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Rational>> {
    let mut m = vec![vec![q(0); d]; d];
    for _ in 0..rng.gen_range(1..=3) {
        let s = if rng.gen_bool(0.7) { 1 } else { -1 };
        let v: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
        for a in 0..d {
            for b in 0..d {
                m[a][b] += q(s * v[a] * v[b]);
            }
        }
    }
    m
}

fn i_pow(k: usize) -> Gaussian {
    [gi(1, 0), gi(0, 1), gi(-1, 0), gi(0, -1)][k % 4].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let (p1, q1) = (rng.gen_range(0..=n), rng.gen_range(0..=n));
        let (p2, q2) = (rng.gen_range(0..=n - p1), rng.gen_range(0..=n - q1));
        let a = lagerberg(n, p1, q1, &mut rng);
        let b = lagerberg(n, p2, q2, &mut rng);
        let sign = if (p1 + q1) * (p2 + q2) % 2 == 0 { q(1) } else { q(-1) };
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().scale(&sign));
    }

    #[test]
    fn involutions_square_to_the_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, p, qd) = shape(&mut rng);
        let a = lagerberg(n, p, qd, &mut rng);
        prop_assert_eq!(a.involution_j().involution_j(), a);
        let c = complex(n, p, qd, &mut rng);
        prop_assert_eq!(c.conjugate().conjugate(), c.clone());
        prop_assert_eq!(c.involution_f().involution_f(), c.clone());
        let sign = gi(if (p + qd) % 2 == 0 { 1 } else { -1 }, 0);
        prop_assert_eq!(c.involution_f().conjugate(), c.conjugate().involution_f().scale(&sign));
    }

    #[test]
    fn embedding_is_multiplicative_and_lands_in_the_f_fixed_part(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let (p1, q1) = (rng.gen_range(0..=n), rng.gen_range(0..=n));
        let (p2, q2) = (rng.gen_range(0..=n - p1), rng.gen_range(0..=n - q1));
        let a = lagerberg(n, p1, q1, &mut rng);
        let b = lagerberg(n, p2, q2, &mut rng);
        prop_assert_eq!(a.wedge(&b).unwrap().embed(), a.embed().wedge(&b.embed()).unwrap());
        prop_assert_eq!(a.embed().involution_f(), a.embed());
        prop_assert_eq!(a.embed().to_lagerberg(), Some(a.clone()));
        prop_assert_eq!(a.involution_j().embed(), a.embed().conjugate().scale(&i_pow(p1 + q1)));
        // the F-fixed part of any complex form comes from a Lagerberg form
        let c = complex(n, p1, q1, &mut rng);
        let fixed = c.add(&c.involution_f()).unwrap();
        prop_assert!(fixed.to_lagerberg().is_some());
        let moved = c.sub(&c.involution_f()).unwrap();
        prop_assert!(moved.is_zero() || moved.to_lagerberg().is_none());
    }

    #[test]
    fn positivity_agrees_with_the_embedding(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let p = rng.gen_range(0..=n);
        let a = LagerbergForm::from_gram(n, p, &symmetric(index::subsets(n, p).len(), &mut rng));
        let real = positivity_verdict(&a, Tier::Positive, &VerdictOptions::default()).unwrap();
        let cplx = complex_positivity_verdict(&a.embed(), Tier::Positive).unwrap();
        prop_assert_eq!(real.is_yes(), cplx.is_yes());
        prop_assert_eq!(real.is_no(), cplx.is_no());
    }

    #[test]
    fn f_preserves_every_tier(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let p = rng.gen_range(0..=n);
        let d = index::subsets(n, p).len();
        let mut m = vec![vec![gi(0, 0); d]; d];
        for _ in 0..rng.gen_range(1..=3) {
            let s = if rng.gen_bool(0.7) { 1 } else { -1 };
            let v: Vec<Gaussian> = (0..d).map(|_| gi(rng.gen_range(-2..=2), rng.gen_range(-2..=2))).collect();
            for a in 0..d {
                for b in 0..d {
                    m[a][b] = m[a][b].clone() + v[a].clone() * v[b].conj() * gi(s, 0);
                }
            }
        }
        let c = ComplexForm::from_gram(n, p, &m);
        for tier in [Tier::Strong, Tier::Positive, Tier::Weak] {
            let x = complex_positivity_verdict(&c, tier).unwrap();
            let y = complex_positivity_verdict(&c.involution_f(), tier).unwrap();
            if !x.is_unknown() && !y.is_unknown() {
                prop_assert_eq!(x.is_yes(), y.is_yes());
            }
        }
    }

    #[test]
    fn stronger_tiers_imply_weaker_ones(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=4);
        let p = rng.gen_range(1..n);
        let a = LagerbergForm::from_gram(n, p, &symmetric(index::subsets(n, p).len(), &mut rng));
        let o = VerdictOptions { pool_size: 300, seed, ..Default::default() };
        let strong = positivity_verdict(&a, Tier::Strong, &o).unwrap();
        let positive = positivity_verdict(&a, Tier::Positive, &o).unwrap();
        let weak = positivity_verdict(&a, Tier::Weak, &o).unwrap();
        if strong.is_yes() {
            prop_assert!(!positive.is_no());
        }
        if positive.is_yes() {
            prop_assert!(!weak.is_no());
        }
        if weak.is_no() {
            prop_assert!(!positive.is_yes() && !strong.is_yes());
        }
    }

    #[test]
    fn strong_generators_satisfy_the_linear_relation(a in prop::collection::vec((-9i64..=9, 1i64..=5), 4), b in prop::collection::vec((-9i64..=9, 1i64..=5), 4)) {
        let one = |c: &[(i64, i64)]| LagerbergForm::first_kind(4, 1, &c.iter().map(|&(x, y)| qf(x, y)).collect::<Vec<_>>());
        let (x, y) = (one(&a), one(&b));
        let w = x.wedge(&x.involution_j()).unwrap().wedge(&y.wedge(&y.involution_j()).unwrap()).unwrap();
        // coefficient of the interleaved word d′u_i∧d″u_j∧d′u_k∧d″u_l, i < k and j < l
        let word = |i: usize, j: usize, k: usize, l: usize| -w.coeff(1 << (i - 1) | 1 << (k - 1), 1 << (j - 1) | 1 << (l - 1));
        prop_assert_eq!(word(1, 3, 2, 4) - word(1, 2, 3, 4) + word(1, 2, 4, 3), q(0));
    }

    #[test]
    fn gram_matrices_are_symmetric_or_hermitian(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, p, _) = shape(&mut rng);
        let a = lagerberg(n, p, p, &mut rng);
        let sym = a.add(&a.involution_j().scale(&q(if p % 2 == 0 { 1 } else { -1 }))).unwrap();
        prop_assert!(sym.is_symmetric());
        let g = sym.gram().unwrap();
        for (r, row) in g.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                prop_assert_eq!(v, &g[c][r]);
            }
        }
        let c = complex(n, p, p, &mut rng);
        let real = c.add(&c.conjugate()).unwrap();
        prop_assert!(real.is_real());
        let h = real.gram().unwrap();
        for (r, row) in h.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                prop_assert_eq!(v, &h[c][r].conj());
            }
        }
    }

    #[test]
    fn positive_forms_pair_nonnegatively(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let p = rng.gen_range(0..=n);
        let psd = |d: usize, rng: &mut ChaCha8Rng| {
            let v: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
            let u: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
            (0..d).map(|i| (0..d).map(|j| q(v[i] * v[j] + u[i] * u[j])).collect()).collect::<Vec<Vec<Rational>>>()
        };
        let a = LagerbergForm::from_gram(n, p, &psd(index::subsets(n, p).len(), &mut rng));
        let b = LagerbergForm::from_gram(n, n - p, &psd(index::subsets(n, n - p).len(), &mut rng));
        prop_assert!(a.dual_pairing(&b).unwrap() >= q(0));
    }
}

#[test]
fn embedding_dimension_count() {
    // every (I, J) basis element maps to a nonzero multiple of dz_I ∧ dz̄_J, so the image
    // has the full dimension 2^{2n} over the reals
    for n in 1..=4 {
        let mut count = 0;
        for p in 0..=n {
            for qd in 0..=n {
                for &i in &index::subsets(n, p) {
                    for &j in &index::subsets(n, qd) {
                        let e = LagerbergForm::from_terms(n, p, qd, [((i, j), q(1))]).unwrap().embed();
                        assert_eq!(e.terms().count(), 1);
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 1 << (2 * n));
    }
}
