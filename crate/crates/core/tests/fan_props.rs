use lagerberg_core::fan::{chart_transition, validate_fan, CompactifiedPoint, Fan, LatticeVector};
use lagerberg_core::linalg;
use lagerberg_core::scalar::{q, qf, Rational};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn p2() -> Fan {
    validate_fan(2, &[vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![-1, -1]], vec![vec![-1, -1], vec![1, 0]]]).unwrap()
}

fn p1_squared() -> Fan {
    let c = |a: [i64; 2], b: [i64; 2]| vec![a.to_vec(), b.to_vec()];
    validate_fan(2, &[c([1, 0], [0, 1]), c([0, 1], [-1, 0]), c([-1, 0], [0, -1]), c([0, -1], [1, 0])]).unwrap()
}

fn p3() -> Fan {
    let rays: [LatticeVector; 4] = [vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1]];
    let cones: Vec<Vec<LatticeVector>> = (0..4).map(|skip| (0..4).filter(|&i| i != skip).map(|i| rays[i].clone()).collect()).collect();
    validate_fan(3, &cones).unwrap()
}

fn fans() -> Vec<Fan> {
    vec![p2(), p1_squared(), p3()]
}

fn rat() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=4).prop_map(|(a, b)| qf(a, b))
}

/// Solves `Σ c_k g_k = v` by elimination; `None` if inconsistent.
fn coefficients(gens: &[LatticeVector], v: &[Rational]) -> Option<Vec<Rational>> {
    let r = v.len();
    let k = gens.len();
    let mut m: Vec<Vec<Rational>> = (0..r).map(|i| gens.iter().map(|g| q(g[i])).chain([v[i].clone()]).collect()).collect();
    let mut row = 0;
    let mut pivots = Vec::new();
    for c in 0..k {
        let Some(p) = (row..r).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(row, p);
        let piv = m[row][c].clone();
        for x in m[row].iter_mut() {
            *x /= &piv;
        }
        for i in 0..r {
            if i != row && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let src = m[row].clone();
                for (x, y) in m[i].iter_mut().zip(&src) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    if (row..r).any(|i| !m[i][k].is_zero()) {
        return None;
    }
    let mut out = vec![Rational::zero(); k];
    for (i, &c) in pivots.iter().enumerate() {
        out[c] = m[i][k].clone();
    }
    Some(out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn limit_point_ignores_shifts_along_the_cone(f in 0usize..3, p in prop::collection::vec(rat(), 3), v in prop::collection::vec(-3i64..=3, 3), w in prop::collection::vec(rat(), 3)) {
        let fan = &fans()[f];
        let r = fan.rank();
        let (p, v) = (&p[..r], v[..r].iter().map(|&x| q(x)).collect::<Vec<_>>());
        let x = fan.limit_point(p, &v).unwrap();
        let sigma = fan.locate_relint(&v).unwrap();
        let gens = &fan.cone(sigma).unwrap().generators;
        let mut shifted = p.to_vec();
        for (g, c) in gens.iter().zip(&w) {
            for (s, gi) in shifted.iter_mut().zip(g) {
                *s += c * q(*gi);
            }
        }
        prop_assert_eq!(fan.limit_point(&shifted, &v).unwrap(), x);
    }

    #[test]
    fn stratum_projections_compose(f in 0usize..3, p in prop::collection::vec(rat(), 3)) {
        let fan = &fans()[f];
        let p = &p[..fan.rank()];
        for sigma in 0..fan.len() {
            for &tau in fan.faces(sigma).unwrap() {
                for &ups in fan.faces(tau).unwrap() {
                    let x = fan.project_to_stratum(ups, p).unwrap();
                    let via = fan.stratum_projection(sigma, tau, &fan.stratum_projection(tau, ups, &x).unwrap()).unwrap();
                    prop_assert_eq!(via, fan.stratum_projection(sigma, ups, &x).unwrap());
                }
            }
        }
    }

    #[test]
    fn every_direction_lies_in_exactly_one_relative_interior(f in 0usize..3, v in prop::collection::vec(-4i64..=4, 3)) {
        let fan = &fans()[f];
        let v: Vec<Rational> = v[..fan.rank()].iter().map(|&x| q(x)).collect();
        let holders: Vec<usize> = (0..fan.len())
            .filter(|&s| {
                let gens = &fan.cone(s).unwrap().generators;
                match coefficients(gens, &v) {
                    Some(c) => c.iter().all(|x| x.is_positive()) || (gens.is_empty() && v.iter().all(Zero::is_zero)),
                    None => false,
                }
            })
            .collect();
        prop_assert_eq!(holders.len(), 1);
        prop_assert_eq!(holders[0], fan.locate_relint(&v).unwrap());
        let x = fan.limit_point(&vec![q(0); fan.rank()], &v).unwrap();
        prop_assert_eq!(x.stratum, holders[0]);
    }

    #[test]
    fn charts_round_trip_points(f in 0usize..3, p in prop::collection::vec(rat(), 3)) {
        let fan = &fans()[f];
        let p = &p[..fan.rank()];
        for sigma in 0..fan.len() {
            let x = fan.project_to_stratum(sigma, p).unwrap();
            let back = fan.project_to_stratum(sigma, &fan.lift(&x).unwrap()).unwrap();
            prop_assert_eq!(&back, &x);
            let CompactifiedPoint { stratum, .. } = back;
            prop_assert_eq!(stratum, sigma);
        }
    }
}

#[test]
fn chart_changes_are_unimodular() {
    for fan in fans() {
        let charts: Vec<_> = fan.maximal_cones().into_iter().map(|s| fan.toric_chart(s).unwrap()).collect();
        for a in &charts {
            for b in &charts {
                let t = chart_transition(a, b);
                assert!(t.iter().flatten().all(|x| x.is_integer()));
                assert_eq!(linalg::det(&t).abs(), q(1));
            }
        }
    }
}

#[test]
fn projective_plane_limit_lies_above_the_point() {
    let fan = p2();
    let p = vec![qf(3, 2), q(-7)];
    let x = fan.limit_point(&p, &[q(0), q(1)]).unwrap();
    assert_eq!(fan.cone(x.stratum).unwrap().generators, vec![vec![0, 1]]);
    assert_eq!(x.coords, vec![qf(3, 2)]);
    let corner = fan.limit_point(&p, &[q(1), q(1)]).unwrap();
    assert_eq!(fan.cone(corner.stratum).unwrap().dim(), 2);
    assert!(corner.coords.is_empty());
}
