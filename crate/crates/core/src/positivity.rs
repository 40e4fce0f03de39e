//! Strong, positive and weak positivity of `(p,p)`-forms at a fiber.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fiber::{ComplexForm, LagerbergForm};
use crate::index::{self, merge_sign};
use crate::linalg::{self, Definiteness, Mat};
use crate::plucker::{self, Decision, Quadric};
use crate::scalar::{block_sign, q, ComplexScalar, Gaussian, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tier {
    Strong,
    Positive,
    Weak,
}

/// Data proving membership; every variant re-verifies exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate<S> {
    /// `|a| = Σ d_k l_k l_k*` with `d_k > 0`.
    GramFactors(Vec<(Rational, Vec<S>)>),
    /// `a = Σ w_k (-1)^{p(p-1)/2} ξ_k ∧ J ξ_k` with decomposable `ξ_k` and `w_k > 0`.
    Decomposables(Vec<(Rational, Vec<S>)>),
    /// `|a| − Σ c_k R_k` is positive semidefinite for Plücker quadrics `R_k`,
    /// so `|a|` is nonnegative on every decomposable vector.
    PluckerShift { multipliers: Vec<Rational>, residual: Vec<(Rational, Vec<S>)> },
}

/// Data refuting membership. `dual` lies in the dual cone and pairs negatively with the form.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness<F, S> {
    NotSymmetric,
    /// `x* |a| x < 0`.
    NegativeDirection { direction: Vec<S>, value: Rational, dual: F, pairing: Rational },
    /// Same, with a decomposable direction.
    NegativeDecomposable { direction: Vec<S>, value: Rational, dual: F, pairing: Rational },
    /// A combination of Plücker quadrics is definite on the range of `|a|`, so no
    /// nonzero decomposable vector lies there; `dual` is that combination, which
    /// vanishes on all strongly positive forms.
    NoDecomposableInRange { multipliers: Vec<Rational>, dual: F, pairing: Rational },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Answer<F, S> {
    Yes(Certificate<S>),
    No(Witness<F, S>),
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositivityVerdict<F, S> {
    pub tier: Tier,
    pub answer: Answer<F, S>,
}

pub type LagerbergVerdict = PositivityVerdict<LagerbergForm, Rational>;
pub type ComplexVerdict = PositivityVerdict<ComplexForm, Gaussian>;

impl<F, S> PositivityVerdict<F, S> {
    pub fn is_yes(&self) -> bool {
        matches!(self.answer, Answer::Yes(_))
    }
    pub fn is_no(&self) -> bool {
        matches!(self.answer, Answer::No(_))
    }
    pub fn is_unknown(&self) -> bool {
        matches!(self.answer, Answer::Unknown)
    }
    pub fn decision(&self) -> Decision {
        match self.answer {
            Answer::Yes(_) => Decision::Yes,
            Answer::No(_) => Decision::No,
            Answer::Unknown => Decision::Unknown,
        }
    }
}

/// Tunables for the strong and weak tiers.
#[derive(Clone, Debug)]
pub struct VerdictOptions {
    pub pool_size: usize,
    pub seed: u64,
    /// Extra decomposable `(p,0)` coefficient vectors offered to the strong tier and the weak pool.
    pub hints: Vec<Vec<Rational>>,
    /// Plücker multipliers for the weak tier; derived by projection when absent.
    pub dual_certificate: Option<Vec<Rational>>,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions { pool_size: 10_000, seed: 0, hints: Vec::new(), dual_certificate: None }
    }
}

/// Sign `ε` with `d′u_K ∧ d′u_{K^c} = ε d′u_{[n]}`.
fn complement_sign(n: usize, k: u32) -> i64 {
    merge_sign(k, index::full(n) & !k)
}

/// The `(n−p, n−p)`-form `η` whose pairing with any `(p,p)`-form `a` is `tr(|a| Q)`.
/// Rank-one `Q = x xᵀ` gives `η = s β ∧ Jβ` for a `β` built from `x`.
pub fn dual_of_quadratic(n: usize, p: usize, qm: &[Vec<Rational>]) -> LagerbergForm {
    let subs = index::subsets(n, p);
    let full = index::full(n);
    let qd = n - p;
    let s = block_sign(qd);
    let mut terms = Vec::new();
    for (a, &ka) in subs.iter().enumerate() {
        for (b, &kb) in subs.iter().enumerate() {
            if qm[a][b].is_zero() {
                continue;
            }
            let sign = s * complement_sign(n, ka) * complement_sign(n, kb);
            terms.push(((full & !ka, full & !kb), qm[a][b].clone().signed(sign)));
        }
    }
    LagerbergForm::from_terms(n, qd, qd, terms).expect("complementary indices")
}

/// Complex counterpart of [`dual_of_quadratic`] for a Hermitian `Q`.
pub fn complex_dual_of_quadratic(n: usize, p: usize, qm: &[Vec<Gaussian>]) -> ComplexForm {
    let subs = index::subsets(n, p);
    let full = index::full(n);
    let qd = n - p;
    let f = Gaussian::i_pow(qd as i64).signed(block_sign(qd));
    let mut terms = Vec::new();
    for (a, &ka) in subs.iter().enumerate() {
        for (b, &kb) in subs.iter().enumerate() {
            if qm[a][b].is_zero() {
                continue;
            }
            let sign = complement_sign(n, ka) * complement_sign(n, kb);
            terms.push(((full & !ka, full & !kb), (qm[b][a].clone() * f.clone()).signed(sign)));
        }
    }
    ComplexForm::from_terms(n, qd, qd, terms).expect("complementary indices")
}

fn outer(x: &[Rational]) -> Mat {
    x.iter().map(|a| x.iter().map(|b| a * b).collect()).collect()
}

fn outer_c(x: &[Gaussian]) -> Vec<Vec<Gaussian>> {
    x.iter().map(|a| x.iter().map(|b| a.clone() * linalg::StarField::star(b)).collect()).collect()
}

fn is_symmetric_matrix(m: &[Vec<Rational>]) -> bool {
    (0..m.len()).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

fn is_hermitian_matrix(m: &[Vec<Gaussian>]) -> bool {
    (0..m.len()).all(|i| (0..=i).all(|j| m[i][j] == linalg::StarField::star(&m[j][i])))
}

fn check_square<A, S>(a: &crate::fiber::FiberForm<A, S>) -> Result<usize>
where
    A: crate::fiber::Algebra,
    S: Scalar,
{
    let (p, qd) = a.bidegree();
    if p != qd {
        return Err(Error::NotSquareBidegree(p, qd));
    }
    Ok(p)
}

fn negative_direction(a: &LagerbergForm, p: usize, x: Vec<Rational>, value: Rational, decomposable: bool) -> Witness<LagerbergForm, Rational> {
    let dual = dual_of_quadratic(a.n(), p, &outer(&x));
    let pairing = a.dual_pairing(&dual).expect("complementary");
    if decomposable {
        Witness::NegativeDecomposable { direction: x, value, dual, pairing }
    } else {
        Witness::NegativeDirection { direction: x, value, dual, pairing }
    }
}

/// Three-tier positivity verdict for a Lagerberg `(p,p)`-form with exact coefficients.
pub fn positivity_verdict(a: &LagerbergForm, tier: Tier, opts: &VerdictOptions) -> Result<LagerbergVerdict> {
    let p = check_square(a)?;
    let answer = match tier {
        Tier::Positive => positive_tier(a, p),
        Tier::Strong => strong_tier(a, p, opts),
        Tier::Weak => weak_tier(a, p, opts),
    };
    Ok(PositivityVerdict { tier, answer })
}

fn positive_tier(a: &LagerbergForm, p: usize) -> Answer<LagerbergForm, Rational> {
    let m = a.gram().expect("square");
    if !is_symmetric_matrix(&m) {
        return Answer::No(Witness::NotSymmetric);
    }
    match linalg::ldl_psd(&m) {
        Definiteness::Psd { factors } => Answer::Yes(Certificate::GramFactors(factors)),
        Definiteness::Indefinite { witness, value } => {
            Answer::No(negative_direction(a, p, witness, value, false))
        }
    }
}

fn extreme_degree(n: usize, p: usize) -> bool {
    p <= 1 || p + 1 >= n
}

fn strong_tier(a: &LagerbergForm, p: usize, opts: &VerdictOptions) -> Answer<LagerbergForm, Rational> {
    let n = a.n();
    let factors = match positive_tier(a, p) {
        Answer::Yes(Certificate::GramFactors(f)) => f,
        other => return other,
    };
    if extreme_degree(n, p) || factors.is_empty() {
        return Answer::Yes(Certificate::Decomposables(factors));
    }
    let m = a.gram().expect("square");
    let basis = column_basis(&m);
    let rels = plucker::relations(n, p);
    if let Some(c) = definite_on_range(&rels, &basis) {
        let combo = plucker::combination(m.len(), &rels, &c);
        // sign the combination so that it pairs negatively with `a`
        let trace = trace_product(&m, &combo);
        let (c, combo) = if trace.is_positive() {
            (c.iter().map(|v| -v.clone()).collect(), combo.iter().map(|r| r.iter().map(|v| -v.clone()).collect()).collect::<Mat>())
        } else {
            (c, combo)
        };
        let dual = dual_of_quadratic(n, p, &combo);
        let pairing = a.dual_pairing(&dual).expect("complementary");
        return Answer::No(Witness::NoDecomposableInRange { multipliers: c, dual, pairing });
    }
    // candidate decomposables inside the range of |a|
    let kernel = linalg::nullspace(&m, m.len());
    let in_range = |x: &Vec<Rational>| kernel.iter().all(|k| linalg::dot(k, x).is_zero());
    let mut pool: Vec<Vec<Rational>> = Vec::new();
    let push = |x: Vec<Rational>, pool: &mut Vec<Vec<Rational>>| {
        if x.iter().any(|v| !v.is_zero()) && in_range(&x) && !pool.contains(&x) {
            pool.push(x);
        }
    };
    let dim = m.len();
    for k in 0..dim {
        let mut e = vec![Rational::zero(); dim];
        e[k] = Rational::one();
        push(e, &mut pool);
    }
    for h in &opts.hints {
        if h.len() == dim && plucker::is_decomposable(n, p, h) == Decision::Yes {
            push(h.clone(), &mut pool);
        }
    }
    for (_, l) in &factors {
        if plucker::is_decomposable(n, p, l) == Decision::Yes {
            push(l.clone(), &mut pool);
        }
    }
    for x in basis.iter() {
        if plucker::is_decomposable(n, p, x) == Decision::Yes {
            push(x.clone(), &mut pool);
        }
    }
    match conic_decomposition(&m, &pool) {
        Some(parts) => Answer::Yes(Certificate::Decomposables(parts)),
        None => Answer::Unknown,
    }
}

fn trace_product(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Rational {
    let mut s = Rational::zero();
    for i in 0..a.len() {
        for j in 0..a.len() {
            if !a[i][j].is_zero() && !b[j][i].is_zero() {
                s += &a[i][j] * &b[j][i];
            }
        }
    }
    s
}

/// Basis of the column space of a symmetric matrix.
fn column_basis(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let (r, pivots) = linalg::rref(&linalg::transpose(m));
    let _ = r;
    pivots.iter().map(|&c| m.iter().map(|row| row[c].clone()).collect()).collect()
}

fn restrict(r: &Quadric, basis: &[Vec<Rational>]) -> Mat {
    let rb: Vec<Vec<Rational>> = basis.iter().map(|v| linalg::mat_vec(r, v)).collect();
    basis.iter().map(|u| rb.iter().map(|w| linalg::dot(u, w)).collect()).collect()
}

/// Multipliers of a single relation or a sum/difference of two that is definite on `span(basis)`.
fn definite_on_range(rels: &[Quadric], basis: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    if basis.is_empty() {
        return None;
    }
    let restricted: Vec<Mat> = rels.iter().map(|r| restrict(r, basis)).collect();
    let definite = |m: &Mat| {
        linalg::is_positive_definite(m) || {
            let neg: Mat = m.iter().map(|r| r.iter().map(|v| -v.clone()).collect()).collect();
            linalg::is_positive_definite(&neg)
        }
    };
    let k = rels.len();
    for i in 0..k {
        if definite(&restricted[i]) {
            let mut c = vec![Rational::zero(); k];
            c[i] = Rational::one();
            return Some(c);
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            for s in [1i64, -1] {
                let m: Mat = restricted[i]
                    .iter()
                    .zip(&restricted[j])
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * q(s)).collect())
                    .collect();
                if definite(&m) {
                    let mut c = vec![Rational::zero(); k];
                    c[i] = Rational::one();
                    c[j] = q(s);
                    return Some(c);
                }
            }
        }
    }
    None
}

/// Solves `M = Σ w_k x_k x_kᵀ`, `w ≥ 0` over the pool by linear programming.
fn conic_decomposition(m: &[Vec<Rational>], pool: &[Vec<Rational>]) -> Option<Vec<(Rational, Vec<Rational>)>> {
    if pool.is_empty() {
        return None;
    }
    let dim = m.len();
    let mut rows: Mat = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            rows.push(pool.iter().map(|x| &x[i] * &x[j]).collect());
            rhs.push(m[i][j].clone());
        }
    }
    let c = vec![Rational::zero(); pool.len()];
    match linalg::simplex(&rows, &rhs, &c) {
        linalg::LpResult::Optimal { x, .. } => Some(
            x.into_iter()
                .zip(pool)
                .filter(|(w, _)| !w.is_zero())
                .map(|(w, v)| (w, v.clone()))
                .collect(),
        ),
        _ => None,
    }
}

/// Seeded decomposable `(p,0)` coefficient vectors with small integer factors.
pub fn random_decomposables(n: usize, p: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let vs: Vec<Vec<Rational>> =
                (0..p).map(|_| (0..n).map(|_| q(rng.gen_range(-3..=3))).collect()).collect();
            plucker::wedge_of_vectors(n, &vs)
        })
        .collect()
}

fn weak_tier(a: &LagerbergForm, p: usize, opts: &VerdictOptions) -> Answer<LagerbergForm, Rational> {
    let n = a.n();
    let m = a.gram().expect("square");
    if !is_symmetric_matrix(&m) {
        return Answer::No(Witness::NotSymmetric);
    }
    let psd = linalg::ldl_psd(&m);
    if let Definiteness::Psd { factors } = psd {
        return Answer::Yes(Certificate::GramFactors(factors));
    }
    if extreme_degree(n, p) {
        if let Definiteness::Indefinite { witness, value } = psd {
            return Answer::No(negative_direction(a, p, witness, value, true));
        }
    }
    let dim = m.len();
    let mut pool: Vec<Vec<Rational>> = (0..dim)
        .map(|k| {
            let mut e = vec![Rational::zero(); dim];
            e[k] = Rational::one();
            e
        })
        .collect();
    pool.extend(opts.hints.iter().filter(|h| h.len() == dim).cloned());
    pool.extend(random_decomposables(n, p, opts.pool_size, opts.seed));
    for x in pool {
        let v = plucker::evaluate(&m, &x);
        if v.is_negative() && plucker::is_decomposable(n, p, &x) == Decision::Yes {
            return Answer::No(negative_direction(a, p, x, v, true));
        }
    }
    let rels = plucker::relations(n, p);
    let c = match &opts.dual_certificate {
        Some(c) if c.len() == rels.len() => c.clone(),
        Some(_) => return Answer::Unknown,
        None => plucker::project(&m, &rels),
    };
    let shift = plucker::combination(dim, &rels, &c);
    let residual: Mat = m.iter().zip(&shift).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect();
    match linalg::ldl_psd(&residual) {
        Definiteness::Psd { factors } => Answer::Yes(Certificate::PluckerShift { multipliers: c, residual: factors }),
        Definiteness::Indefinite { .. } => Answer::Unknown,
    }
}

/// Positivity verdict for a complex `(p,p)`-form with Gaussian-rational coefficients.
/// Strong and weak tiers are decided only where they coincide with the positive tier.
pub fn complex_positivity_verdict(a: &ComplexForm, tier: Tier) -> Result<ComplexVerdict> {
    let p = check_square(a)?;
    let n = a.n();
    let m = a.gram()?;
    let answer = if !is_hermitian_matrix(&m) {
        Answer::No(Witness::NotSymmetric)
    } else {
        match linalg::ldl_psd(&m) {
            Definiteness::Psd { factors } => match tier {
                Tier::Strong if !extreme_degree(n, p) => Answer::Unknown,
                Tier::Strong => Answer::Yes(Certificate::Decomposables(factors)),
                _ => Answer::Yes(Certificate::GramFactors(factors)),
            },
            Definiteness::Indefinite { witness, value } => match tier {
                Tier::Weak if !extreme_degree(n, p) => Answer::Unknown,
                _ => {
                    let dual = complex_dual_of_quadratic(n, p, &outer_c(&witness));
                    let pairing = a.dual_pairing(&dual)?.re;
                    Answer::No(Witness::NegativeDirection { direction: witness, value, dual, pairing })
                }
            },
        }
    };
    Ok(PositivityVerdict { tier, answer })
}

/// Positive-tier test for floating-point coefficients: eigenvalues of `|a|`
/// must be at least `−tol·‖|a|‖`.
pub fn is_positive_f64(a: &LagerbergForm<f64>, tol: f64) -> Result<bool> {
    let m = a.gram()?;
    let norm = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let sym = (0..m.len()).all(|i| (0..i).all(|j| (m[i][j] - m[j][i]).abs() <= tol * norm.max(1.0)));
    if !sym {
        return Ok(false);
    }
    let ev = linalg::symmetric_eigenvalues(&m);
    Ok(ev.iter().all(|&l| l >= -tol * norm.max(f64::MIN_POSITIVE)))
}

fn first_coord(n: usize, i: usize) -> LagerbergForm {
    let mut c = vec![q(0); n];
    c[i - 1] = q(1);
    LagerbergForm::first_kind(n, 1, &c)
}

fn jcoord(n: usize, i: usize) -> LagerbergForm {
    first_coord(n, i).involution_j()
}

/// Product of generators `d′u_i ∧ d″u_j ∧ d′u_k ∧ d″u_l` in the written order.
pub fn interleaved(n: usize, i: usize, j: usize, k: usize, l: usize) -> LagerbergForm {
    let w = first_coord(n, i).wedge(&jcoord(n, j)).and_then(|w| w.wedge(&first_coord(n, k))).and_then(|w| w.wedge(&jcoord(n, l)));
    w.expect("four one-forms")
}

/// Weakly positive `(2,2)`-form on `R^4` that is not positive.
pub fn weak_not_positive_form() -> LagerbergForm {
    let t = [
        (3, 1, 4, 2, 1),
        (2, 1, 4, 3, -1),
        (2, 1, 3, 4, 1),
        (1, 3, 2, 4, 1),
        (1, 2, 3, 4, -1),
        (1, 2, 4, 3, 1),
    ];
    let mut w = LagerbergForm::zero(4, 2, 2);
    for (i, j, k, l, s) in t {
        w = w.add(&interleaved(4, i, j, k, l).scale(&q(s))).expect("same bidegree");
    }
    w
}
