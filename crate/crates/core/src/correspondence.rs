//! Torus-invariant complex currents through their shadows on the tropical side.
//!
//! The shadow of a co-coefficient is `σ^{IJ}(f) = S^{IJ}(z^{−I} z̄^{−J} · trop*(f))`. Shadows are
//! stored divided by `π^q`, so every normalization in this module is rational:
//! `trop_*(S)^{IJ} = 4^{−q} · stored^{IJ}`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::currents::{CFinite, CurrentVerdict, LagerbergCurrent, Location, PositivityOptions, PositivityWitness};
use crate::error::{Error, Result};
use crate::index::{self, Mask};
use crate::measures::{stratum_of, Domain, PieceMeasure, Restriction};
use crate::scalar::{q, Coord, Rational};

/// Invariant currents that have no shadow: they are annihilated by `trop_*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelExemplar {
    /// `f dz ∧ i dz̄ ↦ f(0)` on `P¹`: a positive point mass at the torus-fixed point.
    FixedPointMass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantComplexCurrent {
    domain: Domain,
    p: usize,
    shadows: BTreeMap<(Mask, Mask), PieceMeasure>,
    kernel: Vec<KernelExemplar>,
}

fn four_pow(qd: usize) -> Rational {
    q(4).pow(qd as i32)
}

impl InvariantComplexCurrent {
    /// Shadows given divided by `π^q`.
    pub fn from_shadows(domain: Domain, p: usize, shadows: BTreeMap<(Mask, Mask), PieceMeasure>) -> Result<Self> {
        // same shape constraints as Lagerberg co-coefficients
        let t = LagerbergCurrent::new(domain.clone(), p, shadows).map_err(|e| Error::InvalidShadow(format!("{e}")))?;
        let shadows = t.cocoefficients().map(|(k, v)| (*k, v.clone())).collect();
        Ok(InvariantComplexCurrent { domain, p, shadows, kernel: Vec::new() })
    }

    pub fn zero(domain: Domain, p: usize) -> Self {
        InvariantComplexCurrent { domain, p, shadows: BTreeMap::new(), kernel: Vec::new() }
    }

    /// The point mass at `0 ∈ P¹` acting on `(1,1)`-forms.
    pub fn fixed_point_mass() -> Self {
        InvariantComplexCurrent { domain: Domain::chart(1, 1), p: 0, shadows: BTreeMap::new(), kernel: vec![KernelExemplar::FixedPointMass] }
    }

    /// Top-degree current whose only shadow is `μ` (a measure pairing with functions).
    pub fn haar_shadow(domain: Domain, mu: PieceMeasure) -> Result<Self> {
        let n = domain.n;
        Self::from_shadows(domain, n, BTreeMap::from([((0, 0), mu)]))
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.domain.n - self.p
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Stored shadow `σ^{IJ}/π^q`.
    pub fn shadow(&self, i: Mask, j: Mask) -> PieceMeasure {
        self.shadows.get(&(i, j)).cloned().unwrap_or_else(|| PieceMeasure::zero(self.n()))
    }

    pub fn shadows(&self) -> impl Iterator<Item = (&(Mask, Mask), &PieceMeasure)> {
        self.shadows.iter()
    }

    pub fn kernel(&self) -> &[KernelExemplar] {
        &self.kernel
    }

    pub fn is_zero(&self) -> bool {
        self.shadows.is_empty() && self.kernel.is_empty()
    }

    fn as_lagerberg(&self) -> Result<LagerbergCurrent> {
        LagerbergCurrent::new(self.domain.clone(), self.p, self.shadows.clone())
    }

    /// `trop_*(S)`: `T^{IJ} = π^{−q} 2^{−2q} σ^{IJ}`; kernel exemplars vanish.
    pub fn push_forward(&self) -> Result<LagerbergCurrent> {
        let raw = self.as_lagerberg()?;
        match raw.c_finite_test()? {
            CFinite::Finite => {}
            CFinite::Infinite { i, j, witness } => {
                return Err(Error::InvalidShadow(format!(
                    "shadow {}|{} weighted by e^(-u_I-u_J) is not locally finite along {:?}",
                    index::label(i),
                    index::label(j),
                    witness.ray
                )))
            }
            CFinite::Undecided(why) => return Err(Error::InvalidShadow(why)),
        }
        raw.scale(&(Rational::one() / four_pow(self.q())))
    }

    /// Restriction of every shadow to one stratum.
    pub fn stratum_part(&self, l: Mask) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (&ij, mu) in &self.shadows {
            let r = mu.restrict(&Restriction::Stratum(l))?;
            if !r.is_zero() {
                m.insert(ij, r);
            }
        }
        Ok(InvariantComplexCurrent { domain: self.domain.clone(), p: self.p, shadows: m, kernel: Vec::new() })
    }

    pub fn strata(&self) -> BTreeSet<Mask> {
        self.shadows.values().flat_map(|m| m.strata()).collect()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let t = self.as_lagerberg()?.add(&o.as_lagerberg()?)?;
        let mut s = InvariantComplexCurrent::from_shadows(self.domain.clone(), self.p, t.cocoefficients().map(|(k, v)| (*k, v.clone())).collect())?;
        s.kernel = self.kernel.iter().chain(&o.kernel).cloned().collect();
        Ok(s)
    }
}

/// Invariant current with `trop_*(S) = T` for a positive `T` with C-finite mass, assembled from
/// the stratum summands of `T`.
pub fn lift(t: &LagerbergCurrent, opts: &PositivityOptions) -> Result<InvariantComplexCurrent> {
    match t.positivity_check(opts)? {
        CurrentVerdict::Positive => {}
        CurrentVerdict::NotPositive(w) => return Err(Error::NotPositive(format!("{w:?}"))),
        CurrentVerdict::Unknown(why) => return Err(Error::NotPositive(format!("positivity undecided: {why}"))),
    }
    match t.c_finite_test()? {
        CFinite::Finite => {}
        CFinite::Infinite { witness, .. } => return Err(Error::NotCFinite(witness)),
        CFinite::Undecided(why) => return Err(Error::Undecided(why)),
    }
    let scale = four_pow(t.q());
    let mut shadows: BTreeMap<(Mask, Mask), PieceMeasure> = BTreeMap::new();
    for part in t.canonical_decomposition()?.values() {
        for (&ij, mu) in part.cocoefficients() {
            let e = shadows.entry(ij).or_insert_with(|| PieceMeasure::zero(t.n()));
            *e = e.add(&mu.scale(&scale))?;
        }
    }
    InvariantComplexCurrent::from_shadows(t.domain().clone(), t.p(), shadows)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RoundTrip {
    Exact,
    Failed(String),
}

/// `trop_*(lift(T)) = T` on piece data, and equal lifts for the same current given with its
/// pieces in another order.
pub fn round_trip_verify(suite: &[LagerbergCurrent], opts: &PositivityOptions) -> Vec<RoundTrip> {
    suite
        .iter()
        .map(|t| {
            let run = || -> Result<Option<String>> {
                let s = lift(t, opts)?;
                let back = s.push_forward()?;
                if back.cocoefficients().ne(t.cocoefficients()) {
                    return Ok(Some("push-forward of the lift differs from the input".into()));
                }
                let shuffled: BTreeMap<(Mask, Mask), PieceMeasure> = t
                    .cocoefficients()
                    .collect::<Vec<_>>()
                    .into_iter()
                    .rev()
                    .map(|(k, m)| {
                        let mut atoms = m.atoms().to_vec();
                        atoms.reverse();
                        let mut pieces = m.pieces().to_vec();
                        pieces.reverse();
                        PieceMeasure::from_parts(m.n(), atoms, pieces, m.derivative_atoms().to_vec()).map(|m| (*k, m))
                    })
                    .collect::<Result<_>>()?;
                let t2 = LagerbergCurrent::new(t.domain().clone(), t.p(), shuffled)?;
                if lift(&t2, opts)? != s {
                    return Ok(Some("lifts of equal currents differ".into()));
                }
                Ok(None)
            };
            match run() {
                Ok(None) => RoundTrip::Exact,
                Ok(Some(why)) => RoundTrip::Failed(why),
                Err(e) => RoundTrip::Failed(format!("{e}")),
            }
        })
        .collect()
}

const LAMBDA_GRID: [(i64, i64); 3] = [(1, 4), (1, 1), (4, 1)];

/// Positivity of `S`: the mixed estimate
/// `λ_I λ_J |S^{IJ}| ≤ 2^q Σ_{I∩J ⊆ M ⊆ I∪J} λ_M² S^{MM}` on matched mass for `λ` on a grid,
/// then pointwise semidefiniteness of the shadow matrix (the boundary weights `e^{−u_I−u_J}`
/// and the normalization are positive diagonal scalings and do not change it).
pub fn complex_positivity_check(s: &InvariantComplexCurrent, opts: &PositivityOptions) -> Result<CurrentVerdict> {
    if !s.kernel.is_empty() {
        return Ok(CurrentVerdict::Unknown("kernel exemplars carry no shadow data".into()));
    }
    let t = s.as_lagerberg()?;
    for (&(i, j), m) in t.cocoefficients() {
        if t.cocoefficient(j, i) != *m {
            return Ok(CurrentVerdict::NotPositive(PositivityWitness::NotSymmetric { i, j }));
        }
        if !m.is_measure() {
            return Ok(CurrentVerdict::NotPositive(PositivityWitness::NonMeasure { i, j }));
        }
    }
    if let Some(w) = mixed_estimate(s, opts)? {
        return Ok(CurrentVerdict::NotPositive(w));
    }
    t.positivity_check(opts)
}

/// Points where the estimate is tested: atoms and sampled points of every piece.
fn estimate_points(s: &InvariantComplexCurrent, opts: &PositivityOptions) -> Vec<(Mask, Vec<Rational>, Location)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for m in s.shadows.values() {
        for a in m.atoms() {
            let l = stratum_of(&a.point);
            let u: Vec<Rational> = a.point.iter().map(|c| c.finite().cloned().unwrap_or_else(Rational::zero)).collect();
            if seen.insert((l, u.clone())) {
                out.push((l, u, Location::Atom(a.point.clone())));
            }
        }
        for p in m.pieces() {
            let mut ts: Vec<Vec<Rational>> = p.region.interior_point().into_iter().collect();
            ts.extend(p.region.sample(&mut rng, opts.samples.min(16), 4.0));
            for t in ts {
                let u = p.point_exact(&t);
                if seen.insert((p.stratum, u.clone())) {
                    out.push((p.stratum, u.clone(), Location::Piece { stratum: p.stratum, point: u }));
                }
            }
        }
    }
    out
}

/// Density of a shadow at a point (atom weight or piece density), exactly when possible.
fn local_value(m: &PieceMeasure, l: Mask, u: &[Rational], at: &Location) -> f64 {
    match at {
        Location::Atom(pt) => m.atoms().iter().filter(|a| &a.point == pt).map(|a| crate::scalar::to_f64(&a.weight)).sum(),
        Location::Piece { .. } => {
            m.pieces()
                .iter()
                .filter(|p| p.stratum == l)
                .filter_map(|p| {
                    // parameter of `u` on the piece, if it lies on its span and region
                    let dirs = &p.directions;
                    let diff: Vec<Rational> = u.iter().zip(&p.origin).map(|(a, b)| a - b).collect();
                    let t = if dirs.is_empty() {
                        if diff.iter().all(Zero::is_zero) {
                            Vec::new()
                        } else {
                            return None;
                        }
                    } else {
                        let a: Vec<Vec<Rational>> = (0..u.len()).map(|r| dirs.iter().map(|d| d[r].clone()).collect()).collect();
                        crate::linalg::solve(&a, &diff)?
                    };
                    if !p.region.contains(&t) {
                        return None;
                    }
                    let tf: Vec<f64> = t.iter().map(crate::scalar::to_f64).collect();
                    Some(p.weight_at(&tf))
                })
                .sum()
        }
    }
}

fn mixed_estimate(s: &InvariantComplexCurrent, opts: &PositivityOptions) -> Result<Option<PositivityWitness>> {
    let qd = s.q();
    let bound = f64::from(1u32 << qd);
    let points = estimate_points(s, opts);
    for (&(i, j), m) in &s.shadows {
        if i == j {
            continue;
        }
        let between: Vec<Mask> = index::subsets(s.n(), qd).into_iter().filter(|&k| k & (i & j) == (i & j) && k & !(i | j) == 0).collect();
        for (l, u, at) in &points {
            let off = local_value(m, *l, u, at).abs();
            if off == 0.0 {
                continue;
            }
            let diag: Vec<(Mask, f64)> = between.iter().map(|&k| (k, local_value(&s.shadow(k, k), *l, u, at))).collect();
            for &(a, b) in &LAMBDA_GRID {
                for &(c, d) in &LAMBDA_GRID {
                    let li = a as f64 / b as f64;
                    let lj = c as f64 / d as f64;
                    // other subsets take the smallest grid weight
                    let lam = |k: Mask| if k == i { li } else if k == j { lj } else { 0.25 };
                    let rhs: f64 = bound * diag.iter().map(|&(k, v)| lam(k) * lam(k) * v).sum::<f64>();
                    if li * lj * off > rhs * (1.0 + 1e-12) + opts.tol {
                        return Ok(Some(PositivityWitness::EstimateFails { i, j, at: at.clone() }));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatReport {
    /// `trop_*(Σ S_σ) = Σ trop_*(S_σ)` on piece data.
    pub decomposition: bool,
    /// Support descriptors of `trop_*(S)` and of the shadows coincide.
    pub support: bool,
    /// For top degree: `trop_*` restricted to functions is the identity on the shadow measure
    /// and inverted by the lift.
    pub top_degree: Option<bool>,
}

impl CompatReport {
    pub fn all_pass(&self) -> bool {
        self.decomposition && self.support && self.top_degree.unwrap_or(true)
    }
}

fn support_descriptors(cocoeffs: &mut dyn Iterator<Item = &PieceMeasure>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for m in cocoeffs {
        for a in m.atoms() {
            let v: Vec<String> = a.point.iter().map(|c: &Coord| format!("{c}")).collect();
            out.insert(format!("atom {}", v.join(",")));
        }
        for p in m.pieces() {
            out.insert(format!("piece {} {:?} {:?} {:?}", index::label(p.stratum), p.origin, p.directions, p.region));
        }
    }
    out
}

pub fn compat_checks(s: &InvariantComplexCurrent, opts: &PositivityOptions) -> Result<CompatReport> {
    let t = s.push_forward()?;
    let mut sum = LagerbergCurrent::zero(s.domain.clone(), s.p);
    for l in s.strata() {
        sum = sum.add(&s.stratum_part(l)?.push_forward()?)?;
    }
    let decomposition = sum.cocoefficients().eq(t.cocoefficients());
    let support = support_descriptors(&mut t.cocoefficients().map(|(_, m)| m)) == support_descriptors(&mut s.shadows.values());
    let top_degree = if s.p == s.n() {
        let same = t.cocoefficient(0, 0) == s.shadow(0, 0);
        let back = match lift(&t, opts) {
            Ok(l) => l == *s,
            Err(_) => false,
        };
        Some(same && back)
    } else {
        None
    };
    Ok(CompatReport { decomposition, support, top_degree })
}

/// Dirac shadow with the weight that pushes to `weight` in bidegree `(p,p)` on a one-point set.
pub fn dirac_shadow(point: Vec<Coord>, weight: Rational, qd: usize) -> PieceMeasure {
    PieceMeasure::dirac(point, weight * four_pow(qd))
}
