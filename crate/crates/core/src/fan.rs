//! Smooth rational fans, strata of the partial compactification and toric charts.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, LpResult, Mat};
use crate::scalar::{q, Coord, Rational};

pub type ConeId = usize;

/// Integer vector in the lattice `Zⁿ`.
pub type LatticeVector = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    /// Primitive ray generators in lexicographic order.
    pub generators: Vec<LatticeVector>,
    /// Generators followed by a completion to a lattice basis.
    basis: Vec<LatticeVector>,
}

impl Cone {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Lattice basis whose prefix generates the cone.
    pub fn adapted_basis(&self) -> &[LatticeVector] {
        &self.basis
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fan {
    rank: usize,
    cones: Vec<Cone>,
    /// `faces[s]` lists the ids of all faces of cone `s`, itself included.
    faces: Vec<Vec<ConeId>>,
}

/// A point of the stratum `N(σ)` in the quotient basis of `σ`'s chart.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompactifiedPoint {
    pub stratum: ConeId,
    pub coords: Vec<Rational>,
}

/// Coordinates `u = B⁻¹ x` adapted to a cone; the first `dim ρ` axes are the infinite ones.
#[derive(Clone, Debug, PartialEq)]
pub struct ToricChart {
    pub cone: ConeId,
    pub basis: Vec<LatticeVector>,
    pub infinite_axes: Vec<usize>,
    inverse: Mat,
}

impl ToricChart {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Chart coordinates of a point of `N_R`.
    pub fn coordinates(&self, x: &[Rational]) -> Vec<Rational> {
        linalg::mat_vec(&self.inverse, x)
    }

    /// Point of `N_R` with chart coordinates `u`.
    pub fn point(&self, u: &[Rational]) -> Vec<Rational> {
        let n = self.rank();
        (0..n)
            .map(|r| {
                let mut s = Rational::zero();
                for (b, ui) in self.basis.iter().zip(u) {
                    if b[r] != 0 {
                        s += q(b[r]) * ui;
                    }
                }
                s
            })
            .collect()
    }

    /// Axes of the chart that are infinite on the stratum of a face given by its generators.
    pub fn axes_of_face(&self, face: &Cone) -> Vec<usize> {
        face.generators
            .iter()
            .map(|g| self.basis.iter().position(|b| b == g).expect("face generator"))
            .collect()
    }
}

pub fn primitive(v: &[i64]) -> LatticeVector {
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

/// Columns are the given vectors.
fn column_matrix(vs: &[LatticeVector], n: usize) -> Mat {
    (0..n).map(|r| vs.iter().map(|v| q(v[r])).collect()).collect()
}

/// gcd of the maximal minors of the rows `vs`; zero when dependent.
fn minor_gcd(vs: &[LatticeVector], n: usize) -> Rational {
    let k = vs.len();
    if k == 0 {
        return Rational::one();
    }
    let mut g = num_bigint::BigInt::zero();
    for cols in crate::index::subsets(n, k) {
        let c = crate::index::elements(cols);
        let minor: Mat = vs.iter().map(|v| c.iter().map(|&j| q(v[j])).collect()).collect();
        let d = linalg::det(&minor);
        g = g.gcd(d.numer());
    }
    Rational::from_integer(g)
}

/// Unimodular completion of a saturated independent family by column Hermite reduction.
fn hermite_completion(gens: &[LatticeVector], n: usize) -> Option<Vec<LatticeVector>> {
    let k = gens.len();
    let mut a: Vec<Vec<i64>> = gens.to_vec();
    let mut vinv: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for r in 0..k {
        loop {
            let nz: Vec<usize> = (r..n).filter(|&c| a[r][c] != 0).collect();
            if nz.is_empty() {
                return None;
            }
            let piv = *nz.iter().min_by_key(|&&c| a[r][c].abs()).unwrap();
            if piv != r {
                for row in a.iter_mut() {
                    row.swap(piv, r);
                }
                vinv.swap(piv, r);
            }
            let mut done = true;
            for c in r + 1..n {
                if a[r][c] != 0 {
                    let f = Integer::div_floor(&a[r][c], &a[r][r]);
                    for row in a.iter_mut() {
                        row[c] -= f * row[r];
                    }
                    // column c −= f·column r  ⇒  row r of V⁻¹ += f·row c
                    for j in 0..n {
                        let t = vinv[c][j];
                        vinv[r][j] += f * t;
                    }
                    if a[r][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[r][r].abs() != 1 {
            return None;
        }
    }
    Some(vinv[k..].to_vec())
}

fn complete_basis(gens: &[LatticeVector], n: usize) -> Option<Vec<LatticeVector>> {
    let mut basis = gens.to_vec();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = vec![0i64; n];
        e[i] = 1;
        let mut trial = basis.clone();
        trial.push(e);
        if minor_gcd(&trial, n).is_one() {
            basis = trial;
        }
    }
    if basis.len() == n {
        return Some(basis);
    }
    let tail = hermite_completion(gens, n)?;
    let mut basis = gens.to_vec();
    basis.extend(tail);
    Some(basis)
}

/// Whether some nonzero nonnegative combination of `vs` vanishes.
fn contains_line(vs: &[LatticeVector], n: usize) -> bool {
    let k = vs.len();
    let mut a = column_matrix(vs, n);
    a.push(vec![Rational::one(); k]);
    let mut b = vec![Rational::zero(); n];
    b.push(Rational::one());
    !matches!(linalg::simplex(&a, &b, &vec![Rational::zero(); k]), LpResult::Infeasible)
}

/// Whether `v` is a nonnegative combination of `others`.
fn in_cone(v: &[i64], others: &[LatticeVector], n: usize) -> bool {
    if others.is_empty() {
        return v.iter().all(|&x| x == 0);
    }
    let a = column_matrix(others, n);
    let b: Vec<Rational> = v.iter().map(|&x| q(x)).collect();
    !matches!(linalg::simplex(&a, &b, &vec![Rational::zero(); others.len()]), LpResult::Infeasible)
}

fn normalize_cone(idx: usize, gens: &[LatticeVector], n: usize) -> Result<Vec<LatticeVector>> {
    let mut set: BTreeSet<LatticeVector> = BTreeSet::new();
    for g in gens {
        if g.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: g.len() });
        }
        if g.iter().any(|&x| x != 0) {
            set.insert(primitive(g));
        }
    }
    let mut gens: Vec<LatticeVector> = set.into_iter().collect();
    if contains_line(&gens, n) && !gens.is_empty() {
        return Err(Error::NotStrictlyConvex(idx));
    }
    // drop generators that are not extremal
    let mut i = 0;
    while i < gens.len() {
        let others: Vec<LatticeVector> = gens.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
        if in_cone(&gens[i], &others, n) {
            gens.remove(i);
        } else {
            i += 1;
        }
    }
    if !minor_gcd(&gens, n).is_one() {
        return Err(Error::NotSmooth(idx));
    }
    Ok(gens)
}

/// Whether two simplicial cones meet in the face spanned by their common generators.
fn meets_in_common_face(a: &[LatticeVector], b: &[LatticeVector], n: usize) -> bool {
    let ea: Vec<&LatticeVector> = a.iter().filter(|g| !b.contains(g)).collect();
    let eb: Vec<&LatticeVector> = b.iter().filter(|g| !a.contains(g)).collect();
    if ea.is_empty() || eb.is_empty() {
        return true;
    }
    let k = a.len() + b.len();
    let mut rows: Mat = (0..n)
        .map(|r| a.iter().map(|g| q(g[r])).chain(b.iter().map(|g| q(-g[r]))).collect())
        .collect();
    let mut norm = Vec::with_capacity(k);
    for g in a {
        norm.push(if b.contains(g) { Rational::zero() } else { Rational::one() });
    }
    for g in b {
        norm.push(if a.contains(g) { Rational::zero() } else { Rational::one() });
    }
    rows.push(norm);
    let mut rhs = vec![Rational::zero(); n];
    rhs.push(Rational::one());
    matches!(linalg::simplex(&rows, &rhs, &vec![Rational::zero(); k]), LpResult::Infeasible)
}

/// Builds the face-closed fan generated by the given cones.
pub fn validate_fan(rank: usize, cones: &[Vec<LatticeVector>]) -> Result<Fan> {
    let mut normalized = Vec::with_capacity(cones.len());
    for (i, c) in cones.iter().enumerate() {
        normalized.push(normalize_cone(i, c, rank)?);
    }
    for i in 0..normalized.len() {
        for j in i + 1..normalized.len() {
            if !meets_in_common_face(&normalized[i], &normalized[j], rank) {
                return Err(Error::BadIntersection(i, j));
            }
        }
    }
    let mut all: BTreeSet<(usize, Vec<LatticeVector>)> = BTreeSet::new();
    all.insert((0, Vec::new()));
    for g in &normalized {
        for m in 0u32..(1 << g.len()) {
            let sub: Vec<LatticeVector> =
                g.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, v)| v.clone()).collect();
            all.insert((sub.len(), sub));
        }
    }
    let mut list: Vec<Cone> = Vec::new();
    for (_, gens) in all {
        let basis = complete_basis(&gens, rank).ok_or(Error::NotSmooth(list.len()))?;
        list.push(Cone { generators: gens, basis });
    }
    let faces = list
        .iter()
        .map(|s| {
            (0..list.len())
                .filter(|&t| list[t].generators.iter().all(|g| s.generators.contains(g)))
                .collect()
        })
        .collect();
    Ok(Fan { rank, cones: list, faces })
}

impl Fan {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn cone(&self, id: ConeId) -> Result<&Cone> {
        self.cones.get(id).ok_or(Error::UnknownCone(id))
    }

    pub fn zero_cone(&self) -> ConeId {
        0
    }

    /// Id of the cone with exactly these generators (any order, primitive or not).
    pub fn find(&self, gens: &[LatticeVector]) -> Option<ConeId> {
        let mut g: Vec<LatticeVector> = gens.iter().map(|v| primitive(v)).collect();
        g.sort();
        g.dedup();
        self.cones.iter().position(|c| c.generators == g)
    }

    pub fn faces(&self, id: ConeId) -> Result<&[ConeId]> {
        self.faces.get(id).map(|v| v.as_slice()).ok_or(Error::UnknownCone(id))
    }

    pub fn is_face(&self, tau: ConeId, sigma: ConeId) -> Result<bool> {
        self.cone(tau)?;
        Ok(self.faces(sigma)?.contains(&tau))
    }

    /// Cones having `id` as a face; these index the strata in the closure of `N(id)`.
    pub fn star(&self, id: ConeId) -> Vec<ConeId> {
        (0..self.cones.len()).filter(|&s| self.faces[s].contains(&id)).collect()
    }

    pub fn maximal_cones(&self) -> Vec<ConeId> {
        (0..self.cones.len()).filter(|&s| self.star(s).len() == 1).collect()
    }

    /// The cone whose relative interior contains `v`.
    pub fn locate_relint(&self, v: &[Rational]) -> Result<ConeId> {
        if v.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: v.len() });
        }
        for (id, c) in self.cones.iter().enumerate() {
            if c.generators.is_empty() {
                if v.iter().all(Zero::is_zero) {
                    return Ok(id);
                }
                continue;
            }
            let a = column_matrix(&c.generators, self.rank);
            if let Some(l) = linalg::solve(&a, v) {
                if l.iter().all(|x| x.is_positive()) {
                    return Ok(id);
                }
            }
        }
        Err(Error::OutsideSupport)
    }

    pub fn toric_chart(&self, id: ConeId) -> Result<ToricChart> {
        let c = self.cone(id)?;
        let b = column_matrix(&c.basis, self.rank);
        let inverse = linalg::inverse(&b).expect("unimodular basis");
        Ok(ToricChart { cone: id, basis: c.basis.clone(), infinite_axes: (0..c.dim()).collect(), inverse })
    }

    /// `π_σ(p)`: the image of `p ∈ N_R` in the stratum `N(σ)`.
    pub fn project_to_stratum(&self, sigma: ConeId, p: &[Rational]) -> Result<CompactifiedPoint> {
        if p.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: p.len() });
        }
        let chart = self.toric_chart(sigma)?;
        let k = self.cones[sigma].dim();
        Ok(CompactifiedPoint { stratum: sigma, coords: chart.coordinates(p)[k..].to_vec() })
    }

    /// A representative in `N_R` of a stratum point.
    pub fn lift(&self, x: &CompactifiedPoint) -> Result<Vec<Rational>> {
        let c = self.cone(x.stratum)?;
        let k = c.dim();
        if x.coords.len() != self.rank - k {
            return Err(Error::DimensionMismatch { expected: self.rank - k, found: x.coords.len() });
        }
        let mut u = vec![Rational::zero(); k];
        u.extend(x.coords.iter().cloned());
        Ok(self.toric_chart(x.stratum)?.point(&u))
    }

    /// `π_{σ,τ}: N(τ) → N(σ)` for `τ ≺ σ`.
    pub fn stratum_projection(&self, sigma: ConeId, tau: ConeId, x: &CompactifiedPoint) -> Result<CompactifiedPoint> {
        if x.stratum != tau {
            return Err(Error::Invalid("point does not lie on the source stratum".into()));
        }
        if !self.is_face(tau, sigma)? {
            return Err(Error::NotAFace(tau, sigma));
        }
        self.project_to_stratum(sigma, &self.lift(x)?)
    }

    /// `lim_{μ→∞} p + μ v`.
    pub fn limit_point(&self, p: &[Rational], v: &[Rational]) -> Result<CompactifiedPoint> {
        let sigma = self.locate_relint(v)?;
        self.project_to_stratum(sigma, p)
    }

    /// Chart coordinates of a stratum point lying in the chart's domain; `Inf` on the stratum's axes.
    pub fn chart_coordinates(&self, chart: &ToricChart, x: &CompactifiedPoint) -> Result<Vec<Coord>> {
        if !self.is_face(x.stratum, chart.cone)? {
            return Err(Error::NotAFace(x.stratum, chart.cone));
        }
        let axes = chart.axes_of_face(&self.cones[x.stratum]);
        let u = chart.coordinates(&self.lift(x)?);
        Ok(u.into_iter().enumerate().map(|(i, v)| if axes.contains(&i) { Coord::Inf } else { Coord::Fin(v) }).collect())
    }

    /// Inverse of [`chart_coordinates`](Self::chart_coordinates).
    pub fn point_from_chart(&self, chart: &ToricChart, u: &[Coord]) -> Result<CompactifiedPoint> {
        if u.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: u.len() });
        }
        let inf: Vec<usize> = (0..u.len()).filter(|&i| u[i].is_inf()).collect();
        if inf.iter().any(|i| !chart.infinite_axes.contains(i)) {
            return Err(Error::OutsideSupport);
        }
        let gens: Vec<LatticeVector> = inf.iter().map(|&i| chart.basis[i].clone()).collect();
        let stratum = self.find(&gens).ok_or(Error::OutsideSupport)?;
        let fin: Vec<Rational> = u.iter().map(|c| c.finite().cloned().unwrap_or_else(Rational::zero)).collect();
        self.project_to_stratum(stratum, &chart.point(&fin))
    }

    /// Stratum id of the chart-`ρ` stratum with infinite axes given by `mask`.
    pub fn stratum_of_axes(&self, chart: &ToricChart, mask: u32) -> Result<ConeId> {
        let gens: Vec<LatticeVector> =
            crate::index::elements(mask).into_iter().map(|i| chart.basis[i].clone()).collect();
        if crate::index::elements(mask).iter().any(|i| !chart.infinite_axes.contains(i)) {
            return Err(Error::OutsideSupport);
        }
        self.find(&gens).ok_or(Error::OutsideSupport)
    }
}

/// Integer matrix relating two charts: `u_b = T u_a`.
pub fn chart_transition(a: &ToricChart, b: &ToricChart) -> Mat {
    let ba = column_matrix(&a.basis, a.rank());
    linalg::mat_mul(&b.inverse, &ba)
}

pub fn rational_vector(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| q(x)).collect()
}
