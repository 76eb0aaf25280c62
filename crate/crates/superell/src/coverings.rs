//! Split 2-covering equations: the diagonal quadric relations attached to a
//! split form and a twisting vector, evaluation of the degree-2^(2n) map to
//! the projective line, and exhaustive fiber statistics over prime fields.
//!
//! Everything here works over a base field where the form splits: either
//! the rationals or a prime field.

use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Minimal field interface for the two supported coefficient domains.
pub trait CovField: Clone + PartialEq + std::fmt::Debug {
    fn zero(&self) -> Self;
    fn one(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
}

impl CovField for BigRational {
    fn zero(&self) -> Self {
        <BigRational as Zero>::zero()
    }
    fn one(&self) -> Self {
        <BigRational as One>::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// An element of the prime field `F_q`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Fq {
    pub q: u64,
    pub v: u64,
}

impl Fq {
    pub fn new(q: u64, v: i64) -> Self {
        Fq {
            q,
            v: v.rem_euclid(q as i64) as u64,
        }
    }
}

impl CovField for Fq {
    fn zero(&self) -> Self {
        Fq { q: self.q, v: 0 }
    }
    fn one(&self) -> Self {
        Fq { q: self.q, v: 1 }
    }
    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.q, other.q);
        Fq {
            q: self.q,
            v: (self.v + other.v) % self.q,
        }
    }
    fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.q, other.q);
        Fq {
            q: self.q,
            v: (self.v + self.q - other.v) % self.q,
        }
    }
    fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.q, other.q);
        Fq {
            q: self.q,
            v: (self.v as u128 * other.v as u128 % self.q as u128) as u64,
        }
    }
    fn neg(&self) -> Self {
        Fq {
            q: self.q,
            v: (self.q - self.v) % self.q,
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.v == 0 {
            return None;
        }
        // Fermat: q is prime at desk scale
        let mut acc = 1u64;
        let mut base = self.v;
        let mut e = self.q - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = (acc as u128 * base as u128 % self.q as u128) as u64;
            }
            base = (base as u128 * base as u128 % self.q as u128) as u64;
            e >>= 1;
        }
        Some(Fq { q: self.q, v: acc })
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
}

/// A split covering datum: the distinct roots of the form in the base field
/// and the nonzero twisting coordinates.
#[derive(Clone, Debug)]
pub struct SplitCoveringSpec<F: CovField> {
    pub roots: Vec<F>,
    pub delta: Vec<F>,
}

impl<F: CovField> SplitCoveringSpec<F> {
    pub fn new(roots: Vec<F>, delta: Vec<F>) -> Result<Self> {
        if roots.len() != delta.len() || roots.len() < 3 || roots.len() % 2 == 0 {
            return Err(Error::Precondition(
                "need 2n+1 ≥ 3 roots with matching twist coordinates".into(),
            ));
        }
        for (i, r) in roots.iter().enumerate() {
            for s in roots.iter().skip(i + 1) {
                if r == s {
                    return Err(Error::Precondition("roots must be pairwise distinct".into()));
                }
            }
        }
        if delta.iter().any(|d| d.is_zero()) {
            return Err(Error::Precondition("twist coordinates must be nonzero".into()));
        }
        Ok(SplitCoveringSpec { roots, delta })
    }

    pub fn dim(&self) -> usize {
        self.roots.len()
    }
}

/// A diagonal quadric `Σ c_i·Z_i² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricRelation<F: CovField> {
    pub coefficients: Vec<F>,
}

impl<F: CovField> QuadricRelation<F> {
    pub fn evaluate(&self, point: &[F]) -> F {
        let mut acc = self.coefficients[0].zero();
        for (c, z) in self.coefficients.iter().zip(point) {
            acc = acc.add(&c.mul(&z.mul(z)));
        }
        acc
    }
}

/// The relation of an index quadruple `(i, j, l, m)`:
/// `(θ_i−θ_j)(δ_l Z_l² − δ_m Z_m²) − (θ_l−θ_m)(δ_i Z_i² − δ_j Z_j²)`.
pub fn quadruple_relation<F: CovField>(
    spec: &SplitCoveringSpec<F>,
    i: usize,
    j: usize,
    l: usize,
    m: usize,
) -> QuadricRelation<F> {
    let dim = spec.dim();
    let mut coeffs = vec![spec.roots[0].zero(); dim];
    let tij = spec.roots[i].sub(&spec.roots[j]);
    let tlm = spec.roots[l].sub(&spec.roots[m]);
    coeffs[l] = coeffs[l].add(&tij.mul(&spec.delta[l]));
    coeffs[m] = coeffs[m].sub(&tij.mul(&spec.delta[m]));
    coeffs[i] = coeffs[i].sub(&tlm.mul(&spec.delta[i]));
    coeffs[j] = coeffs[j].add(&tlm.mul(&spec.delta[j]));
    QuadricRelation {
        coefficients: coeffs,
    }
}

/// A generating set of the covering ideal: the `2n−1` relations of the
/// quadruples `(1,2,2,k)` for `k = 3..2n+1` (0-indexed below), verified
/// independent by rank over the base field.
pub fn covering_ideal<F: CovField>(
    spec: &SplitCoveringSpec<F>,
) -> Result<Vec<QuadricRelation<F>>> {
    let dim = spec.dim();
    let gens: Vec<QuadricRelation<F>> = (2..dim)
        .map(|k| quadruple_relation(spec, 0, 1, 1, k))
        .collect();
    let rank = field_rank(
        gens.iter().map(|g| g.coefficients.clone()).collect(),
    );
    if rank != dim - 2 {
        return Err(Error::Internal(format!(
            "covering relations have rank {rank}, expected {}",
            dim - 2
        )));
    }
    Ok(gens)
}

/// Row rank by Gaussian elimination in the field.
fn field_rank<F: CovField>(mut rows: Vec<Vec<F>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(pivot) = pivot else { continue };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inv().expect("nonzero pivot");
        for c in 0..cols {
            rows[rank][c] = rows[rank][c].mul(&inv);
        }
        for r in 0..rows.len() {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for c in 0..cols {
                let t = f.mul(&rows[rank][c]);
                rows[r][c] = rows[r][c].sub(&t);
            }
        }
        rank += 1;
    }
    rank
}

/// Expresses an arbitrary quadruple relation in terms of the generators;
/// returns the combination when one exists.
pub fn express_in_generators<F: CovField>(
    gens: &[QuadricRelation<F>],
    target: &QuadricRelation<F>,
) -> Option<Vec<F>> {
    // solve Σ x_g · gen_g = target by elimination over the field
    let dim = target.coefficients.len();
    let mut rows: Vec<Vec<F>> = gens
        .iter()
        .map(|g| g.coefficients.clone())
        .collect();
    // augmented columns track the combination
    let k = rows.len();
    for (idx, row) in rows.iter_mut().enumerate() {
        for j in 0..k {
            row.push(if j == idx {
                target.coefficients[0].one()
            } else {
                target.coefficients[0].zero()
            });
        }
    }
    let mut target_row = target.coefficients.clone();
    for _ in 0..k {
        target_row.push(target.coefficients[0].zero());
    }
    // eliminate target against the generators
    let mut rank = 0usize;
    for col in 0..dim {
        let pivot = (rank..k).find(|&r| !rows[r][col].is_zero());
        let Some(pivot) = pivot else { continue };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inv().expect("nonzero pivot");
        for c in 0..dim + k {
            rows[rank][c] = rows[rank][c].mul(&inv);
        }
        let f = target_row[col].clone();
        if !f.is_zero() {
            for c in 0..dim + k {
                let t = f.mul(&rows[rank][c]);
                target_row[c] = target_row[c].sub(&t);
            }
        }
        // also clear other generator rows to keep echelon form
        for r in 0..k {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for c in 0..dim + k {
                let t = f.mul(&rows[rank][c]);
                rows[r][c] = rows[r][c].sub(&t);
            }
        }
        rank += 1;
    }
    if target_row[..dim].iter().any(|c| !c.is_zero()) {
        return None;
    }
    Some(target_row[dim..].iter().map(|c| c.neg()).collect())
}

/// Value of the covering map at an on-curve point, as `[num : den]` in the
/// projective line: `(θ_j δ_i Z_i² − θ_i δ_j Z_j²) : (δ_i Z_i² − δ_j Z_j²)`
/// for any pair with distinct weighted squares, verified pair-independent;
/// all-equal weighted squares map to `[1 : 0]`.
pub fn pi_delta_eval<F: CovField>(
    spec: &SplitCoveringSpec<F>,
    point: &[F],
) -> Result<(F, F)> {
    let dim = spec.dim();
    if point.len() != dim {
        return Err(Error::DimensionMismatch("point has wrong length".into()));
    }
    if point.iter().all(|z| z.is_zero()) {
        return Err(Error::Precondition("not a projective point".into()));
    }
    for rel_k in 2..dim {
        let rel = quadruple_relation(spec, 0, 1, 1, rel_k);
        if !rel.evaluate(point).is_zero() {
            return Err(Error::Precondition("point is not on the covering".into()));
        }
    }
    let w: Vec<F> = (0..dim)
        .map(|i| spec.delta[i].mul(&point[i].mul(&point[i])))
        .collect();
    let mut answer: Option<(F, F)> = None;
    for i in 0..dim {
        for j in i + 1..dim {
            let den = w[i].sub(&w[j]);
            if den.is_zero() {
                continue;
            }
            let num = spec.roots[j].mul(&w[i]).sub(&spec.roots[i].mul(&w[j]));
            match &answer {
                None => answer = Some((num, den)),
                Some((n0, d0)) => {
                    // cross-multiplied equality in the projective line
                    if n0.mul(&den) != num.mul(d0) {
                        return Err(Error::Internal(
                            "covering map value depends on the pair".into(),
                        ));
                    }
                }
            }
        }
    }
    match answer {
        Some(v) => Ok(v),
        // all weighted squares equal: the fiber over infinity
        None => Ok((point[0].one(), point[0].zero())),
    }
}

/// Exhaustive point count and fiber sizes of a covering over `F_q`.
#[derive(Clone, Debug)]
pub struct FiberCensus {
    pub q: u64,
    pub total_points: u64,
    /// fiber sizes keyed by the base point: `(num, den)` normalized with
    /// den ∈ {0, 1}
    pub fibers: Vec<((u64, u64), u64)>,
    pub max_fiber: u64,
    pub max_branch_fiber: u64,
}

/// Enumerates all of `P^(2n)(F_q)` and tallies the covering's fibers.
/// Guarded by a budget on `q^(2n)` to keep the census exhaustive at desk
/// scale only.
pub fn fiber_census(spec: &SplitCoveringSpec<Fq>, budget: u64) -> Result<FiberCensus> {
    let dim = spec.dim();
    let q = spec.roots[0].q;
    if q % 2 == 0 {
        return Err(Error::Precondition("need odd q".into()));
    }
    let mut size: u64 = 1;
    for _ in 0..dim - 1 {
        size = size.saturating_mul(q);
        if size > budget {
            return Err(Error::Budget(format!(
                "projective space larger than budget {budget}"
            )));
        }
    }
    let gens = covering_ideal(spec)?;
    let mut fibers: std::collections::BTreeMap<(u64, u64), u64> =
        std::collections::BTreeMap::new();
    let mut total = 0u64;
    // projective representatives: first nonzero coordinate = 1
    let mut coords = vec![0u64; dim];
    for lead in 0..dim {
        coords.iter_mut().for_each(|c| *c = 0);
        coords[lead] = 1;
        // free coordinates: lead+1..dim
        loop {
            let point: Vec<Fq> = coords.iter().map(|&v| Fq { q, v }).collect();
            if gens.iter().all(|g| g.evaluate(&point).is_zero()) {
                total += 1;
                let (num, den) = pi_delta_eval(spec, &point)?;
                let key = if den.is_zero() {
                    (1, 0)
                } else {
                    let inv = den.inv().expect("nonzero");
                    (num.mul(&inv).v, 1)
                };
                *fibers.entry(key).or_insert(0) += 1;
            }
            // advance odometer over positions lead+1..dim
            let mut idx = dim;
            loop {
                if idx == lead + 1 {
                    idx = lead; // done with this chart
                    break;
                }
                idx -= 1;
                coords[idx] += 1;
                if coords[idx] == q {
                    coords[idx] = 0;
                } else {
                    break;
                }
            }
            if idx == lead {
                break;
            }
        }
    }
    let branch: Vec<(u64, u64)> = spec.roots.iter().map(|r| (r.v, 1u64)).collect();
    let mut max_fiber = 0;
    let mut max_branch = 0;
    for (key, count) in &fibers {
        max_fiber = max_fiber.max(*count);
        if branch.contains(key) {
            max_branch = max_branch.max(*count);
        }
    }
    Ok(FiberCensus {
        q,
        total_points: total,
        fibers: fibers.into_iter().collect(),
        max_fiber,
        max_branch_fiber: max_branch,
    })
}

/// The twist coordinates induced by a solution of `c² = F(x,z)` over the
/// rationals with split `F`: `δ_i = f0·(x0 − θ_i·z0)`.
pub fn solution_twist(
    roots: &[BigRational],
    f0: &BigInt,
    x0: &BigInt,
    z0: &BigInt,
) -> Vec<BigRational> {
    roots
        .iter()
        .map(|t| {
            BigRational::from_integer(f0.clone())
                * (BigRational::from_integer(x0.clone())
                    - t * BigRational::from_integer(z0.clone()))
        })
        .collect()
}
