//! Local solubility of `c² = F(x₀,z₀)` in primitive p-adic integers, the
//! p-maximality test for the order of a form, and the two sieve conditions
//! at primes dividing the squarefree part of the leading coefficient.
//!
//! The p-adic decision works on residue classes of the projective line:
//! scaling a primitive pair by a unit `u` scales the form value by
//! `u^(2n+1)`, whose square class is that of `u`, so a class is soluble
//! exactly when the valuation of the value is even (or the value vanishes);
//! the reported witness is scaled so its unit part is literally a square
//! (≡ 1 mod 8 when p = 2).

use crate::forms::BinaryForm;
use crate::kernel::{fp_kernel, is_small_prime, row_hnf, ModPoly, DEFAULT_FACTOR_SEED};
use crate::orders::nakagawa_row;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Outcome of the p-adic decision for one prime.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalReport {
    pub p: u64,
    pub soluble: bool,
    pub witness: Option<LocalWitness>,
    /// Deepest residue level the descent expanded.
    pub depth_used: u32,
    /// For a refusal: number of residue classes refuted, for audit.
    pub refuted_classes: Option<u64>,
}

/// A certified residue point: the value `F(x₀,z₀)` has the stated even
/// valuation and its unit part is a square unit (for the exact-zero case the
/// triple `(x₀, 0, z₀)` is itself a solution).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalWitness {
    pub x0: String,
    pub z0: String,
    /// `None` encodes an exact zero of the form (a Weierstrass solution).
    pub valuation: Option<u32>,
    /// The pair certifies as a class modulo `p^precision`.
    pub precision: u32,
}

/// Decides solubility of `c² = F(x,z)` over the p-adic integers with
/// `(x, z)` primitive.
///
/// Certification and refusal read the exact valuation of the form value on
/// a residue class; indeterminate classes are refined up to a depth cap of
/// `v_p(disc) + 2` (odd `p`) or `v_2(disc) + 5` (`p = 2`). A separable form
/// always resolves under the cap; exceeding it reports an error.
pub fn zp_soluble(form: &BinaryForm, p: u64) -> Result<LocalReport> {
    let pb = BigInt::from(p);
    if !is_small_prime(&pb) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if form.leading().is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }

    // quick witness: v_p(f0) even (including 0) makes the scaled trivial
    // point (u, p^(a/2)·u^(n+1), 0) work, u = f0/p^a
    let a = val_p(form.leading(), &pb);
    if a % 2 == 0 {
        let u = form.leading() / pb.pow(a);
        return Ok(LocalReport {
            p,
            soluble: true,
            witness: Some(LocalWitness {
                x0: u.to_string(),
                z0: "0".into(),
                valuation: Some(a),
                precision: a + 1,
            }),
            depth_used: 0,
            refuted_classes: None,
        });
    }

    let disc = form.disc();
    let cap = depth_cap(&disc, &pb, p);
    descend(form, &pb, p, cap)
}

fn depth_cap(disc: &BigInt, pb: &BigInt, p: u64) -> u32 {
    let base = if disc.is_zero() {
        // inseparable forms have no finite guarantee; generous fixed cap
        25
    } else {
        val_p(disc, pb)
    };
    base + if p == 2 { 5 } else { 2 }
}

fn val_p(v: &BigInt, p: &BigInt) -> u32 {
    assert!(!v.is_zero());
    let mut v = v.clone();
    let mut k = 0;
    loop {
        let (q, r) = v.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        v = q;
        k += 1;
    }
}

/// Breadth-first residue descent shared by the solver and (in flat form) the
/// test oracle.
fn descend(form: &BinaryForm, pb: &BigInt, p: u64, cap: u32) -> Result<LocalReport> {
    let mut frontier: Vec<(BigInt, BigInt, u32)> = Vec::new();
    for x in 0..p {
        frontier.push((BigInt::from(x), BigInt::one(), 1));
    }
    frontier.push((BigInt::one(), BigInt::zero(), 1));

    let mut refuted: u64 = 0;
    let mut depth_used = 1;
    let mut unresolved = 0u64;
    while let Some((x, z, level)) = frontier.pop() {
        depth_used = depth_used.max(level);
        let w = form.eval(&x, &z);
        if w.is_zero() {
            // exact Weierstrass solution at the canonical representative
            return Ok(LocalReport {
                p,
                soluble: true,
                witness: Some(LocalWitness {
                    x0: x.to_string(),
                    z0: z.to_string(),
                    valuation: None,
                    precision: level,
                }),
                depth_used,
                refuted_classes: None,
            });
        }
        let v = val_p(&w, pb);
        if v < level {
            if v % 2 == 0 {
                let (wx, wz) = normalize_witness(&x, &z, &w, v, pb, p, level);
                return Ok(LocalReport {
                    p,
                    soluble: true,
                    witness: Some(LocalWitness {
                        x0: wx.to_string(),
                        z0: wz.to_string(),
                        valuation: Some(v),
                        precision: level,
                    }),
                    depth_used,
                    refuted_classes: None,
                });
            }
            refuted += 1;
            continue;
        }
        if level == cap {
            unresolved += 1;
            continue;
        }
        // refine inside the unit chart of the representative
        let step = pb.pow(level);
        if z.is_one() {
            for j in 0..p {
                frontier.push((&x + BigInt::from(j) * &step, z.clone(), level + 1));
            }
        } else {
            for j in 0..p {
                frontier.push((x.clone(), &z + BigInt::from(j) * &step, level + 1));
            }
        }
    }
    if unresolved > 0 {
        return Err(Error::DepthExceeded { p, cap });
    }
    Ok(LocalReport {
        p,
        soluble: false,
        witness: None,
        depth_used,
        refuted_classes: Some(refuted),
    })
}

/// Scale the representative by a unit so the value's unit part becomes a
/// square unit: the form value scales by `u^(2n+1)`, whose square class is
/// the class of `u` at every prime.
#[allow(clippy::too_many_arguments)]
fn normalize_witness(
    x: &BigInt,
    z: &BigInt,
    w: &BigInt,
    v: u32,
    pb: &BigInt,
    p: u64,
    level: u32,
) -> (BigInt, BigInt) {
    let unit = w / pb.pow(v);
    let modulus = pb.pow(level.max(v + 3));
    let scale = if p == 2 {
        // need unit·u^(2n+1) ≡ 1 mod 8; u ≡ unit^{-1} works since u² ≡ 1
        let inv = crate::kernel::mod_inverse(&unit, &BigInt::from(8)).expect("odd unit");
        inv
    } else if is_qr(&unit, pb) {
        BigInt::one()
    } else {
        // smallest quadratic non-residue
        let mut u = BigInt::from(2);
        while is_qr(&u, pb) {
            u += 1;
        }
        u
    };
    let _ = level;
    ((x * &scale).mod_floor(&modulus), (z * &scale).mod_floor(&modulus))
}

fn is_qr(u: &BigInt, p: &BigInt) -> bool {
    let e = (p - 1u32) / 2u32;
    u.modpow(&e, p).is_one()
}

/// Real solubility with the universal witness `(f0, f0^(n+1), 0)`.
pub fn real_soluble(form: &BinaryForm) -> Result<(BigInt, BigInt, BigInt)> {
    if form.leading().is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let f0 = form.leading().clone();
    let c = f0.pow((form.n() + 1) as u32);
    debug_assert_eq!(&c * &c, form.eval(&f0, &BigInt::zero()));
    Ok((f0, c, BigInt::zero()))
}

/// Is the order of the form maximal at `p`? One radical–idealizer round:
/// the radical of `R/pR` via iterated Frobenius kernels, then the idealizer
/// condition solved layer by layer (a kernel mod `p` followed by exact
/// lattice membership). The order is maximal exactly when the idealizer
/// adds nothing.
pub fn p_maximal(form: &BinaryForm, p: u64) -> Result<bool> {
    let pb = BigInt::from(p);
    if !is_small_prime(&pb) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let disc = form.disc();
    if disc.is_zero() {
        return Err(Error::Inseparable);
    }
    if !(&disc % &pb).is_zero() {
        return Ok(true); // unramified: p does not divide the discriminant
    }
    let n = form.n();
    let dim = 2 * n + 1;

    // structure constants of the ζ-basis ring (e_0 = 1, e_i = ζ_i)
    let table: Vec<Vec<Vec<BigInt>>> = (1..dim)
        .map(|i| (1..dim).map(|j| nakagawa_row(form, i.min(j), i.max(j))).collect())
        .collect();
    let ring_mul = |a: &[BigInt], b: &[BigInt]| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); dim];
        for i in 0..dim {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..dim {
                if b[j].is_zero() {
                    continue;
                }
                if i == 0 {
                    out[j] += &a[0] * &b[j];
                } else if j == 0 {
                    out[i] += &a[i] * &b[0];
                } else {
                    let row = &table[i - 1][j - 1];
                    for (s, c) in out.iter_mut().zip(row.iter()) {
                        *s += &a[i] * &b[j] * c;
                    }
                }
            }
        }
        out
    };

    // Frobenius matrix mod p and its iterate with p^K ≥ dim
    let frob_pow = |a: &[BigInt]| -> Vec<BigInt> {
        // a^p via square-and-multiply in the ring, reduced mod p
        let mut acc = {
            let mut e = vec![BigInt::zero(); dim];
            e[0] = BigInt::one();
            e
        };
        let mut base: Vec<BigInt> = a.iter().map(|c| c.mod_floor(&pb)).collect();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = ring_mul(&acc, &base).iter().map(|c| c.mod_floor(&pb)).collect();
            }
            base = ring_mul(&base, &base).iter().map(|c| c.mod_floor(&pb)).collect();
            e >>= 1;
        }
        acc
    };
    let mut frob_rows = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut e = vec![BigInt::zero(); dim];
        e[i] = BigInt::one();
        frob_rows.push(frob_pow(&e));
    }
    // iterate the Frobenius until p^K ≥ dim
    let mut reps = 1usize;
    let mut power = p as usize;
    while power < dim {
        power *= p as usize;
        reps += 1;
    }
    let mut mat = frob_rows.clone();
    for _ in 1..reps {
        // mat ← mat · frob (row-vector convention)
        let mut next = vec![vec![BigInt::zero(); dim]; dim];
        for (i, row) in mat.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for j in 0..dim {
                    next[i][j] = (&next[i][j] + c * &frob_rows[k][j]).mod_floor(&pb);
                }
            }
        }
        mat = next;
    }
    let radical_mod_p = fp_kernel(&mat, &pb);

    // radical lattice J = lifts + pZ^dim, in HNF
    let mut gens: Vec<Vec<BigInt>> = radical_mod_p;
    for i in 0..dim {
        let mut r = vec![BigInt::zero(); dim];
        r[i] = pb.clone();
        gens.push(r);
    }
    let j_basis = row_hnf(gens);
    debug_assert_eq!(j_basis.len(), dim);
    let pj_basis: Vec<Vec<BigInt>> = j_basis
        .iter()
        .map(|r| r.iter().map(|x| x * &pb).collect())
        .collect();

    // layer 1: v̄·m̄_k = 0 in R/pR for every generator m_k of J
    let mut stacked: Vec<Vec<BigInt>> = vec![Vec::with_capacity(dim * dim); dim];
    for m_k in &j_basis {
        for i in 0..dim {
            let mut e = vec![BigInt::zero(); dim];
            e[i] = BigInt::one();
            let prod = ring_mul(&e, m_k);
            stacked[i].extend(prod.iter().map(|c| c.mod_floor(&pb)));
        }
    }
    let candidates_space = fp_kernel(&stacked, &pb);
    if candidates_space.is_empty() {
        return Ok(true);
    }

    // layer 2: exact check v·m_k ∈ pJ on projective candidates of the
    // layer-1 space (membership is determined by v mod p)
    let in_pj = |w: &[BigInt]| -> bool {
        let mut target: Vec<BigInt> = w.to_vec();
        for row in &pj_basis {
            let pivot = row.iter().position(|x| !x.is_zero()).expect("full rank");
            let (q, r) = target[pivot].div_rem(&row[pivot]);
            if !r.is_zero() {
                return false;
            }
            for (t, x) in target.iter_mut().zip(row.iter()) {
                *t -= &q * x;
            }
        }
        target.iter().all(|x| x.is_zero())
    };
    let k_dim = candidates_space.len();
    let mut counters = vec![0u64; k_dim];
    loop {
        // advance to the next projective representative: first nonzero
        // coordinate equal to 1
        let mut idx = 0;
        loop {
            if idx == k_dim {
                return Ok(true); // no candidate enlarges the order
            }
            counters[idx] += 1;
            if counters[idx] == p {
                counters[idx] = 0;
                idx += 1;
            } else {
                break;
            }
        }
        let leading = counters.iter().rposition(|&c| c != 0).unwrap();
        if counters[leading] != 1 {
            continue;
        }
        let mut v = vec![BigInt::zero(); dim];
        for (ci, coeff) in counters.iter().enumerate() {
            if *coeff == 0 {
                continue;
            }
            for (vi, c) in v.iter_mut().zip(candidates_space[ci].iter()) {
                *vi += BigInt::from(*coeff) * c;
            }
        }
        let ok = j_basis.iter().all(|m_k| in_pj(&ring_mul(&v, m_k)));
        if ok {
            return Ok(false); // idealizer strictly contains the order
        }
    }
}

/// The literal-square reading of the second sieve condition: reduce mod `p`,
/// strip the maximal `z`-power, and ask whether what remains is the square
/// of a polynomial (all multiplicities even and the leading unit a square).
pub fn condition_b_square(form: &BinaryForm, p: u64) -> Result<bool> {
    let pb = BigInt::from(p);
    if !is_small_prime(&pb) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    // F̄ coefficients, highest x-power first is coeff(0)
    let coeffs: Vec<BigInt> = form.coeffs().iter().map(|c| c.mod_floor(&pb)).collect();
    if coeffs.iter().all(|c| c.is_zero()) {
        return Ok(false); // nothing left after reduction
    }
    let e = coeffs.iter().position(|c| !c.is_zero()).unwrap();
    // G(x,1) with G = F̄/z^e: coefficients e..2n+1, lowest z-power first
    let g_poly: Vec<BigInt> = coeffs[e..].iter().rev().cloned().collect();
    let g = ModPoly::new(pb.clone(), g_poly)?;
    let deg = g.degree().unwrap_or(0);
    if deg % 2 == 1 {
        return Ok(false);
    }
    let (unit, factors) = g.factor(DEFAULT_FACTOR_SEED)?;
    if factors.iter().any(|(_, m)| m % 2 == 1) {
        return Ok(false);
    }
    // the leading unit must itself be a square
    if p == 2 {
        return Ok(true);
    }
    Ok(is_qr(&unit, &pb))
}

/// Squareness of the stripped reduction up to a unit: all multiplicities in
/// the factorization even, the leading unit unconstrained.
///
/// This is the reading under which the two condition densities add up to
/// the displayed product factor `1/p² + (p−1)/p^(n+1)` exactly (measured
/// exhaustively at (p,n) = (3,2): non-maximal classes 1/9, maximal-and-
/// square classes 2/27); the literal reading comes out at half of it.
pub fn condition_b_square_up_to_unit(form: &BinaryForm, p: u64) -> Result<bool> {
    let pb = BigInt::from(p);
    if !is_small_prime(&pb) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let coeffs: Vec<BigInt> = form.coeffs().iter().map(|c| c.mod_floor(&pb)).collect();
    if coeffs.iter().all(|c| c.is_zero()) {
        return Ok(false);
    }
    let e = coeffs.iter().position(|c| !c.is_zero()).unwrap();
    let g_poly: Vec<BigInt> = coeffs[e..].iter().rev().cloned().collect();
    let g = ModPoly::new(pb, g_poly)?;
    if g.degree().unwrap_or(0) % 2 == 1 {
        return Ok(false);
    }
    let (_, factors) = g.factor(DEFAULT_FACTOR_SEED)?;
    Ok(factors.iter().all(|(_, m)| m % 2 == 0))
}

/// The two mutually exclusive sieve conditions at a prime dividing the
/// squarefree part of the leading coefficient. The second condition uses
/// the unit-insensitive square reading (see
/// [`condition_b_square_up_to_unit`]).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionReport {
    pub p: u64,
    pub cond_a: bool,
    pub cond_b: bool,
}

pub fn condition_report(form: &BinaryForm, p: u64) -> Result<ConditionReport> {
    let maximal = p_maximal(form, p)?;
    Ok(ConditionReport {
        p,
        cond_a: !maximal,
        cond_b: maximal && condition_b_square_up_to_unit(form, p)?,
    })
}

/// Does `F̄` vanish at every point of the projective line mod `p`?
pub fn vanishes_on_projective_line(form: &BinaryForm, p: u64) -> bool {
    let pb = BigInt::from(p);
    for x in 0..p {
        if !(form.eval(&BigInt::from(x), &BigInt::one()) % &pb).is_zero() {
            return false;
        }
    }
    (form.eval(&BigInt::one(), &BigInt::zero()) % &pb).is_zero()
}

/// Primes dividing the squarefree part of `|f0|` (odd-valuation primes),
/// by trial division.
pub fn squarefree_part_primes(f0: &BigInt) -> Vec<u64> {
    let mut out = Vec::new();
    let mut v = f0.magnitude().clone();
    let mut p = 2u64;
    use num_traits::ToPrimitive;
    while v > 1u32.into() {
        let pb: num_bigint::BigUint = p.into();
        if (&v % &pb).is_zero() {
            let mut count = 0u32;
            while (&v % &pb).is_zero() {
                v /= &pb;
                count += 1;
            }
            if count % 2 == 1 {
                out.push(p);
            }
        }
        if &pb * &pb > v {
            if v > 1u32.into() {
                // remaining cofactor is prime with multiplicity 1
                out.push(v.to_u64().expect("desk-scale leading coefficient"));
            }
            break;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Distinct prime divisors of an integer (trial division, desk scale).
pub fn prime_divisors(v: &BigInt) -> Vec<u64> {
    let mut out = Vec::new();
    let mut v = v.magnitude().clone();
    let mut p = 2u64;
    use num_traits::ToPrimitive;
    while v > 1u32.into() {
        let pb: num_bigint::BigUint = p.into();
        if (&v % &pb).is_zero() {
            out.push(p);
            while (&v % &pb).is_zero() {
                v /= &pb;
            }
        }
        if &pb * &pb > v {
            if v > 1u32.into() {
                out.push(v.to_u64().expect("desk-scale integer"));
            }
            break;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    out
}

/// The everywhere-local certificate.
#[derive(Clone, Debug, Serialize)]
pub struct EverywhereLocalReport {
    pub real_witness: (String, String, String),
    pub reports: Vec<LocalReport>,
    pub soluble_everywhere: bool,
    /// Primes where the reduction vanishes on the whole projective line
    /// (the screen that signals possible insolubility at that prime).
    pub vanishing_screen: Vec<u64>,
    /// Primes beyond the explicit list are witnessed by the scaled trivial
    /// point whenever `v_p(f0)` is even — in particular all `p ∤ f0`; this
    /// subsumes the smooth-fiber assertion for large good primes.
    pub asserted_beyond: u64,
}

/// Runs the real check and the p-adic decision for all primes up to
/// `max(prime_budget, 4(2n+1)²)` plus every prime dividing `2·f0` with odd
/// valuation in `f0`. Solubility at any prime not run is witnessed by the
/// scaled trivial point, which exists whenever `v_p(f0)` is even.
pub fn everywhere_local(form: &BinaryForm, prime_budget: u64) -> Result<EverywhereLocalReport> {
    if form.leading().is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    if form.disc().is_zero() {
        return Err(Error::Inseparable);
    }
    let n = form.n() as u64;
    let threshold = prime_budget.max(4 * (2 * n + 1) * (2 * n + 1));
    let mut primes: Vec<u64> = Vec::new();
    let mut p = BigInt::from(1);
    loop {
        p = next_prime(&p);
        use num_traits::ToPrimitive;
        let pu = p.to_u64().unwrap();
        if pu > threshold {
            break;
        }
        primes.push(pu);
    }
    for extra in squarefree_part_primes(form.leading()) {
        if !primes.contains(&extra) {
            primes.push(extra);
        }
    }
    primes.sort_unstable();

    let mut reports = Vec::new();
    let mut all_ok = true;
    let mut screen = Vec::new();
    for &q in &primes {
        let rep = zp_soluble(form, q)?;
        if !rep.soluble {
            all_ok = false;
        }
        reports.push(rep);
    }
    for q in squarefree_part_primes(form.leading()) {
        if vanishes_on_projective_line(form, q) {
            screen.push(q);
        }
    }
    let real = real_soluble(form)?;
    Ok(EverywhereLocalReport {
        real_witness: (real.0.to_string(), real.1.to_string(), real.2.to_string()),
        reports,
        soluble_everywhere: all_ok,
        vanishing_screen: screen,
        asserted_beyond: threshold,
    })
}

fn next_prime(p: &BigInt) -> BigInt {
    let mut q = p + 1u32;
    while !is_small_prime(&q) {
        q += 1u32;
    }
    q
}
