//! Closed-form density constants, factor-count statistics over prime
//! fields, orthogonal group orders and local volumes, the explicit
//! upper-bound assemblies, a Monte-Carlo estimator for the real-root
//! distribution, and the sign-sequence classifier of real solutions.

use crate::forms::BinaryForm;
use crate::kernel::{is_small_prime, sturm_count, IntPoly};
use crate::localsolve::squarefree_part_primes;
use crate::orbits::linear_cofactor;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_int(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// `2^e` for signed `e`.
fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        rat_int(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// The two density constants of a leading coefficient.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub f0: String,
    pub n: usize,
    pub squarefree_part_primes: Vec<u64>,
    pub mu: String,
    pub mu_prime: String,
    pub one_minus_mu: String,
    pub mu_prime_minus_mu: String,
}

/// `μ = ∏_(p|𝒻) (1/p² + (p−1)/p^(n+1))` over the primes dividing the
/// squarefree part of `|f0|`; empty product = 1.
pub fn mu(f0: &BigInt, n: usize) -> Result<BigRational> {
    if f0.is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let mut acc = BigRational::one();
    for p in squarefree_part_primes(f0) {
        acc *= mu_factor(p, n);
    }
    Ok(acc)
}

fn mu_factor(p: u64, n: usize) -> BigRational {
    let p = BigInt::from(p);
    BigRational::new(BigInt::one(), &p * &p)
        + BigRational::new(&p - 1u32, p.pow(n as u32 + 1))
}

/// `μ′ = ∏_(p|𝒻) (1 − p^(−p))`.
pub fn mu_prime(f0: &BigInt) -> Result<BigRational> {
    if f0.is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let mut acc = BigRational::one();
    for p in squarefree_part_primes(f0) {
        acc *= BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(p).pow(p as u32));
    }
    Ok(acc)
}

pub fn density_report(f0: &BigInt, n: usize) -> Result<DensityReport> {
    let m = mu(f0, n)?;
    let mp = mu_prime(f0)?;
    Ok(DensityReport {
        f0: f0.to_string(),
        n,
        squarefree_part_primes: squarefree_part_primes(f0),
        mu: m.to_string(),
        mu_prime: mp.to_string(),
        one_minus_mu: (BigRational::one() - &m).to_string(),
        mu_prime_minus_mu: (&mp - &m).to_string(),
    })
}

/// One row pair of the limiting-density table for a set of primes.
#[derive(Clone, Debug, Serialize)]
pub struct TableEntry {
    pub primes: Vec<u64>,
    /// `lim (1 − μ) = 1 − ∏ p^(−2)`, exact.
    pub one_minus_mu_limit: String,
    /// the same value rounded down to tenths of a percent
    pub one_minus_mu_pct: String,
    /// `lim (μ′ − μ) = ∏(1 − p^(−p)) − ∏ p^(−2)`, exact.
    pub gap_limit: String,
    pub gap_pct: String,
}

/// Rounded **down** to tenths of a percent, e.g. `0.9722… → "97.2"`.
pub fn percent_floor_tenths(v: &BigRational) -> String {
    let scaled = v * rat_int(BigInt::from(1000));
    let tenths = scaled.floor().to_integer();
    let whole = &tenths / BigInt::from(10);
    let frac = (&tenths % BigInt::from(10)).magnitude().clone();
    format!("{whole}.{frac}")
}

/// The seven displayed prime sets with both limiting densities.
pub fn table1() -> Vec<TableEntry> {
    let sets: [&[u64]; 7] = [
        &[2],
        &[3],
        &[5],
        &[2, 3],
        &[2, 5],
        &[3, 7],
        &[2, 3, 7],
    ];
    sets.iter()
        .map(|primes| {
            let mut inv_sq = BigRational::one();
            let mut mu_p = BigRational::one();
            for &p in primes.iter() {
                let pb = BigInt::from(p);
                inv_sq *= BigRational::new(BigInt::one(), &pb * &pb);
                mu_p *= BigRational::one() - BigRational::new(BigInt::one(), pb.pow(p as u32));
            }
            let one_minus = BigRational::one() - &inv_sq;
            let gap = &mu_p - &inv_sq;
            TableEntry {
                primes: primes.to_vec(),
                one_minus_mu_limit: one_minus.to_string(),
                one_minus_mu_pct: percent_floor_tenths(&one_minus),
                gap_limit: gap.to_string(),
                gap_pct: percent_floor_tenths(&gap),
            }
        })
        .collect()
}

/// Number of monic polynomials of degree `deg` over `F_p` with exactly `m`
/// distinct irreducible factors, by expanding
/// `∏_d (1 + z·x^d/(1−x^d))^(N_p(d))` to bidegree `(deg, m)`.
pub fn count_factor_classes(p: u64, deg: usize, m: usize) -> Result<BigInt> {
    Ok(factor_class_row(p, deg)?
        .get(m)
        .cloned()
        .unwrap_or_else(BigInt::zero))
}

/// All counts for a fixed degree at once: entry `m` of the result.
pub fn factor_class_row(p: u64, deg: usize) -> Result<Vec<BigInt>> {
    if !is_small_prime(&BigInt::from(p)) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if deg == 0 {
        return Err(Error::Precondition("need degree ≥ 1".into()));
    }
    // series[i][s]: coefficient of x^i z^s
    let mut series = vec![vec![BigInt::zero(); deg + 1]; deg + 1];
    series[0][0] = BigInt::one();
    for d in 1..=deg {
        let n_d = irreducible_count(p, d);
        // factor: Σ_s C(N_d, s) z^s Σ_j C(s+j−1, j) x^(d(s+j))
        let mut fac = vec![vec![BigInt::zero(); deg + 1]; deg + 1];
        fac[0][0] = BigInt::one();
        let mut s = 1usize;
        while d * s <= deg {
            let cns = binomial_big(&n_d, s);
            if cns.is_zero() {
                break; // N_d < s: no way to pick s distinct irreducibles
            }
            let mut j = 0usize;
            while d * (s + j) <= deg {
                let weight = binomial_usize(s + j - 1, j);
                fac[d * (s + j)][s] = &cns * weight;
                j += 1;
            }
            s += 1;
        }
        series = series_mul(&series, &fac, deg);
    }
    Ok((0..=deg).map(|m| series[deg][m].clone()).collect())
}

fn series_mul(
    a: &[Vec<BigInt>],
    b: &[Vec<BigInt>],
    deg: usize,
) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![BigInt::zero(); deg + 1]; deg + 1];
    for i in 0..=deg {
        for s in 0..=deg {
            if a[i][s].is_zero() {
                continue;
            }
            for i2 in 0..=deg - i {
                for s2 in 0..=deg - s {
                    if b[i2][s2].is_zero() {
                        continue;
                    }
                    let add = &a[i][s] * &b[i2][s2];
                    out[i + i2][s + s2] += add;
                }
            }
        }
    }
    out
}

/// `N_p(d) = (1/d)·Σ_(e|d) μ(e)·p^(d/e)`: monic irreducibles of degree `d`.
pub fn irreducible_count(p: u64, d: usize) -> BigInt {
    let mut total = BigInt::zero();
    for e in 1..=d {
        if d % e != 0 {
            continue;
        }
        let mu_e = moebius(e);
        if mu_e == 0 {
            continue;
        }
        total += BigInt::from(mu_e) * BigInt::from(p).pow((d / e) as u32);
    }
    &total / BigInt::from(d as u64)
}

fn moebius(mut v: usize) -> i64 {
    let mut factors = 0;
    let mut p = 2;
    while p * p <= v {
        if v % p == 0 {
            v /= p;
            if v % p == 0 {
                return 0;
            }
            factors += 1;
        }
        p += 1;
    }
    if v > 1 {
        factors += 1;
    }
    if factors % 2 == 0 {
        1
    } else {
        -1
    }
}

fn binomial_big(n: &BigInt, k: usize) -> BigInt {
    if n < &BigInt::from(k as u64) {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - BigInt::from(i as u64)) / BigInt::from(i as u64 + 1);
    }
    acc
}

fn binomial_usize(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    binomial_big(&BigInt::from(n as u64), k)
}

/// Monic polynomials over `Z/8` of degree `2n+1` whose mod-2 reduction has
/// `m` distinct irreducible factors: each mod-2 coefficient has 4 lifts.
pub fn count_i8(n: usize, m: usize) -> Result<BigInt> {
    let deg = 2 * n + 1;
    Ok(BigInt::from(4).pow(deg as u32) * count_factor_classes(2, deg, m)?)
}

/// `#G(Z/pZ) = p^(n²)·∏_(i=1)^n (p^(2i) − 1)` for odd primes.
pub fn group_order_g_mod_p(n: usize, p: u64) -> Result<BigInt> {
    if p == 2 || !is_small_prime(&BigInt::from(p)) {
        return Err(Error::Precondition("need an odd prime".into()));
    }
    let pb = BigInt::from(p);
    let mut acc = pb.pow((n * n) as u32);
    for i in 1..=n {
        acc *= pb.pow(2 * i as u32) - 1u32;
    }
    Ok(acc)
}

/// `#Ĝ(Z/8Z) = 2^(5n²+3n+3)·(2^n − 1)·∏_(i=1)^(n−1)(2^(2i) − 1)` for
/// `n ≥ 1`, and `4` for `n = 0`.
pub fn group_order_ghat_mod8(n: usize) -> BigInt {
    if n == 0 {
        return BigInt::from(4);
    }
    let mut acc = BigInt::one() << (5 * n * n + 3 * n + 3);
    acc *= (BigInt::one() << n) - 1u32;
    for i in 1..n {
        acc *= (BigInt::one() << (2 * i)) - 1u32;
    }
    acc
}

/// `Vol(G(Z_p)) = #G(Z/pZ)/p^(2n²+n) = ∏_(i=1)^n (1 − p^(−2i))`, odd `p`.
pub fn vol_g_zp(n: usize, p: u64) -> Result<BigRational> {
    let order = group_order_g_mod_p(n, p)?;
    Ok(BigRational::new(order, BigInt::from(p).pow((2 * n * n + n) as u32)))
}

/// `#G(Z/8Z)/8^(2n²+n) = #Ĝ(Z/8Z)/(4·8^(2n²+n))`, exact.
pub fn g8_volume_ratio(n: usize) -> BigRational {
    let ghat = group_order_ghat_mod8(n);
    let denom = BigInt::from(4) * BigInt::from(8).pow((2 * n * n + n) as u32);
    BigRational::new(ghat, denom)
}

/// Brute-force order of `{g : gᵀ·A₀·g = A₀, det g = 1}` over `F_p` for
/// `n = 1` (3×3 matrices), by column enumeration with Gram pruning.
pub fn brute_force_g_mod_p_n1(p: u64) -> BigInt {
    let dim = 3usize;
    // A₀ is the anti-identity
    let gram = |u: &[u64; 3], v: &[u64; 3]| -> u64 { (u[0] * v[2] + u[1] * v[1] + u[2] * v[0]) % p };
    let all: Vec<[u64; 3]> = (0..p)
        .flat_map(|a| (0..p).flat_map(move |b| (0..p).map(move |c| [a, b, c])))
        .collect();
    let c1s: Vec<&[u64; 3]> = all.iter().filter(|c| gram(c, c) == 0).collect();
    let mut count = BigInt::zero();
    for c1 in &c1s {
        let c2s: Vec<&[u64; 3]> = all
            .iter()
            .filter(|c| gram(c, c) == 1 && gram(c1, c) == 0)
            .collect();
        for c2 in &c2s {
            for c3 in all.iter() {
                if gram(c3, c3) != 0 || gram(c1, c3) != 1 || gram(c2, c3) != 0 {
                    continue;
                }
                // det = 1 over F_p
                let m = [c1, c2, &c3];
                let det = (m[0][0] * (m[1][1] * m[2][2] + p * p - m[1][2] * m[2][1])
                    + m[0][1] * (m[1][2] * m[2][0] + p * p - m[1][0] * m[2][2])
                    + m[0][2] * (m[1][0] * m[2][1] + p * p - m[1][1] * m[2][0]))
                    % p;
                if det == 1 {
                    count += 1;
                }
            }
        }
        let _ = dim;
    }
    count
}

/// Brute-force order of `{g : gᵀ·A₀·g ≡ A₀ mod 8}` (no determinant
/// condition) for `n ∈ {0, 1}`, with Gram-column pruning.
pub fn brute_force_ghat_mod8(n: usize) -> BigInt {
    match n {
        0 => {
            let mut count = 0u64;
            for g in 0..8u64 {
                if (g * g) % 8 == 1 {
                    count += 1;
                }
            }
            BigInt::from(count)
        }
        1 => {
            let m = 8u64;
            let gram =
                |u: &[u64; 3], v: &[u64; 3]| -> u64 { (u[0] * v[2] + u[1] * v[1] + u[2] * v[0]) % m };
            let all: Vec<[u64; 3]> = (0..m)
                .flat_map(|a| (0..m).flat_map(move |b| (0..m).map(move |c| [a, b, c])))
                .collect();
            let mut count = BigInt::zero();
            let c1s: Vec<&[u64; 3]> = all.iter().filter(|c| gram(c, c) == 0).collect();
            for c1 in &c1s {
                let c2s: Vec<&[u64; 3]> = all
                    .iter()
                    .filter(|c| gram(c, c) == 1 && gram(c1, c) == 0)
                    .collect();
                for c2 in &c2s {
                    for c3 in all.iter() {
                        if gram(c3, c3) == 0 && gram(c1, c3) == 1 && gram(c2, c3) == 0 {
                            count += 1;
                        }
                    }
                }
            }
            count
        }
        _ => panic!("brute force only runs at n ∈ {{0, 1}}"),
    }
}

/// The assembled bound constants.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub f0: String,
    pub distinct_prime_factors_of_f0: usize,
    /// `2^(7+2ν−n)`, exact.
    pub coarse_delta: String,
    /// `2^(7−n)`, exact.
    pub coarse_delta_max: String,
    /// The displayed product with exact factor counts, the `3/2·2^(−n)`
    /// archimedean estimate, and a certified odd-prime volume bound.
    pub refined_delta_max: String,
    pub refined_delta_max_approx: f64,
    pub volume_product_upper: String,
}

/// Coarse bounds plus the refined assembly at the given `n` and `f0`.
pub fn coarse_bounds(n: usize, f0: &BigInt) -> Result<BoundReport> {
    if n == 0 || f0.is_zero() {
        return Err(Error::Precondition("need n ≥ 1 and f0 ≠ 0".into()));
    }
    let nu = crate::localsolve::prime_divisors(f0).len();
    let coarse_delta = pow2(7 + 2 * nu as i64 - n as i64);
    let coarse_delta_max = pow2(7 - n as i64);
    let vol = volume_product_upper(DEFAULT_VOLUME_PRIME_CUTOFF)?;
    let refined = refined_delta_max_with_volume(n, &vol)?;
    Ok(BoundReport {
        n,
        f0: f0.to_string(),
        distinct_prime_factors_of_f0: nu,
        coarse_delta: coarse_delta.to_string(),
        coarse_delta_max: coarse_delta_max.to_string(),
        refined_delta_max: refined.to_string(),
        refined_delta_max_approx: rational_to_f64(&refined),
        volume_product_upper: vol.to_string(),
    })
}

pub fn rational_to_f64(v: &BigRational) -> f64 {
    v.numer().to_f64().unwrap_or(f64::NAN) / v.denom().to_f64().unwrap_or(f64::NAN)
}

/// The refined upper bound on the density of soluble members among forms
/// passing the full sieve:
/// `2 · (3/2)·2^n · Σ_m (12/2^(2n+m−1))·(#G(Z/8)/8^(2n²+n))·(#I₈(m)/8^(2n+1)) · V`
/// where `V` certifies `∏_(p>2) Vol(G(Z_p))^(−1)` from above.
///
/// The archimedean factor uses `(2m+1)/2^(n+m) ≤ (3/2)·2^(−n)` with the
/// real-root probabilities summing to 1; keeping the `2^(−n)` weight is what
/// makes the bound drop below 1 at n = 5, 6.
pub fn refined_delta_max(n: usize) -> Result<BigRational> {
    let vol = volume_product_upper(DEFAULT_VOLUME_PRIME_CUTOFF)?;
    refined_delta_max_with_volume(n, &vol)
}

fn refined_delta_max_with_volume(n: usize, vol_upper: &BigRational) -> Result<BigRational> {
    let arch = rat(3, 2) * pow2(n as i64);
    Ok(rat(2, 1) * arch * two_adic_sum(n)? * vol_upper)
}

/// `Σ_(m=1)^(2n+1) (12/2^(2n+m−1))·g8·(#I₈(m)/8^(2n+1))`, exact.
fn two_adic_sum(n: usize) -> Result<BigRational> {
    let g8 = g8_volume_ratio(n);
    let deg = 2 * n + 1;
    let row = factor_class_row(2, deg)?;
    let denominator = rat_int(BigInt::from(8).pow(deg as u32));
    let mut sum = BigRational::zero();
    for (m, count) in row.iter().enumerate().skip(1) {
        if count.is_zero() {
            continue;
        }
        let i8_ratio = rat_int(BigInt::from(4).pow(deg as u32) * count) / &denominator;
        sum += rat(12, 1) * pow2(-(2 * n as i64 + m as i64 - 1)) * &g8 * i8_ratio;
    }
    Ok(sum)
}

/// Monte-Carlo substitute for the archimedean estimate: plugs empirical
/// real-root probabilities into `Σ (2m+1)/2^(n+m)·μ̂(m)`. Not rigorous.
pub fn refined_delta_max_heuristic(n: usize, samples: u64, seed: u64) -> Result<BigRational> {
    let dist = mc_real_root_distribution(n, samples, seed)?;
    let mut arch = BigRational::zero();
    for (m, est) in dist.estimates.iter().enumerate() {
        arch += rat(2 * m as i64 + 1, 1) * pow2(-(n as i64 + m as i64)) * est;
    }
    let arch = arch * pow2(2 * n as i64);
    let vol = volume_product_upper(DEFAULT_VOLUME_PRIME_CUTOFF)?;
    Ok(rat(2, 1) * arch * two_adic_sum(n)? * vol)
}

/// The exact left side and squared comparison of the odd-prime factor
/// estimate `Σ_m (p+1)/2^(m−1) · #I_p(m)/p^(2n+1) ≤ 6p/√(2n+1)`.
#[derive(Clone, Debug, Serialize)]
pub struct ChainCheck {
    pub p: u64,
    pub n: usize,
    pub lhs: String,
    /// `36·p²/(2n+1)`; the claim holds iff `lhs² ≤` this.
    pub rhs_squared: String,
    pub ok: bool,
}

pub fn lemma_chain_check(p: u64, n: usize) -> Result<ChainCheck> {
    if p == 2 {
        return Err(Error::Precondition("the chain is for odd primes".into()));
    }
    let deg = 2 * n + 1;
    let row = factor_class_row(p, deg)?;
    let pdeg = rat_int(BigInt::from(p).pow(deg as u32));
    let mut lhs = BigRational::zero();
    for (m, count) in row.iter().enumerate().skip(1) {
        if count.is_zero() {
            continue;
        }
        lhs += rat(p as i64 + 1, 1) * pow2(-(m as i64 - 1)) * rat_int(count.clone()) / &pdeg;
    }
    let rhs_squared = rat(36 * (p * p) as i64, deg as i64);
    let ok = &lhs * &lhs <= rhs_squared;
    Ok(ChainCheck {
        p,
        n,
        lhs: lhs.to_string(),
        rhs_squared: rhs_squared.to_string(),
        ok,
    })
}

pub const DEFAULT_VOLUME_PRIME_CUTOFF: u64 = 10_000;

/// Certified upper bound on `∏_(p>2) ∏_(i≥1) (1 − p^(−2i))^(−1)`.
///
/// Exact factors for primes up to the cutoff (with per-prime index
/// truncation folded into an exponential tail), plus the prime tail
/// `Σ_(m>cutoff) 2/(m²−1) = 1/cutoff + 1/(cutoff+1)`. All roundings are
/// upward, so the result is a true upper bound; it never increases as the
/// cutoff grows.
pub fn volume_product_upper(prime_cutoff: u64) -> Result<BigRational> {
    if prime_cutoff < 3 {
        return Err(Error::Precondition("cutoff must be ≥ 3".into()));
    }
    let mut product = BigRational::one();
    let mut tail_log = BigRational::zero();
    let mut p = 3u64;
    while p <= prime_cutoff {
        if is_small_prime(&BigInt::from(p)) {
            let depth = if p < 100 { 12 } else { 1 };
            for i in 1..=depth {
                let q = BigInt::from(p).pow(2 * i as u32);
                product *= BigRational::new(q.clone(), q - 1u32);
                product = round_up(&product);
            }
            // Σ_{i>depth} −log(1−p^(−2i)) ≤ 2·p^(−2(depth+1))/(1−p^(−2)) ≤ 3·p^(−2(depth+1))
            let t = BigRational::new(BigInt::from(3), BigInt::from(p).pow(2 * (depth as u32 + 1)));
            tail_log += round_up(&t);
        }
        p += if p == 3 { 2 } else { 2 };
    }
    // primes beyond the cutoff: −log Vol ≤ 2/(p²−1), summed over integers
    tail_log += BigRational::new(BigInt::one(), BigInt::from(prime_cutoff))
        + BigRational::new(BigInt::one(), BigInt::from(prime_cutoff + 1));
    // e^x ≤ 1 + x + x² for 0 ≤ x ≤ 1/2
    debug_assert!(tail_log <= rat(1, 2));
    let exp_up = BigRational::one() + &tail_log + &tail_log * &tail_log;
    Ok(round_up(&(product * exp_up)))
}

/// Round a positive rational up onto the `2^(−64)` grid, keeping
/// denominators bounded.
fn round_up(v: &BigRational) -> BigRational {
    let scale = BigInt::one() << 64usize;
    let scaled = v * rat_int(scale.clone());
    let ceil = scaled.ceil().to_integer();
    BigRational::new(ceil, scale)
}

/// Estimated distribution of the number of real roots of a random monic
/// polynomial of degree `2n+1` with coefficients uniform in `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct RealRootDistribution {
    pub n: usize,
    pub samples: u64,
    pub counts: Vec<u64>,
    /// `estimates[m]` ≈ probability of exactly `2m+1` real roots.
    pub estimates: Vec<BigRational>,
}

/// Samples coefficients on a dyadic rational grid (the root count is
/// computed exactly per sample via a Sturm chain) in blocks with per-block
/// seeds derived from the master seed, merged in block order.
pub fn mc_real_root_distribution(
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<RealRootDistribution> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    const BLOCK: u64 = 256;
    const GRID_BITS: u32 = 20;
    let deg = 2 * n + 1;
    let mut counts = vec![0u64; n + 1];
    let mut produced = 0u64;
    let mut block_idx = 0u64;
    while produced < samples {
        let block_seed = seed ^ block_idx.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(block_seed);
        let this_block = BLOCK.min(samples - produced);
        for _ in 0..this_block {
            loop {
                // numerators of c_i on the grid k/2^GRID_BITS, k ∈ [−2^GRID_BITS, 2^GRID_BITS]
                let bound = 1i64 << GRID_BITS;
                let mut coeffs: Vec<BigInt> = (0..deg)
                    .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
                    .collect();
                // monic leading term scaled by the common denominator
                coeffs.push(BigInt::one() << GRID_BITS);
                let f = IntPoly::new(coeffs);
                if !f.is_squarefree() {
                    continue; // measure-zero event; resample
                }
                let roots = sturm_count(&f, None, None)?;
                debug_assert!(roots % 2 == 1);
                counts[(roots - 1) / 2] += 1;
                break;
            }
        }
        produced += this_block;
        block_idx += 1;
    }
    let estimates = counts
        .iter()
        .map(|&c| BigRational::new(BigInt::from(c), BigInt::from(samples)))
        .collect();
    Ok(RealRootDistribution {
        n,
        samples,
        counts,
        estimates,
    })
}

/// The class of a real solution: the number `m` (the polynomial has `2m+1`
/// real roots) and the index `τ ∈ {1, …, 2m+1}` of its sign sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignSequence {
    pub m: usize,
    pub tau: usize,
    /// Set when `z0 = 0`: such solutions sit on the boundary shared by two
    /// case tables and get the common label `τ = m+1`.
    pub z0_boundary: bool,
}

/// Classifies `(x0, z0)` with `F(x0, z0) ≥ 0` by the signs of
/// `f0·(x0 − θ_i z0)` over the increasing real roots `θ_i` of `F(x,1)`,
/// replacing the vanishing entry of a Weierstrass solution by the sign of
/// `f0·F̃(x0,z0)` for the degree-2n cofactor `F̃`.
pub fn sign_sequence(form: &BinaryForm, x0: &BigInt, z0: &BigInt) -> Result<SignSequence> {
    if form.leading().is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let value = form.eval(x0, z0);
    if value.is_negative() {
        return Err(Error::Precondition("need F(x0,z0) ≥ 0".into()));
    }
    let f = form.poly_x();
    if !f.is_squarefree() {
        return Err(Error::Inseparable);
    }
    let total_roots = sturm_count(&f, None, None)?;
    debug_assert!(total_roots % 2 == 1);
    let m = (total_roots - 1) / 2;
    let f0_positive = form.leading().is_positive();

    if z0.is_zero() {
        // all entries share the sign of f0·x0, which F ≥ 0 forces positive
        return Ok(SignSequence {
            m,
            tau: m + 1,
            z0_boundary: true,
        });
    }

    let rho = BigRational::new(x0.clone(), z0.clone());
    let le = sturm_count(&f, None, Some(&rho))?;
    let weierstrass = value.is_zero();
    let below = le - usize::from(weierstrass);
    let s_below = f0_positive == z0.is_positive(); // sign of f0·z0
    // assemble the sign vector: `below` copies of s_below, the optional
    // Weierstrass entry, then the rest flipped
    let mut signs = vec![s_below; below];
    if weierstrass {
        let g = linear_cofactor(form, x0, z0)?;
        // F̃(x0,z0) = z0·G(x0,z0)
        let mut gval = BigInt::zero();
        let d = 2 * form.n();
        let mut zp = BigInt::one();
        for i in 0..=d {
            gval = gval * x0 + &g[i] * &zp;
            if i < d {
                zp *= z0;
            }
        }
        let wval = z0 * gval;
        if wval.is_zero() {
            return Err(Error::Inseparable);
        }
        signs.push(f0_positive == wval.is_positive());
    }
    while signs.len() < 2 * m + 1 {
        signs.push(!s_below);
    }

    // match against the case tables: for f0·z0 > 0 the sequences are
    // (+)^a(−)^(2m+1−a) with a odd and τ = (a+1)/2; for f0·z0 < 0 they are
    // (−)^a(+)^(2m+1−a) with a even and τ = m+1+a/2
    let lead = signs[0];
    let a = signs.iter().take_while(|&&s| s == lead).count();
    if signs[a..].iter().any(|&s| s == lead) {
        return Err(Error::Internal("sign vector is not two-block".into()));
    }
    let tau = if s_below {
        if !signs[0] || a % 2 == 0 {
            return Err(Error::Internal("unexpected sign pattern".into()));
        }
        (a + 1) / 2
    } else {
        // leading block is negative unless it is empty (all +: a-block = 0)
        let neg_prefix = if signs[0] { 0 } else { a };
        if neg_prefix % 2 == 1 {
            return Err(Error::Internal("unexpected sign pattern".into()));
        }
        m + 1 + neg_prefix / 2
    };
    Ok(SignSequence {
        m,
        tau,
        z0_boundary: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ModPoly, DEFAULT_FACTOR_SEED};

    #[test]
    fn mu_examples() {
        assert_eq!(mu(&BigInt::from(2), 5).unwrap(), rat(17, 64));
        assert_eq!(mu(&BigInt::from(4), 3).unwrap(), BigRational::one());
        assert_eq!(mu_prime(&BigInt::from(4)).unwrap(), BigRational::one());
        // f0 = 6: limit of 1−μ as n→∞ is 1 − 1/36
        let big_n = mu(&BigInt::from(6), 40).unwrap();
        let gap = (BigRational::one() - big_n) - rat(35, 36);
        assert!(gap.clone().abs() < rat(1, 1_000_000));
        // census comparison constant: 1 − μ_3(2) = 22/27
        assert_eq!(
            BigRational::one() - mu(&BigInt::from(3), 2).unwrap(),
            rat(22, 27)
        );
    }

    #[test]
    fn mu_decreases_to_inverse_square_limit() {
        let f0 = BigInt::from(6);
        let limit = rat(1, 36);
        let mut prev = mu(&f0, 1).unwrap();
        for n in 2..12 {
            let cur = mu(&f0, n).unwrap();
            assert!(cur < prev);
            assert!(cur > limit);
            prev = cur;
        }
    }

    #[test]
    fn table1_matches_all_fourteen_printed_values() {
        let rows = table1();
        let expect: Vec<(&[u64], &str, &str)> = vec![
            (&[2], "75.0", "50.0"),
            (&[3], "88.8", "85.1"),
            (&[5], "96.0", "95.9"),
            (&[2, 3], "97.2", "69.4"),
            (&[2, 5], "99.0", "73.9"),
            (&[3, 7], "99.7", "96.0"),
            (&[2, 3, 7], "99.9", "72.1"),
        ];
        assert_eq!(rows.len(), expect.len());
        for (row, (primes, pct1, pct2)) in rows.iter().zip(expect) {
            assert_eq!(row.primes, primes);
            assert_eq!(row.one_minus_mu_pct, pct1, "{primes:?}");
            assert_eq!(row.gap_pct, pct2, "{primes:?}");
        }
    }

    #[test]
    fn factor_class_examples() {
        assert_eq!(count_factor_classes(2, 3, 1).unwrap(), BigInt::from(4));
        assert_eq!(count_factor_classes(2, 3, 2).unwrap(), BigInt::from(4));
        assert_eq!(count_factor_classes(2, 3, 3).unwrap(), BigInt::zero());
        assert_eq!(count_factor_classes(3, 3, 3).unwrap(), BigInt::one());
        for (p, deg) in [(2u64, 4usize), (3, 3), (5, 2)] {
            assert_eq!(count_factor_classes(p, deg, 0).unwrap(), BigInt::zero());
        }
    }

    #[test]
    fn factor_class_row_sums_to_p_deg() {
        for p in [2u64, 3, 5, 7] {
            for deg in 1..=6 {
                let row = factor_class_row(p, deg).unwrap();
                let total: BigInt = row.iter().sum();
                assert_eq!(total, BigInt::from(p).pow(deg as u32), "p={p} deg={deg}");
            }
        }
    }

    #[test]
    fn factor_class_matches_exhaustive_factorization() {
        for p in [2u64, 3] {
            for deg in 1..=5usize {
                let mut counts = vec![0u64; deg + 1];
                // enumerate all monic polynomials of the given degree
                let total = (p as u64).pow(deg as u32);
                for idx in 0..total {
                    let mut coeffs = Vec::with_capacity(deg + 1);
                    let mut v = idx;
                    for _ in 0..deg {
                        coeffs.push(BigInt::from(v % p));
                        v /= p;
                    }
                    coeffs.push(BigInt::one());
                    let f = ModPoly::new(BigInt::from(p), coeffs).unwrap();
                    let (_, factors) = f.factor(DEFAULT_FACTOR_SEED).unwrap();
                    counts[factors.len()] += 1;
                }
                let row = factor_class_row(p, deg).unwrap();
                for m in 0..=deg {
                    assert_eq!(
                        row[m],
                        BigInt::from(counts[m]),
                        "p={p} deg={deg} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn i8_counts() {
        assert_eq!(count_i8(1, 1).unwrap(), BigInt::from(256));
        // partition: Σ_m #I₈(m) = 8^(2n+1)
        for n in 1..4usize {
            let deg = 2 * n + 1;
            let total: BigInt = (0..=deg)
                .map(|m| count_i8(n, m).unwrap())
                .sum();
            assert_eq!(total, BigInt::from(8).pow(deg as u32));
        }
    }

    #[test]
    fn group_order_formulas() {
        assert_eq!(group_order_g_mod_p(1, 3).unwrap(), BigInt::from(24));
        assert_eq!(group_order_ghat_mod8(0), BigInt::from(4));
        assert_eq!(group_order_ghat_mod8(1), BigInt::from(2048));
        // vol identity
        assert_eq!(
            vol_g_zp(1, 3).unwrap(),
            rat(24, 27)
        );
    }

    #[test]
    fn brute_force_group_orders_match_formulas() {
        assert_eq!(brute_force_g_mod_p_n1(3), BigInt::from(24));
        assert_eq!(brute_force_ghat_mod8(0), BigInt::from(4));
        assert_eq!(brute_force_ghat_mod8(1), BigInt::from(2048));
    }

    #[test]
    fn coarse_bound_examples() {
        let rep = coarse_bounds(10, &BigInt::from(3)).unwrap();
        assert_eq!(rep.coarse_delta, "1/2");
        let rep7 = coarse_bounds(7, &BigInt::from(3)).unwrap();
        assert_eq!(rep7.coarse_delta_max, "1");
    }

    #[test]
    fn refined_bound_below_one_at_five_and_six() {
        let r5 = refined_delta_max(5).unwrap();
        let r6 = refined_delta_max(6).unwrap();
        assert!(r5 < BigRational::one(), "refined(5) = {r5}");
        assert!(r6 < BigRational::one(), "refined(6) = {r6}");
        // and the refinement never exceeds the coarse closed form
        for n in 5..=12usize {
            let refined = refined_delta_max(n).unwrap();
            assert!(refined <= pow2(7 - n as i64), "n={n}");
        }
    }

    #[test]
    fn lemma_chain_small_cases() {
        let c = lemma_chain_check(3, 20).unwrap();
        assert!(c.ok, "{c:?}");
        // the bound is asymptotic; report honestly at tiny n either way
        let c_small = lemma_chain_check(3, 1).unwrap();
        let lhs: BigRational = c_small.lhs.parse().unwrap();
        let rhs: BigRational = c_small.rhs_squared.parse().unwrap();
        assert_eq!(c_small.ok, &lhs * &lhs <= rhs);
    }

    #[test]
    fn volume_product_properties() {
        let v100 = volume_product_upper(100).unwrap();
        let v1000 = volume_product_upper(1000).unwrap();
        assert!(v1000 <= v100, "cutoff growth must not increase the bound");
        assert!(v100 < rat(2, 1));
        // lower bound: the exact partial product over p ≤ 100 with i ≤ 3
        let mut partial = BigRational::one();
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
            73, 79, 83, 89, 97]
        {
            for i in 1..=3u32 {
                let q = BigInt::from(p).pow(2 * i);
                partial *= BigRational::new(q.clone(), q - 1u32);
            }
        }
        assert!(v100 >= partial);
    }

    #[test]
    fn mc_distribution_sane() {
        let d = mc_real_root_distribution(1, 800, 7).unwrap();
        let total: BigRational = d.estimates.iter().sum();
        assert!(total.is_one());
        // both root counts occur for cubics with coefficients in [−1,1]
        assert!(d.counts[0] > 0 && d.counts[1] > 0);
        // two seeds agree within 3σ of a binomial
        let d2 = mc_real_root_distribution(1, 800, 8).unwrap();
        let p1 = rational_to_f64(&d.estimates[1]);
        let p2 = rational_to_f64(&d2.estimates[1]);
        let sigma = (p1 * (1.0 - p1) / 800.0).sqrt().max(1e-3);
        assert!((p1 - p2).abs() < 3.0 * (2.0f64).sqrt() * sigma, "{p1} vs {p2}");
    }

    #[test]
    fn mc_determinism() {
        let a = mc_real_root_distribution(2, 300, 42).unwrap();
        let b = mc_real_root_distribution(2, 300, 42).unwrap();
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn sign_sequence_worked_example() {
        // F = 2(x−z)(x−2z)(x−3z) = 2x³ − 12x²z + 22xz² − 12z³
        let f = BinaryForm::from_i64(1, &[2, -12, 22, -12]).unwrap();
        let s = sign_sequence(&f, &BigInt::from(4), &BigInt::one()).unwrap();
        assert_eq!((s.m, s.tau), (1, 2));
        let s = sign_sequence(&f, &BigInt::from(3), &BigInt::from(2)).unwrap();
        assert_eq!((s.m, s.tau), (1, 1));
        assert!(sign_sequence(&f, &BigInt::zero(), &BigInt::one()).is_err());
    }

    #[test]
    fn sign_sequence_cases() {
        // F = 2(x−z)(x−2z)(x−3z), roots 1 < 2 < 3
        let f = BinaryForm::from_i64(1, &[2, -12, 22, -12]).unwrap();
        // z0 < 0, ρ = 0 below all roots: signs (+,+,+), first of the
        // flipped table → τ = m+1 = 2
        let s = sign_sequence(&f, &BigInt::zero(), &BigInt::from(-1)).unwrap();
        assert_eq!((s.m, s.tau), (1, 2));
        // z0 < 0, ρ = 5/2 above two roots: signs (−,−,+) → τ = 3
        let s = sign_sequence(&f, &BigInt::from(-5), &BigInt::from(-2)).unwrap();
        assert_eq!((s.m, s.tau), (1, 3));
        // z0 = 0 boundary
        let s = sign_sequence(&f, &BigInt::one(), &BigInt::zero()).unwrap();
        assert!(s.z0_boundary);
        assert_eq!(s.tau, s.m + 1);
        // Weierstrass solutions: F(1,1) = 0 with cofactor sign + → (+,−,−),
        // τ = 1; F(−2,−1) = 0 with cofactor sign − → (−,−,+), τ = 3
        let s = sign_sequence(&f, &BigInt::one(), &BigInt::one()).unwrap();
        assert_eq!((s.m, s.tau), (1, 1));
        let s = sign_sequence(&f, &BigInt::from(-2), &BigInt::from(-1)).unwrap();
        assert_eq!((s.m, s.tau), (1, 3));
    }
}
