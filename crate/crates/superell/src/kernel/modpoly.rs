//! Polynomials over `Z/N`, with complete factorization over prime fields
//! (squarefree split, distinct-degree, then seeded equal-degree splitting).

use super::poly::IntPoly;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Default seed for the randomized equal-degree step; fixed so runs are
/// reproducible.
pub const DEFAULT_FACTOR_SEED: u64 = 0x5eed_f0e1;

/// Miller–Rabin with a fixed base set; deterministic for all inputs below
/// 3.3·10²⁴, far beyond desk scale.
pub fn is_small_prime(n: &BigInt) -> bool {
    if *n < BigInt::from(2) {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let s = BigInt::from(small);
        if *n == s {
            return true;
        }
        if (n % s).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A polynomial over `Z/modulus`, coefficients reduced into `[0, modulus)`,
/// stored low-to-high with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModPoly {
    modulus: BigInt,
    coeffs: Vec<BigInt>,
}

impl ModPoly {
    pub fn new(modulus: BigInt, coeffs: Vec<BigInt>) -> Result<Self> {
        if modulus < BigInt::from(2) {
            return Err(Error::BadModulus);
        }
        let mut c: Vec<BigInt> = coeffs.into_iter().map(|x| x.mod_floor(&modulus)).collect();
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        Ok(ModPoly { modulus, coeffs: c })
    }

    pub fn from_intpoly(modulus: BigInt, p: &IntPoly) -> Result<Self> {
        ModPoly::new(modulus, p.coeffs().to_vec())
    }

    pub fn zero(modulus: BigInt) -> Self {
        ModPoly {
            modulus,
            coeffs: vec![],
        }
    }

    pub fn one(modulus: BigInt) -> Self {
        ModPoly::new(modulus, vec![BigInt::one()]).expect("modulus checked by caller")
    }

    pub fn x(modulus: BigInt) -> Self {
        ModPoly::new(modulus, vec![BigInt::zero(), BigInt::one()]).expect("modulus ≥ 2")
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    fn same_modulus(&self, other: &ModPoly) {
        assert_eq!(self.modulus, other.modulus, "mixed moduli");
    }

    pub fn add(&self, other: &ModPoly) -> ModPoly {
        self.same_modulus(other);
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push((self.coeff(i) + other.coeff(i)).mod_floor(&self.modulus));
        }
        ModPoly::new(self.modulus.clone(), v).expect("modulus valid")
    }

    pub fn sub(&self, other: &ModPoly) -> ModPoly {
        self.same_modulus(other);
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push((self.coeff(i) - other.coeff(i)).mod_floor(&self.modulus));
        }
        ModPoly::new(self.modulus.clone(), v).expect("modulus valid")
    }

    pub fn mul(&self, other: &ModPoly) -> ModPoly {
        self.same_modulus(other);
        if self.is_zero() || other.is_zero() {
            return ModPoly::zero(self.modulus.clone());
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        ModPoly::new(self.modulus.clone(), v).expect("modulus valid")
    }

    pub fn mul_scalar(&self, c: &BigInt) -> ModPoly {
        ModPoly::new(
            self.modulus.clone(),
            self.coeffs.iter().map(|a| a * c).collect(),
        )
        .expect("modulus valid")
    }

    /// Division with remainder; requires the divisor's leading coefficient
    /// to be invertible mod the modulus.
    pub fn div_rem(&self, divisor: &ModPoly) -> Result<(ModPoly, ModPoly)> {
        self.same_modulus(divisor);
        let dd = divisor.degree().ok_or(Error::ZeroDivisor)?;
        let lead_inv = super::mat::mod_inverse(&divisor.leading(), &self.modulus)
            .ok_or(Error::ZeroDivisor)?;
        let mut rem = self.coeffs.clone();
        if rem.len() < dd + 1 {
            return Ok((ModPoly::zero(self.modulus.clone()), self.clone()));
        }
        let dq = rem.len() - 1 - dd;
        let mut quo = vec![BigInt::zero(); dq + 1];
        for k in (0..=dq).rev() {
            let c = (&rem[k + dd] * &lead_inv).mod_floor(&self.modulus);
            if !c.is_zero() {
                for (j, b) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = (&rem[k + j] - &c * b).mod_floor(&self.modulus);
                }
            }
            quo[k] = c;
        }
        rem.truncate(dd);
        Ok((
            ModPoly::new(self.modulus.clone(), quo)?,
            ModPoly::new(self.modulus.clone(), rem)?,
        ))
    }

    pub fn rem(&self, divisor: &ModPoly) -> Result<ModPoly> {
        Ok(self.div_rem(divisor)?.1)
    }

    /// Make monic; the leading coefficient must be invertible.
    pub fn monic(&self) -> Result<ModPoly> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let inv = super::mat::mod_inverse(&self.leading(), &self.modulus)
            .ok_or(Error::ZeroDivisor)?;
        Ok(self.mul_scalar(&inv))
    }

    /// gcd over a prime field, monic.
    pub fn gcd(&self, other: &ModPoly) -> Result<ModPoly> {
        self.same_modulus(other);
        if !is_small_prime(&self.modulus) {
            return Err(Error::CompositeModulus);
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            Ok(a)
        } else {
            a.monic()
        }
    }

    /// `self^e mod m`, binary powering.
    pub fn powmod(&self, e: &BigInt, m: &ModPoly) -> Result<ModPoly> {
        assert!(!e.is_negative());
        let mut base = self.rem(m)?;
        let mut acc = ModPoly::one(self.modulus.clone());
        let mut e = e.clone();
        while !e.is_zero() {
            if e.is_odd() {
                acc = acc.mul(&base).rem(m)?;
            }
            base = base.mul(&base).rem(m)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> ModPoly {
        if self.coeffs.len() <= 1 {
            return ModPoly::zero(self.modulus.clone());
        }
        ModPoly::new(
            self.modulus.clone(),
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
        .expect("modulus valid")
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc * x + c).mod_floor(&self.modulus);
        }
        acc
    }

    /// Complete factorization over `F_p` into monic irreducibles with
    /// multiplicities, plus the leading unit. The product of the returned
    /// factors times the unit reproduces the input.
    ///
    /// Composite moduli are rejected.
    pub fn factor(&self, seed: u64) -> Result<(BigInt, Vec<(ModPoly, usize)>)> {
        let p = self.modulus.clone();
        if !is_small_prime(&p) {
            return Err(Error::CompositeModulus);
        }
        if self.is_zero() {
            return Err(Error::Precondition("cannot factor the zero polynomial".into()));
        }
        let unit = self.leading();
        let f = self.monic()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<(ModPoly, usize)> = Vec::new();
        for (mult, part) in squarefree_decomposition(&f, &p)? {
            let mut irreducibles = Vec::new();
            distinct_degree_split(&part, &p, &mut rng, &mut irreducibles)?;
            for q in irreducibles {
                out.push((q, mult));
            }
        }
        out.sort_by(|a, b| {
            a.0.degree()
                .cmp(&b.0.degree())
                .then_with(|| a.0.coeffs.cmp(&b.0.coeffs))
        });
        Ok((unit, out))
    }
}

/// Squarefree decomposition of a monic `f` over `F_p`:
/// returns pairs `(multiplicity, squarefree monic part)` with
/// `f = ∏ part^multiplicity` and the parts pairwise coprime.
fn squarefree_decomposition(f: &ModPoly, p: &BigInt) -> Result<Vec<(usize, ModPoly)>> {
    let mut result: Vec<(usize, ModPoly)> = Vec::new();
    let mut f = f.clone();
    let mut e = 1usize; // accumulated p-power from p-th roots
    let pu = p.to_u64_digits().1.first().copied().unwrap_or(0) as usize;
    while f.degree().map_or(false, |d| d > 0) {
        let fd = f.derivative();
        if fd.is_zero() {
            // f = g(x^p) = (p-th root)^p over F_p
            let mut g = Vec::new();
            let mut i = 0;
            while i < f.coeffs().len() {
                g.push(f.coeff(i));
                i += pu;
            }
            f = ModPoly::new(p.clone(), g)?;
            e *= pu;
            continue;
        }
        let mut g = f.gcd(&fd)?;
        let mut w = f.div_rem(&g)?.0.monic()?;
        let mut i = 1usize;
        while w.degree().map_or(false, |d| d > 0) {
            let y = w.gcd(&g)?;
            let z = w.div_rem(&y)?.0.monic()?;
            if z.degree().map_or(false, |d| d > 0) {
                result.push((e * i, z));
            }
            g = g.div_rem(&y)?.0.monic()?;
            w = y;
            i += 1;
        }
        // factors remaining in g all have multiplicity divisible by p
        f = g;
    }
    Ok(result)
}

/// Distinct-degree split of a monic squarefree `f`; pushes its irreducible
/// factors (each exactly once) into `out`.
fn distinct_degree_split(
    f: &ModPoly,
    p: &BigInt,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<ModPoly>,
) -> Result<()> {
    let mut remaining = f.clone();
    let x = ModPoly::x(p.clone());
    let mut frob = x.clone();
    let mut d = 1usize;
    while remaining.degree().map_or(false, |deg| deg >= 2 * d) {
        frob = frob.powmod(p, &remaining)?;
        let split = frob.sub(&x).gcd(&remaining)?;
        if split.degree().map_or(false, |deg| deg > 0) {
            equal_degree_split(&split, d, p, rng, out)?;
            remaining = remaining.div_rem(&split)?.0.monic()?;
            frob = frob.rem(&remaining)?;
        }
        d += 1;
    }
    if remaining.degree().map_or(false, |deg| deg > 0) {
        out.push(remaining);
    }
    Ok(())
}

/// Cantor–Zassenhaus equal-degree splitting of a monic squarefree product of
/// degree-`d` irreducibles.
fn equal_degree_split(
    f: &ModPoly,
    d: usize,
    p: &BigInt,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<ModPoly>,
) -> Result<()> {
    let deg = f.degree().unwrap_or(0);
    if deg == 0 {
        return Ok(());
    }
    if deg == d {
        out.push(f.clone());
        return Ok(());
    }
    let two = BigInt::from(2);
    loop {
        let r = random_poly(deg, p, rng)?;
        let h = if *p == two {
            // trace map T(r) = r + r² + r⁴ + … over F_(2^d)
            let mut acc = r.clone().rem(f)?;
            let mut term = r.rem(f)?;
            for _ in 1..d {
                term = term.mul(&term).rem(f)?;
                acc = acc.add(&term);
            }
            acc
        } else {
            // r^((p^d - 1)/2) - 1
            let e = (p.pow(d as u32) - 1u32) / &two;
            let t = r.powmod(&e, f)?;
            t.sub(&ModPoly::one(p.clone()))
        };
        let g = h.gcd(f)?;
        let gd = g.degree().unwrap_or(0);
        if gd > 0 && gd < deg {
            equal_degree_split(&g, d, p, rng, out)?;
            let cof = f.div_rem(&g)?.0.monic()?;
            equal_degree_split(&cof, d, p, rng, out)?;
            return Ok(());
        }
    }
}

fn random_poly(max_deg: usize, p: &BigInt, rng: &mut ChaCha8Rng) -> Result<ModPoly> {
    let pu = p.to_u64_digits().1.first().copied().unwrap_or(2);
    let deg = rng.gen_range(1..=max_deg.max(1));
    let coeffs: Vec<BigInt> = (0..=deg)
        .map(|_| BigInt::from(rng.gen_range(0..pu.max(2))))
        .collect();
    ModPoly::new(p.clone(), coeffs)
}
