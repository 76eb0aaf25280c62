//! Binary forms of odd degree: heights, monicization, the `SL₂(Z)` action,
//! discriminants, and exact height-box enumeration.

use crate::kernel::{int_root_floor, IntPoly};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// An integer binary form `F(x,z) = Σ f_i x^(2n+1−i) z^i` of odd degree
/// `2n+1 ≥ 3`. `coeffs[i]` is `f_i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    n: usize,
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryForm({})", self.encode())
    }
}

impl BinaryForm {
    pub fn new(n: usize, coeffs: Vec<BigInt>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("need degree 2n+1 ≥ 3".into()));
        }
        if coeffs.len() != 2 * n + 2 {
            return Err(Error::Precondition(format!(
                "degree-{} form needs {} coefficients, got {}",
                2 * n + 1,
                2 * n + 2,
                coeffs.len()
            )));
        }
        Ok(BinaryForm { n, coeffs })
    }

    pub fn from_i64(n: usize, coeffs: &[i64]) -> Result<Self> {
        BinaryForm::new(n, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        2 * self.n + 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigInt {
        &self.coeffs[i]
    }

    pub fn leading(&self) -> &BigInt {
        &self.coeffs[0]
    }

    /// Canonical text encoding `n;f0,f1,...,f_{2n+1}`.
    pub fn encode(&self) -> String {
        let cs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("{};{}", self.n, cs.join(","))
    }

    pub fn decode(s: &str) -> Result<Self> {
        let (n_str, cs) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("missing ';' in form encoding {s:?}")))?;
        let n: usize = n_str
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad n in {s:?}")))?;
        let coeffs: Result<Vec<BigInt>> = cs
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("bad coefficient {t:?}")))
            })
            .collect();
        BinaryForm::new(n, coeffs?)
    }

    pub fn eval(&self, x: &BigInt, z: &BigInt) -> BigInt {
        let d = self.degree();
        let mut acc = BigInt::zero();
        let mut zp = BigInt::one();
        for i in 0..=d {
            acc = acc * x + &self.coeffs[i] * &zp;
            if i < d {
                zp *= z;
            }
        }
        acc
    }

    /// The dehomogenization `F(x,1)` as a univariate polynomial.
    pub fn poly_x(&self) -> IntPoly {
        let d = self.degree();
        IntPoly::new((0..=d).rev().map(|i| self.coeffs[i].clone()).collect())
    }

    /// Builds the form of degree `2n+1` whose `x`-dehomogenization is `p`
    /// (coefficients of `x^k` become `f_(2n+1−k)`).
    pub fn from_poly_x(n: usize, p: &IntPoly) -> Result<Self> {
        let d = 2 * n + 1;
        if p.degree().map_or(false, |dp| dp > d) {
            return Err(Error::Precondition("polynomial degree too large".into()));
        }
        BinaryForm::new(n, (0..=d).map(|i| p.coeff(d - i)).collect())
    }

    /// The monicized form `(1/f0)·F(x, f0·z)`, with coefficients
    /// `f_i·f0^(i−1)`; integral, leading coefficient 1.
    pub fn monicize(&self) -> Result<BinaryForm> {
        let f0 = self.leading();
        if f0.is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut pow = BigInt::one(); // f0^(i-1), starting at i = 0 with 1/f0
        for (i, c) in self.coeffs.iter().enumerate() {
            if i == 0 {
                out.push(BigInt::one());
            } else {
                out.push(c * &pow);
                pow *= f0;
            }
        }
        BinaryForm::new(self.n, out)
    }

    /// Strict height comparison `H(F) < X`, evaluated exactly:
    /// `|f0^(i−1) f_i|^(2n(2n+1)) < X^i` for every `i ≥ 1`.
    pub fn height_less_than(&self, x_bound: &BigInt) -> bool {
        let n = self.n;
        let f0 = self.leading();
        let exp = (2 * n * (2 * n + 1)) as u32;
        let mut f0pow = BigInt::one();
        for i in 1..=2 * n + 1 {
            let v = (&f0pow * &self.coeffs[i]).magnitude().clone();
            if BigInt::from(v).pow(exp) >= x_bound.pow(i as u32) {
                return false;
            }
            f0pow *= f0;
        }
        true
    }

    /// Largest `|f_i|` allowed in slot `i ≥ 1` under `H(F) < X`, given a
    /// fixed leading coefficient. Exact integer root by binary search.
    pub fn coefficient_bound(n: usize, f0: &BigInt, x_bound: &BigInt, i: usize) -> BigInt {
        assert!((1..=2 * n + 1).contains(&i) && !f0.is_zero() && x_bound.is_positive());
        let exp = 2 * n * (2 * n + 1);
        let scale = BigInt::from(f0.magnitude().pow((i - 1) as u32));
        // largest b ≥ 0 with (b·scale)^exp < X^i, i.e. b·scale ≤ root
        let target = x_bound.pow(i as u32) - 1u32;
        let root = int_root_floor(&target, exp as u32);
        let b = root / &scale;
        debug_assert!((&b * &scale).pow(exp as u32) <= target);
        debug_assert!(((&b + BigInt::one()) * &scale).pow(exp as u32) > target);
        b.max(BigInt::zero())
    }

    /// Action of `γ ∈ SL₂(Z)`: `(γ·F)(x,z) = F((x,z)·γ)`.
    pub fn sl2_act(&self, gamma: &UnimodularMatrix2) -> BinaryForm {
        // (x,z)·γ = (a·x + c·z, b·x + d·z)
        let d = self.degree();
        let u = IntPoly::new(vec![gamma.c.clone(), gamma.a.clone()]); // a·x + c (z=1 slot handled by homogenization)
        let v = IntPoly::new(vec![gamma.d.clone(), gamma.b.clone()]);
        // F(u(t), v(t)) where t = x/z, then re-homogenize: compute
        // Σ f_i u^(d−i) v^i as a degree-d polynomial in t
        let mut acc = IntPoly::zero();
        let mut upows = vec![IntPoly::one()];
        let mut vpows = vec![IntPoly::one()];
        for k in 1..=d {
            upows.push(upows[k - 1].mul(&u));
            vpows.push(vpows[k - 1].mul(&v));
        }
        for i in 0..=d {
            let term = upows[d - i].mul(&vpows[i]).mul_scalar(&self.coeffs[i]);
            acc = acc.add(&term);
        }
        let coeffs = (0..=d).map(|i| acc.coeff(d - i)).collect();
        BinaryForm::new(self.n, coeffs).expect("degree preserved")
    }

    /// Discriminant of the form: `(−1)^(N(N−1)/2)·Res(f, f′)/f0` for
    /// `f = F(x,1)` of degree `N = 2n+1`. Zero exactly when `F` is
    /// inseparable. Matches the monic-cubic convention
    /// `disc(x³+px+q) = −4p³−27q²`.
    ///
    /// When the leading coefficient vanishes the form is first moved by a
    /// shear (which preserves the discriminant) so the formula applies.
    pub fn disc(&self) -> BigInt {
        if self.leading().is_zero() {
            // find b with F(1,b) ≠ 0; impossible only for the zero form
            for b in 0..=self.degree() as i64 {
                if !self.eval(&BigInt::one(), &BigInt::from(b)).is_zero() {
                    let shear = UnimodularMatrix2::new(
                        BigInt::one(),
                        BigInt::from(b),
                        BigInt::zero(),
                        BigInt::one(),
                    )
                    .expect("shear is unimodular");
                    return self.sl2_act(&shear).disc();
                }
            }
            return BigInt::zero();
        }
        let f = self.poly_x();
        let fd = f.derivative();
        if fd.is_zero() {
            return BigInt::zero();
        }
        let res = f.resultant(&fd);
        let n_deg = self.degree();
        let sign = if (n_deg * (n_deg - 1) / 2) % 2 == 1 {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let num = sign * res;
        let (q, r) = num.div_rem(self.leading());
        debug_assert!(r.is_zero(), "f0 divides the discriminant resultant");
        q
    }

    pub fn is_separable(&self) -> bool {
        !self.disc().is_zero()
    }
}

/// A 2×2 integer matrix with determinant 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularMatrix2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl UnimodularMatrix2 {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if &a * &d - &b * &c != BigInt::one() {
            return Err(Error::Precondition("matrix must have determinant 1".into()));
        }
        Ok(UnimodularMatrix2 { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        UnimodularMatrix2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        UnimodularMatrix2 {
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::one(),
        }
    }

    pub fn mul(&self, other: &UnimodularMatrix2) -> UnimodularMatrix2 {
        UnimodularMatrix2 {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
    }

    pub fn inverse(&self) -> UnimodularMatrix2 {
        UnimodularMatrix2 {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }
}

/// Iterator over all forms with fixed `n` and `f0` of height `< X`, in
/// lexicographic order of `(f_1, …, f_{2n+1})`.
///
/// Sharding contract: shard `i` of `k` is `enumerate_box(...).skip(i).step_by(k)`;
/// the shards partition the canonical order.
pub struct BoxEnumeration {
    n: usize,
    f0: BigInt,
    bounds: Vec<BigInt>,
    current: Option<Vec<BigInt>>, // values f_1..f_{2n+1}
}

/// All forms with leading coefficient `f0` and `H(F) < X`.
pub fn enumerate_box(n: usize, f0: &BigInt, x_bound: &BigInt) -> Result<BoxEnumeration> {
    if f0.is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    if !x_bound.is_positive() {
        return Err(Error::Precondition("height bound must be ≥ 1".into()));
    }
    let bounds: Vec<BigInt> = (1..=2 * n + 1)
        .map(|i| BinaryForm::coefficient_bound(n, f0, x_bound, i))
        .collect();
    let current = Some(bounds.iter().map(|b| -b.clone()).collect());
    Ok(BoxEnumeration {
        n,
        f0: f0.clone(),
        bounds,
        current,
    })
}

/// Number of forms the box contains: `∏ (2·B_i + 1)`.
pub fn box_size(n: usize, f0: &BigInt, x_bound: &BigInt) -> Result<BigInt> {
    if f0.is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let mut total = BigInt::one();
    for i in 1..=2 * n + 1 {
        total *= 2 * BinaryForm::coefficient_bound(n, f0, x_bound, i) + 1
    }
    Ok(total)
}

impl Iterator for BoxEnumeration {
    type Item = BinaryForm;

    fn next(&mut self) -> Option<BinaryForm> {
        let cur = self.current.as_ref()?.clone();
        let mut coeffs = Vec::with_capacity(cur.len() + 1);
        coeffs.push(self.f0.clone());
        coeffs.extend(cur.iter().cloned());
        let out = BinaryForm::new(self.n, coeffs).expect("well-formed by construction");
        // advance odometer, last coordinate fastest
        let cur = self.current.as_mut().unwrap();
        let mut idx = cur.len();
        loop {
            if idx == 0 {
                self.current = None;
                break;
            }
            idx -= 1;
            if cur[idx] < self.bounds[idx] {
                cur[idx] += 1;
                for j in idx + 1..cur.len() {
                    cur[j] = -self.bounds[j].clone();
                }
                break;
            }
        }
        Some(out)
    }
}
