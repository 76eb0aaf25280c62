//! Dense univariate polynomials over `Z`, low-to-high coefficient order.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// A polynomial with big-integer coefficients, stored low-to-high with no
/// trailing zero coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly{:?}", self.coeffs)
    }
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        IntPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        IntPoly::new(vec![c])
    }

    /// The monomial `c·x^k`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = c;
        IntPoly::new(v)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rat(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push(self.coeff(i) + other.coeff(i));
        }
        IntPoly::new(v)
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push(self.coeff(i) - other.coeff(i));
        }
        IntPoly::new(v)
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
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
        IntPoly::new(v)
    }

    pub fn mul_scalar(&self, c: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::zero();
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// gcd of all coefficients, non-negative; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    /// Divides out the content; keeps the sign of the leading coefficient.
    pub fn primitive_part(&self) -> IntPoly {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        IntPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Exact division; returns `None` when `other` does not divide `self`
    /// over `Z`.
    pub fn div_exact(&self, other: &IntPoly) -> Option<IntPoly> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(IntPoly::zero());
        }
        let (ds, dv) = (self.degree()?, other.degree()?);
        if ds < dv {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let mut quo = vec![BigInt::zero(); ds - dv + 1];
        let lead = other.leading();
        for k in (0..=ds - dv).rev() {
            let c = &rem[k + dv];
            if c.is_zero() {
                continue;
            }
            let (q, r) = c.div_rem(&lead);
            if !r.is_zero() {
                return None;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let t = &q * b;
                rem[k + j] -= t;
            }
            quo[k] = q;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(IntPoly::new(quo))
    }

    /// Pseudo-remainder: `lead(g)^(deg f − deg g + 1)·f = q·g + r` with
    /// `deg r < deg g`. Requires `g ≠ 0` and `deg f ≥ deg g`.
    pub fn pseudo_rem(&self, g: &IntPoly) -> IntPoly {
        let df = self.degree().expect("pseudo_rem of zero");
        let dg = g.degree().expect("pseudo_rem by zero");
        assert!(df >= dg);
        let lead = g.leading();
        let mut r = self.coeffs.clone();
        for k in (0..=df - dg).rev() {
            let c = r[k + dg].clone();
            for (i, item) in r.iter_mut().enumerate() {
                *item = &*item * &lead;
                if i >= k && i - k <= dg {
                    *item -= &c * &g.coeffs[i - k];
                }
            }
        }
        r.truncate(dg);
        IntPoly::new(r)
    }

    /// Primitive gcd over `Z` (non-negative leading coefficient), via a
    /// primitive pseudo-remainder sequence.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.is_zero() {
            return positive_lead(b);
        }
        if b.is_zero() {
            return positive_lead(a);
        }
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        let ca = self.content().gcd(&other.content());
        positive_lead(a.mul_scalar(&ca))
    }

    /// True when `gcd(f, f')` is constant.
    pub fn is_squarefree(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        if self.degree() == Some(0) {
            return true;
        }
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// Squarefree part `f / gcd(f, f')`, primitive.
    pub fn squarefree_part(&self) -> IntPoly {
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.primitive_part();
        }
        self.primitive_part()
            .div_exact(&g)
            .or_else(|| {
                // content of f may interfere with exact division; retry on
                // the primitive parts with a rational fallback
                let num = self.primitive_part();
                num.div_exact(&g.primitive_part())
            })
            .expect("gcd divides its argument")
    }

    /// Resultant `Res(f, g)` over `Z`, as the Sylvester determinant
    /// (fraction-free; degrees here stay small).
    pub fn resultant(&self, other: &IntPoly) -> BigInt {
        resultant(self, other)
    }

    /// Evaluate the homogenization at an integer point: `z^d·f(x/z)` for
    /// `d = deg f` (or a caller-chosen degree `d ≥ deg f`).
    pub fn eval_homog(&self, x: &BigInt, z: &BigInt, d: usize) -> BigInt {
        let mut acc = BigInt::zero();
        let mut zp = BigInt::one();
        // sum_{i} c_i x^i z^(d-i), horner in x from the top
        for i in (0..=d).rev() {
            acc = acc * x + self.coeff(i) * &zp;
            if i > 0 {
                zp *= z;
            }
        }
        acc
    }
}

fn positive_lead(p: IntPoly) -> IntPoly {
    if p.leading().is_negative() {
        p.neg()
    } else {
        p
    }
}

fn resultant(f: &IntPoly, g: &IntPoly) -> BigInt {
    let (df, dg) = match (f.degree(), g.degree()) {
        (Some(a), Some(b)) => (a, b),
        _ => return BigInt::zero(),
    };
    if df == 0 {
        return f.leading().pow(dg as u32);
    }
    if dg == 0 {
        return g.leading().pow(df as u32);
    }
    let n = df + dg;
    let mut syl = vec![vec![BigInt::zero(); n]; n];
    for row in 0..dg {
        for (i, c) in f.coeffs().iter().enumerate() {
            syl[row][row + df - i] = c.clone();
        }
    }
    for row in 0..df {
        for (i, c) in g.coeffs().iter().enumerate() {
            syl[dg + row][row + dg - i] = c.clone();
        }
    }
    super::mat::bareiss_det(syl)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> IntPoly {
        IntPoly::from_i64(v)
    }

    #[test]
    fn arithmetic_basics() {
        let f = p(&[1, 2, 3]); // 3x²+2x+1
        let g = p(&[0, 1]); // x
        assert_eq!(f.mul(&g), p(&[0, 1, 2, 3]));
        assert_eq!(f.add(&g), p(&[1, 3, 3]));
        assert_eq!(f.eval(&BigInt::from(2)), BigInt::from(17));
        assert_eq!(f.derivative(), p(&[2, 6]));
    }

    #[test]
    fn gcd_and_squarefree() {
        // (x-1)^2 (x+2)
        let f = p(&[2, -3, 0, 1]);
        assert!(!f.is_squarefree());
        let sf = f.squarefree_part();
        // (x-1)(x+2) = x^2+x-2
        assert_eq!(sf.primitive_part(), p(&[-2, 1, 1]));
        assert!(p(&[-1, 0, 1]).is_squarefree());
    }

    #[test]
    fn resultant_matches_known_values() {
        // disc(x³+px+q) = -4p³-27q² = -Res(f,f')/1 * (-1)^{3·2/2}
        for (pp, qq) in [(1i64, 1i64), (-1, 0), (2, -3), (0, 5)] {
            let f = p(&[qq, pp, 0, 1]);
            let r = f.resultant(&f.derivative());
            let disc = -r; // (-1)^{n(n-1)/2} with n = 3
            let expect = BigInt::from(-4 * pp * pp * pp - 27 * qq * qq);
            assert_eq!(disc, expect, "p={pp} q={qq}");
        }
    }

    #[test]
    fn resultant_multiplicative_in_roots() {
        // Res(f, g·h) = Res(f,g)·Res(f,h)
        let f = p(&[1, 3, 1]);
        let g = p(&[-2, 1]);
        let h = p(&[5, 0, 2]);
        assert_eq!(f.resultant(&g.mul(&h)), f.resultant(&g) * f.resultant(&h));
    }

    #[test]
    fn div_exact_round_trip() {
        let f = p(&[3, -1, 2]);
        let g = p(&[-7, 5, 0, 1]);
        let fg = f.mul(&g);
        assert_eq!(fg.div_exact(&f), Some(g.clone()));
        assert_eq!(fg.div_exact(&g), Some(f.clone()));
        assert_eq!(p(&[1, 1]).div_exact(&p(&[0, 2])), None);
    }
}
