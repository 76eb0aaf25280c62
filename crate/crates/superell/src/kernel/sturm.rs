//! Sturm chains for exact real-root counting of squarefree integer
//! polynomials.

use super::poly::IntPoly;
use crate::{Error, Result};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Number of real roots of a squarefree `f` in the half-open interval
/// `(lo, hi]`, where `None` stands for `−∞` (for `lo`) or `+∞` (for `hi`).
///
/// Rejects non-squarefree input; callers that need multiplicities should
/// pass the squarefree part explicitly.
pub fn sturm_count(
    f: &IntPoly,
    lo: Option<&BigRational>,
    hi: Option<&BigRational>,
) -> Result<usize> {
    if f.is_zero() {
        return Err(Error::NotSquarefree);
    }
    if f.degree() == Some(0) {
        return Ok(0);
    }
    if !f.is_squarefree() {
        return Err(Error::NotSquarefree);
    }
    if let (Some(a), Some(b)) = (lo, hi) {
        if a >= b {
            return Err(Error::Precondition("need lo < hi".into()));
        }
    }
    let chain = sturm_chain(f);
    let va = variations_at(&chain, lo, true);
    let vb = variations_at(&chain, hi, false);
    Ok(va.saturating_sub(vb))
}

/// Primitive-normalized Sturm chain: the remainder signs match the rational
/// chain because each term is scaled only by a positive rational.
fn sturm_chain(f: &IntPoly) -> Vec<IntPoly> {
    let mut chain = vec![f.primitive_part(), f.derivative().primitive_part()];
    loop {
        let n = chain.len();
        let (a, b) = (&chain[n - 2], &chain[n - 1]);
        if b.is_zero() {
            chain.pop();
            break;
        }
        if a.degree() < b.degree() {
            // can only happen on the first step for degree-1 inputs
            break;
        }
        let d = a.degree().unwrap() - b.degree().unwrap();
        // pseudo_rem multiplies by lead(b)^(d+1); make that factor positive
        let mut r = a.pseudo_rem(b);
        if b.leading().is_negative() && d % 2 == 0 {
            // lead(b)^(d+1) < 0: pseudo-remainder flipped the sign
            r = r.neg();
        }
        let r = r.neg().primitive_part();
        if r.is_zero() {
            break;
        }
        chain.push(r);
    }
    chain
}

/// Sign variations of the chain at the point (or at ±∞). Zero entries are
/// skipped, which yields right-limit semantics and hence `(lo, hi]` counts.
fn variations_at(chain: &[IntPoly], at: Option<&BigRational>, neg_infinity: bool) -> usize {
    let mut signs = Vec::with_capacity(chain.len());
    for p in chain {
        let s = match at {
            Some(x) => {
                let v = p.eval_rat(x);
                if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                }
            }
            None => {
                let lead = p.leading();
                let base = if lead.is_positive() { 1 } else { -1 };
                let deg = p.degree().unwrap_or(0);
                if neg_infinity && deg % 2 == 1 {
                    -base
                } else {
                    base
                }
            }
        };
        if s != 0 {
            signs.push(s);
        }
    }
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}
