//! Exact arithmetic substrate: dense polynomials over `Z` and `Z/N`, exact
//! matrix algebra over `Q`, Hermite normal forms, fraction-free determinants
//! of linear matrix pencils, and Sturm chains.
//!
//! All values are immutable after construction and safe to share across
//! threads; nothing in this module keeps global state.

mod mat;
mod modpoly;
mod poly;
mod sturm;

pub use mat::{bareiss_det, det_linear_pencil, fp_kernel, mod_inverse, row_hnf, RatMat};
pub use modpoly::{is_small_prime, ModPoly, DEFAULT_FACTOR_SEED};
pub use poly::IntPoly;
pub use sturm::sturm_count;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Floor of the non-negative k-th root, by binary search on exact powers.
pub fn int_root_floor(value: &BigInt, k: u32) -> BigInt {
    assert!(k >= 1 && !value.is_negative());
    if value.is_zero() || value.is_one() {
        return value.clone();
    }
    let mut lo = BigInt::one();
    let mut hi = BigInt::from(2);
    while hi.pow(k) <= *value {
        hi = &hi * 2;
    }
    // invariant: lo^k <= value < hi^k
    while &lo + 1u32 < hi {
        let mid: BigInt = (&lo + &hi) / 2;
        if mid.pow(k) <= *value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Exact integer square root when `value` is a perfect square.
pub fn perfect_sqrt(value: &BigInt) -> Option<BigInt> {
    if value.is_negative() {
        return None;
    }
    let r = int_root_floor(value, 2);
    if &r * &r == *value {
        Some(r)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_root_floor_matches_pow_boundaries() {
        for v in 0..200u32 {
            let v = BigInt::from(v);
            for k in 1..6u32 {
                let r = int_root_floor(&v, k);
                assert!(r.pow(k) <= v);
                assert!((&r + 1u32).pow(k) > v);
            }
        }
    }

    #[test]
    fn perfect_sqrt_detects_squares() {
        assert_eq!(perfect_sqrt(&BigInt::from(49)), Some(BigInt::from(7)));
        assert_eq!(perfect_sqrt(&BigInt::from(48)), None);
        assert_eq!(perfect_sqrt(&BigInt::from(0)), Some(BigInt::zero()));
        assert_eq!(perfect_sqrt(&BigInt::from(-4)), None);
    }
}
