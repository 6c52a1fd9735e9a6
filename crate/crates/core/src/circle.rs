//! Fixed-point arithmetic on the circle group R/Z.
//!
//! A [`Circle256`] stores a point of [0, 1) as a 256-bit binary fraction.
//! Addition and multiplication by integers wrap modulo 1 exactly, so a walk
//! position `S_k * alpha mod 1` can be tracked step by step with no rounding
//! beyond the one-time projection of `alpha` onto the 2^-256 grid.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Number of fractional bits carried by [`Circle256`].
pub const CIRCLE_BITS: u32 = 256;

const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// A point of R/Z as `limbs / 2^256`, little-endian limbs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Circle256 {
    limbs: [u64; 4],
}

impl Circle256 {
    pub const ZERO: Circle256 = Circle256 { limbs: [0; 4] };

    pub const fn from_limbs(limbs: [u64; 4]) -> Self {
        Circle256 { limbs }
    }

    pub fn limbs(&self) -> [u64; 4] {
        self.limbs
    }

    /// `floor(num / den * 2^256) mod 2^256`, i.e. the fractional part of
    /// `num / den` truncated to 256 bits.
    pub fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let r = num % den;
        let scaled: BigUint = (r << CIRCLE_BITS) / den;
        let digits = scaled.to_u64_digits();
        let mut limbs = [0u64; 4];
        for (slot, d) in limbs.iter_mut().zip(digits) {
            *slot = d;
        }
        Circle256 { limbs }
    }

    #[inline]
    pub fn wrapping_add(self, other: Self) -> Self {
        let mut out = [0u64; 4];
        let mut carry = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let (s1, c1) = self.limbs[i].overflowing_add(other.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *slot = s2;
            carry = c1 || c2;
        }
        Circle256 { limbs: out }
    }

    #[inline]
    pub fn wrapping_neg(self) -> Self {
        let inv = Circle256 {
            limbs: [!self.limbs[0], !self.limbs[1], !self.limbs[2], !self.limbs[3]],
        };
        inv.wrapping_add(Circle256 { limbs: [1, 0, 0, 0] })
    }

    #[inline]
    pub fn wrapping_sub(self, other: Self) -> Self {
        self.wrapping_add(other.wrapping_neg())
    }

    /// `k * self mod 1` for an unsigned 128-bit multiplier.
    #[inline]
    pub fn mul_u128(self, k: u128) -> Self {
        let k_lo = k as u64;
        let k_hi = (k >> 64) as u64;
        let mut out = [0u64; 4];
        // out += self * k_lo
        let mut carry: u128 = 0;
        for i in 0..4 {
            let t = (self.limbs[i] as u128) * (k_lo as u128) + (out[i] as u128) + carry;
            out[i] = t as u64;
            carry = t >> 64;
        }
        if k_hi != 0 {
            let mut carry: u128 = 0;
            for i in 0..3 {
                let t = (self.limbs[i] as u128) * (k_hi as u128) + (out[i + 1] as u128) + carry;
                out[i + 1] = t as u64;
                carry = t >> 64;
            }
        }
        Circle256 { limbs: out }
    }

    /// `k * self mod 1` for a signed multiplier.
    #[inline]
    pub fn mul_i128(self, k: i128) -> Self {
        let prod = self.mul_u128(k.unsigned_abs());
        if k < 0 {
            prod.wrapping_neg()
        } else {
            prod
        }
    }

    /// The most significant 128 bits of the fraction.
    #[inline]
    pub fn top128(self) -> u128 {
        ((self.limbs[3] as u128) << 64) | self.limbs[2] as u128
    }

    /// The fractional value, truncated to 53 bits; always in [0, 1).
    #[inline]
    pub fn to_f64(self) -> f64 {
        frac_from_u128(self.top128())
    }

    /// Distance to the nearest integer, with full relative precision even
    /// when the distance is far below 2^-53.
    pub fn dist_to_int(self) -> f64 {
        let v = if self.limbs[3] >> 63 == 1 {
            self.wrapping_neg()
        } else {
            self
        };
        limbs_to_f64(&v.limbs) * 2f64.powi(-(CIRCLE_BITS as i32))
    }
}

/// Fractional value of a 128-bit binary fraction, truncated to 53 bits.
#[inline]
pub fn frac_from_u128(v: u128) -> f64 {
    (v >> 75) as f64 * TWO_POW_M53
}

/// Distance to the nearest integer of a 128-bit binary fraction.
#[inline]
pub fn dist_from_u128(v: u128) -> f64 {
    let w = if v >> 127 == 1 { v.wrapping_neg() } else { v };
    (w as f64) * 2f64.powi(-128)
}

/// The integer `sum limbs[i] 2^(64 i)` as an f64 (relative error <= 2^-52).
fn limbs_to_f64(limbs: &[u64; 4]) -> f64 {
    let mut acc = 0.0;
    for &l in limbs.iter().rev() {
        acc = acc * 18_446_744_073_709_551_616.0 + l as f64;
    }
    acc
}

/// Convert a [`Circle256`] into an exact `BigUint` numerator over `2^256`.
pub fn circle_numerator(x: Circle256) -> BigUint {
    let mut digits = Vec::with_capacity(4);
    digits.extend_from_slice(&x.limbs);
    let mut n = BigUint::zero();
    for d in digits.iter().rev() {
        n <<= 64;
        n += BigUint::from(*d);
    }
    n
}

/// f64 value of `num / 2^256` for tests and diagnostics.
pub fn circle_to_f64_exact(x: Circle256) -> f64 {
    let n = circle_numerator(x);
    n.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-(CIRCLE_BITS as i32))
}
