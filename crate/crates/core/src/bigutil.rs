//! Small numeric helpers for arbitrary-precision integers.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

const LN2: f64 = std::f64::consts::LN_2;

/// Natural logarithm of a positive big integer. Returns `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * LN2
}

/// `x * 2^e` without intermediate overflow or premature underflow.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// `num / den` rounded to f64, correct to a few ulps for any magnitudes.
pub fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    let k = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if k >= 0 {
        (num << (k as u64)) / den
    } else {
        num / (den << ((-k) as u64))
    };
    ldexp(q.to_f64().unwrap(), -k)
}

/// Signed version of [`ratio_f64`].
pub fn ratio_f64_signed(num: &BigInt, den: &BigUint) -> f64 {
    let v = ratio_f64(num.magnitude(), den);
    if num.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// `x mod m` in `[0, m)` for a signed numerator.
pub fn rem_euclid(x: &BigInt, m: &BigUint) -> BigUint {
    let r = x.magnitude() % m;
    if x.sign() == Sign::Minus && !r.is_zero() {
        m - r
    } else {
        r
    }
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_of_large_powers() {
        let x = BigUint::from(3u32).pow(1000);
        assert!((ln_biguint(&x) - 1000.0 * 3f64.ln()).abs() < 1e-9);
        assert_eq!(ln_biguint(&BigUint::from(1u32)), 0.0);
    }

    #[test]
    fn ratio_extremes() {
        let big = BigUint::from(10u32).pow(400);
        let v = ratio_f64(&BigUint::from(3u32), &big);
        assert_eq!(v, 0.0);
        let v = ratio_f64(&BigUint::from(1u32), &BigUint::from(3u32));
        assert!((v - 1.0 / 3.0).abs() < 1e-16);
        let num = BigUint::from(10u32).pow(300) * 7u32;
        let v = ratio_f64(&num, &BigUint::from(10u32).pow(301));
        assert!((v - 0.7).abs() < 1e-15);
    }

    #[test]
    fn signed_remainder() {
        let m = BigUint::from(7u32);
        assert_eq!(rem_euclid(&BigInt::from(-3), &m), BigUint::from(4u32));
        assert_eq!(rem_euclid(&BigInt::from(-14), &m), BigUint::from(0u32));
        assert_eq!(rem_euclid(&BigInt::from(10), &m), BigUint::from(3u32));
    }

    #[test]
    fn compensated_sum() {
        let mut s = NeumaierSum::new();
        s.add(1.0);
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.value(), 2.0);
    }
}
