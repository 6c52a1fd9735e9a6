//! Reference computations that share no arithmetic with the library.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

/// Partial quotients `a_0, a_1, ...` of `num/den` by Euclid's algorithm.
pub fn rational_cf(mut num: BigUint, mut den: BigUint, terms: usize) -> Vec<BigUint> {
    let mut out = Vec::new();
    while out.len() < terms && !den.is_zero() {
        out.push(&num / &den);
        let r = &num % &den;
        num = den;
        den = r;
    }
    out
}

/// Partial quotients of `sum_{k<=150} 1/k!`, an exact fraction within
/// `10^-260` of e, so its leading partial quotients (far beyond 60) are those of e.
pub fn e_partial_quotients(terms: usize) -> Vec<BigUint> {
    let mut fact = BigUint::one();
    let mut num = BigUint::zero();
    let big = (1..=150u32).fold(BigUint::one(), |f, k| f * k);
    for k in 0..=150u32 {
        if k > 0 {
            fact *= k;
        }
        num += &big / &fact;
    }
    rational_cf(num, big, terms)
}

/// `(p_n, q_n)` for `n = 0..=depth` with `p_0 = 1, q_0 = 0, p_1 = a_0,
/// q_1 = 1`.
pub fn convergents(a: &[BigUint], depth: usize) -> (Vec<BigInt>, Vec<BigUint>) {
    let mut p = vec![BigInt::one(), BigInt::from(a[0].clone())];
    let mut q = vec![BigUint::zero(), BigUint::one()];
    for n in 1..depth {
        let an = &a[n];
        p.push(BigInt::from(an.clone()) * &p[n] + &p[n - 1]);
        q.push(an * &q[n] + &q[n - 1]);
    }
    (p, q)
}

/// Partial quotients of power-rule(gamma) for integer `gamma`:
/// `a_0 = 0`, `a_n = max(1, q_n^(gamma-1))`.
pub fn power_rule_quotients(gamma: u32, depth: usize) -> Vec<BigUint> {
    let mut a = vec![BigUint::zero()];
    let mut q_prev = BigUint::zero();
    let mut q = BigUint::one();
    for _ in 1..depth {
        let an = q.pow(gamma - 1).max(BigUint::one());
        let next = &an * &q + &q_prev;
        a.push(an);
        q_prev = q;
        q = next;
    }
    a
}

/// `{k phi}` for the golden ratio, from `floor(k sqrt 5)` computed by an
/// integer square root at 2^-120 resolution.
pub fn golden_frac(k: u64) -> f64 {
    let shift = 120u32;
    let k = BigUint::from(k);
    // k (1 + sqrt 5) / 2 scaled by 2^shift
    let root = (BigUint::from(5u32) * &k * &k << (2 * shift)).sqrt();
    let scaled = ((&k << shift) + root) >> 1u32;
    let frac = &scaled - ((&scaled >> shift) << shift);
    frac.to_f64().unwrap() / 2f64.powi(shift as i32)
}

/// Extreme discrepancy by enumerating interval endpoints with one-sided
/// limits, counting points directly.
pub fn brute_extreme(points: &[f64]) -> f64 {
    let n = points.len() as f64;
    let mut best = 0f64;
    // count minus length: closed intervals [x_i, x_j]
    for &a in points {
        for &b in points {
            if b < a {
                continue;
            }
            let c = points.iter().filter(|&&x| x >= a && x <= b).count() as f64;
            best = best.max(c / n - (b - a));
        }
    }
    // length minus count: open intervals between consecutive barriers
    let mut lefts = vec![(0.0, true)];
    lefts.extend(points.iter().map(|&x| (x, false)));
    let mut rights: Vec<f64> = points.to_vec();
    rights.push(1.0);
    for &(a, inclusive) in &lefts {
        for &b in &rights {
            if b <= a {
                continue;
            }
            let c = points
                .iter()
                .filter(|&&x| (if inclusive { x >= a } else { x > a }) && x < b)
                .count() as f64;
            best = best.max((b - a) - c / n);
        }
    }
    best
}

/// Star discrepancy over anchored intervals `[0, b)` and their right limits.
pub fn brute_star(points: &[f64]) -> f64 {
    let n = points.len() as f64;
    let mut best = 0f64;
    let mut ends: Vec<f64> = points.to_vec();
    ends.push(1.0);
    for &b in &ends {
        let open = points.iter().filter(|&&x| x < b).count() as f64;
        let closed = points.iter().filter(|&&x| x <= b).count() as f64;
        best = best.max(b - open / n).max(closed / n - b);
    }
    best
}

/// `E |sum_{k=m+1}^{m+n} e(S_k h alpha)|^{2p}` by enumerating every path,
/// with `alpha` as a plain f64.
pub fn naive_moment(values: &[(i64, f64)], alpha: f64, h: u64, m: u64, n: u64, p: u32) -> f64 {
    let len = (m + n) as usize;
    let r = values.len();
    let mut total = 0.0;
    for code in 0..r.pow(len as u32) {
        let mut c = code;
        let mut s: i64 = 0;
        let mut prob = 1.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 1..=len {
            let (v, w) = values[c % r];
            c /= r;
            s += v;
            prob *= w;
            if k as u64 > m {
                let x = (s as f64 * h as f64 * alpha).rem_euclid(1.0);
                sum += Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x);
            }
        }
        total += prob * sum.norm_sqr().powi(p as i32);
    }
    total
}

pub const GOLDEN: f64 = 1.618_033_988_749_895;
pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Natural log of a positive big integer from its top 64 bits.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Check the library's convergents of `alpha` against oracle partial
/// quotients and the classical identities for `1 <= n <= depth`:
/// the recurrence with `q_1 = 1, q_2 = a_1`, the determinant
/// `p_n q_{n-1} - q_n p_{n-1} = (-1)^n`, the sign `(-1)^{n+1}` of
/// `q_n alpha - p_n`, and `1/(q_{n+1}+q_n) <= ||q_n alpha|| <= 1/q_{n+1}`.
///
/// The last two are proved exactly: `alpha` lies between the convergents
/// `j = n+1` and `j = n+2`, neither side contains `p_n/q_n`, and
/// `|q_n x - p_n|` is linear there, so checking both endpoints suffices.
pub fn check_cf_invariants(
    alpha: &alpha_walk_core::Alpha,
    oracle_a: &[BigUint],
    depth: usize,
) -> Result<(), String> {
    let (op, oq) = convergents(oracle_a, depth + 3);
    for i in 0..depth + 2 {
        let lib = if i == 0 {
            BigUint::from(alpha.a0().unsigned_abs())
        } else {
            alpha.partial_quotient(i).map_err(|e| e.to_string())?
        };
        if lib != oracle_a[i] {
            return Err(format!("a_{i}: library {lib} vs oracle {}", oracle_a[i]));
        }
    }
    let q = |n: usize| alpha.q(n).unwrap();
    let p = |n: usize| alpha.p(n).unwrap();
    if q(1) != BigUint::one() || q(2) != oracle_a[1] {
        return Err("initial conditions q_1 = 1, q_2 = a_1".into());
    }
    for n in 1..=depth + 2 {
        if q(n) != oq[n] || p(n) != op[n] {
            return Err(format!("convergent {n} differs from oracle"));
        }
    }
    for n in 1..=depth {
        if n >= 2 {
            if q(n + 1) != &oracle_a[n] * q(n) + q(n - 1) {
                return Err(format!("recurrence fails at n = {n}"));
            }
            let det = p(n) * BigInt::from(q(n - 1)) - BigInt::from(q(n)) * p(n - 1);
            let want = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            if det != want {
                return Err(format!("determinant at n = {n} is {det}"));
            }
        }
        let want_positive = n % 2 == 1;
        for j in [n + 1, n + 2] {
            // q_n p_j / q_j - p_n = d / q_j
            let d = BigInt::from(q(n)) * p(j) - p(n) * BigInt::from(q(j));
            if d.is_zero() || (d > BigInt::zero()) != want_positive {
                return Err(format!("sign of q_{n} x - p_{n} wrong at endpoint {j}"));
            }
            if n >= 2 {
                let ad = d.magnitude().clone();
                let qj = q(j);
                if ad.clone() * q(n + 1) > qj || qj > ad * (q(n + 1) + q(n)) {
                    return Err(format!("distance bounds fail for n = {n} at endpoint {j}"));
                }
            }
        }
        if n >= 2 {
            let eps = alpha.eps(n).map_err(|e| e.to_string())?;
            let ln_lo = -ln_big(&(q(n + 1) + q(n)));
            let ln_hi = -ln_big(&q(n + 1));
            if (eps.sign > 0) != want_positive {
                return Err(format!("certified sign of eps_{n} wrong"));
            }
            if eps.ln_upper() < ln_lo - 1e-12 || eps.ln_lower() > ln_hi + 1e-12 {
                return Err(format!("certified ln|eps_{n}| = {} outside [{ln_lo}, {ln_hi}]", eps.ln_abs));
            }
        }
    }
    Ok(())
}

/// `2^shift ||x||` rounded down for `x = floor(root) / 2^shift` given the
/// scaled value; returns `||x||` as f64 without cancellation.
fn scaled_dist(scaled: &BigUint, shift: u32) -> f64 {
    let one = BigUint::one() << shift;
    let frac = scaled - ((scaled >> shift) << shift);
    let other = &one - &frac;
    let d = if frac < other { frac } else { other };
    d.to_f64().unwrap() / 2f64.powi(shift as i32)
}

/// `||h phi||` for the golden ratio at 2^-120 resolution.
pub fn golden_dist(h: u64) -> f64 {
    let shift = 120u32;
    let h = BigUint::from(h);
    let root = (BigUint::from(5u32) * &h * &h << (2 * shift)).sqrt();
    scaled_dist(&(((&h << shift) + root) >> 1u32), shift)
}

/// `||h sqrt 2||` at 2^-120 resolution.
pub fn sqrt2_dist(h: u64) -> f64 {
    let shift = 120u32;
    let h = BigUint::from(h);
    scaled_dist(&(BigUint::from(2u32) * &h * &h << (2 * shift)).sqrt(), shift)
}
