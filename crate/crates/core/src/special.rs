//! Riemann and Hurwitz zeta functions and the polylogarithm on the unit circle.

use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// B_2, B_4, ..., B_16.
const BERNOULLI_2J: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const EM_TERMS: usize = 16;

/// Hurwitz zeta `sum_{k >= 0} (k + a)^{-s}` for `a > 0`, `s != 1`, via
/// Euler-Maclaurin summation after `EM_TERMS` explicit terms (analytic
/// continuation for `s < 1`, accurate for `s > -10`).
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(a > 0.0, "hurwitz_zeta needs a > 0");
    assert!(s != 1.0, "pole at s = 1");
    let mut head = 0.0;
    for k in 0..EM_TERMS {
        head += (k as f64 + a).powf(-s);
    }
    let x = EM_TERMS as f64 + a;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // term j: B_{2j}/(2j)! * s(s+1)...(s+2j-2) * x^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut xpow = x.powf(-s - 1.0);
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        tail += b / fact * rising * xpow;
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (s + j2 - 1.0) * (s + j2);
        fact *= (j2 + 1.0) * (j2 + 2.0);
        xpow /= x * x;
    }
    head + tail
}

/// Riemann zeta for real `s != 1`.
pub fn zeta(s: f64) -> f64 {
    if s >= -1.0 {
        return hurwitz_zeta(s, 1.0);
    }
    if s.fract() == 0.0 && (s as i64) % 2 == 0 {
        return 0.0;
    }
    // functional equation
    let one_minus = 1.0 - s;
    2f64.powf(s) * PI.powf(s - 1.0) * (PI * s / 2.0).sin() * gamma(one_minus) * zeta(one_minus)
}

/// Number of series terms used by [`polylog_unit`].
const POLYLOG_TERMS: usize = 64;

/// `Li_s(e^{it}) = sum_{n >= 1} e^{int} / n^s` for real `s > 1`.
///
/// Uses the expansion around `mu = it` valid for `|mu| < 2 pi`:
/// `Li_s(e^mu) = Gamma(1-s) (-mu)^{s-1} + sum_k zeta(s-k) mu^k / k!`, with the
/// harmonic-number form of the singular term when `s` is an integer.
pub fn polylog_unit(s: f64, t: f64) -> Complex64 {
    assert!(s > 1.0, "polylog_unit needs s > 1");
    let t = reduce_angle(t);
    if t == 0.0 {
        return Complex64::new(zeta(s), 0.0);
    }
    let mu = Complex64::new(0.0, t);
    let s_int = s.fract() == 0.0;
    let m = s as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0); // mu^k / k!
    for k in 0..POLYLOG_TERMS {
        if !(s_int && k + 1 == m) {
            acc += pow * zeta(s - k as f64);
        }
        pow = pow * mu / (k as f64 + 1.0);
    }
    let singular = if s_int {
        // mu^{m-1}/(m-1)! * (H_{m-1} - ln(-mu))
        let harmonic: f64 = (1..m).map(|j| 1.0 / j as f64).sum();
        let mut p = Complex64::new(1.0, 0.0);
        for j in 1..m {
            p = p * mu / j as f64;
        }
        p * (Complex64::new(harmonic, 0.0) - (-mu).ln())
    } else {
        (-mu).powf(s - 1.0) * gamma(1.0 - s)
    };
    acc + singular
}

/// Reduce an angle to `(-pi, pi]`.
pub fn reduce_angle(t: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = t.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-14);
        assert!((zeta(0.0) + 0.5).abs() < 1e-14);
        assert!((zeta(-1.0) + 1.0 / 12.0).abs() < 1e-14);
        assert!((zeta(-3.0) - 1.0 / 120.0).abs() < 1e-14);
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-13);
        assert!((zeta(-2.5) - 0.008_516_928_777_850_33).abs() < 1e-13);
    }

    #[test]
    fn hurwitz_shift_identity() {
        for &s in &[1.5, 2.0, 3.0] {
            for &a in &[1.0, 2.5, 1e6] {
                let lhs = hurwitz_zeta(s, a);
                let rhs = a.powf(-s) + hurwitz_zeta(s, a + 1.0);
                assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs());
            }
        }
    }

    /// Direct summation with a summation-by-parts tail estimate.
    fn polylog_direct(s: f64, t: f64) -> Complex64 {
        let n = 200_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            acc += Complex64::from_polar((k as f64).powf(-s), k as f64 * t);
        }
        // sum_{k>n} e^{ikt} k^{-s} ~ e^{i(n+1)t} (n+1)^{-s} / (1 - e^{it})
        let tail = Complex64::from_polar((n as f64 + 1.0).powf(-s), (n as f64 + 1.0) * t)
            / (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, t));
        acc + tail
    }

    #[test]
    fn polylog_matches_direct_sum() {
        for &s in &[1.5, 2.0, 2.5, 3.0] {
            for &t in &[0.3, 1.0, 2.0, 3.1, -1.7, 7.0] {
                let a = polylog_unit(s, t);
                let b = polylog_direct(s, t);
                assert!((a - b).norm() < 1e-8, "s={s} t={t} {a} {b}");
            }
        }
    }

    #[test]
    fn dilog_closed_form() {
        // Re Li_2(e^{it}) = pi^2/6 - t(2pi - t)/4 for t in [0, 2pi]
        for &t in &[0.1, 1.0, 2.5, 3.0] {
            let want = PI * PI / 6.0 - t * (2.0 * PI - t) / 4.0;
            assert!((polylog_unit(2.0, t).re - want).abs() < 1e-13);
        }
    }
}
