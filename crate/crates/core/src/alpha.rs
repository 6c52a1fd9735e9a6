//! Continued-fraction representation of an irrational `alpha`.
//!
//! Indexing follows `p_n / q_n = [a0; a1, ..., a_{n-1}]` with
//! `q_0 = 0, q_1 = 1, p_0 = 1, p_1 = a0` and
//! `q_{n+1} = a_n q_n + q_{n-1}`. The error `eps_n = q_n alpha - p_n` is never
//! computed in floating point directly: it is bracketed using a deeper
//! convergent, and its magnitude is carried on a log scale because it
//! underflows f64 quickly for fast-growing partial quotients.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::bigutil::{ldexp, ln_biguint, ratio_f64, rem_euclid};
use crate::circle::{Circle256, CIRCLE_BITS};
use crate::error::{Error, Result};

/// Where the partial quotients `a_1, a_2, ...` come from.
#[derive(Clone, Debug, PartialEq)]
pub enum PartialQuotientSource {
    /// `[a0; (period)]` repeated forever.
    Periodic { a0: i64, period: Vec<u64> },
    /// A finite prefix; requesting terms past its end is an error.
    Explicit { a0: i64, terms: Vec<u64> },
    /// `(1 + sqrt 5) / 2 = [1; 1, 1, ...]`.
    Golden,
    /// `sqrt 2 = [1; 2, 2, ...]`.
    Sqrt2,
    /// Euler's number, `[2; 1, 2, 1, 1, 4, 1, 1, 6, ...]`.
    E,
    /// `a0 = 0`, `a_n = max(1, ceil(q_n^(gamma - 1)))`.
    PowerRule { gamma: f64 },
}

impl PartialQuotientSource {
    pub fn a0(&self) -> i64 {
        match self {
            Self::Periodic { a0, .. } | Self::Explicit { a0, .. } => *a0,
            Self::Golden | Self::Sqrt2 => 1,
            Self::E => 2,
            Self::PowerRule { .. } => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Periodic { period, .. } => {
                if period.is_empty() {
                    return Err(Error::InvalidSource("empty period".into()));
                }
                if period.contains(&0) {
                    return Err(Error::InvalidSource("partial quotients must be positive".into()));
                }
            }
            Self::Explicit { terms, .. } => {
                if terms.is_empty() {
                    return Err(Error::InvalidSource(
                        "need at least one partial quotient after a0".into(),
                    ));
                }
                if terms.contains(&0) {
                    return Err(Error::InvalidSource("partial quotients must be positive".into()));
                }
            }
            Self::PowerRule { gamma } => {
                if !gamma.is_finite() || *gamma < 1.0 {
                    return Err(Error::InvalidSource(format!(
                        "power-rule exponent must be a finite real >= 1, got {gamma}"
                    )));
                }
            }
            Self::Golden | Self::Sqrt2 | Self::E => {}
        }
        Ok(())
    }

    /// Partial quotient `a_i` (`i >= 1`), given the current denominator `q_i`.
    /// `None` when an explicit list is exhausted.
    fn term(&self, i: usize, q_i: &BigUint) -> Option<BigUint> {
        debug_assert!(i >= 1);
        match self {
            Self::Periodic { period, .. } => Some(BigUint::from(period[(i - 1) % period.len()])),
            Self::Explicit { terms, .. } => terms.get(i - 1).map(|&t| BigUint::from(t)),
            Self::Golden => Some(BigUint::one()),
            Self::Sqrt2 => Some(BigUint::from(2u32)),
            Self::E => Some(BigUint::from(if i % 3 == 2 { 2 * (i as u64 + 1) / 3 } else { 1 })),
            Self::PowerRule { gamma } => Some(power_rule_term(*gamma, q_i)),
        }
    }
}

/// `max(1, ceil(q^(gamma - 1)))`. Exact when `gamma - 1` is a small integer;
/// otherwise a deterministic 53-bit approximation of the power, rounded up.
fn power_rule_term(gamma: f64, q: &BigUint) -> BigUint {
    let e = gamma - 1.0;
    if e == 0.0 || q.is_one() {
        return BigUint::one();
    }
    if e.fract() == 0.0 && e <= 64.0 {
        return q.pow(e as u32).max(BigUint::one());
    }
    let t = e * ln_biguint(q);
    if t < 600.0 {
        let v = t.exp().ceil();
        return BigUint::from(v as u128).max(BigUint::one());
    }
    let k = (t / std::f64::consts::LN_2).floor() as u64 - 60;
    let mant = (t - k as f64 * std::f64::consts::LN_2).exp().ceil();
    BigUint::from(mant as u128) << k
}

impl fmt::Display for PartialQuotientSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Self::Golden => write!(f, "golden"),
            Self::Sqrt2 => write!(f, "sqrt2"),
            Self::E => write!(f, "e"),
            Self::Explicit { a0, terms } => write!(f, "cf:[{a0};{}]", join(terms)),
            Self::Periodic { a0, period } => write!(f, "period:[{a0};({})]", join(period)),
            Self::PowerRule { gamma } => write!(f, "power:{gamma}"),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let v: i128 = t
                .parse()
                .map_err(|_| Error::Parse(format!("bad partial quotient '{t}'")))?;
            if v <= 0 {
                return Err(Error::InvalidSource(format!(
                    "partial quotients must be positive, got {v}"
                )));
            }
            u64::try_from(v).map_err(|_| Error::Parse(format!("partial quotient '{t}' too large")))
        })
        .collect()
}

fn split_bracket(body: &str) -> Result<(i64, &str)> {
    let inner = body
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected [a0;...], got '{body}'")))?;
    let (a0, rest) = inner
        .split_once(';')
        .ok_or_else(|| Error::Parse(format!("missing ';' in '{body}'")))?;
    let a0 = a0
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad a0 '{a0}'")))?;
    Ok((a0, rest.trim()))
}

impl FromStr for PartialQuotientSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let src = match s {
            "golden" => Self::Golden,
            "sqrt2" => Self::Sqrt2,
            "e" => Self::E,
            _ => {
                let (kind, body) = s
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("unknown alpha spec '{s}'")))?;
                match kind.trim() {
                    "cf" => {
                        let (a0, rest) = split_bracket(body)?;
                        Self::Explicit { a0, terms: parse_list(rest)? }
                    }
                    "period" => {
                        let (a0, rest) = split_bracket(body)?;
                        let inner = rest
                            .strip_prefix('(')
                            .and_then(|r| r.strip_suffix(')'))
                            .ok_or_else(|| Error::Parse(format!("expected (a1,...,ak) in '{s}'")))?;
                        Self::Periodic { a0, period: parse_list(inner)? }
                    }
                    "power" => {
                        let gamma: f64 = body
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad gamma '{body}'")))?;
                        Self::PowerRule { gamma }
                    }
                    other => return Err(Error::Parse(format!("unknown alpha kind '{other}'"))),
                }
            }
        };
        src.validate()?;
        Ok(src)
    }
}

/// A real number known through a sign, `ln |x|` and a relative error radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedReal {
    pub sign: i8,
    pub ln_abs: f64,
    /// `| |x| - exp(ln_abs) | <= rel_radius * exp(ln_abs)`.
    pub rel_radius: f64,
}

impl CertifiedReal {
    /// Center value (underflows to 0 below ~1e-308).
    pub fn value(&self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    pub fn abs(&self) -> f64 {
        self.ln_abs.exp()
    }

    pub fn abs_radius(&self) -> f64 {
        self.rel_radius * self.abs()
    }

    /// Certified lower bound of `ln |x|`.
    pub fn ln_lower(&self) -> f64 {
        self.ln_abs + (-self.rel_radius).ln_1p()
    }

    /// Certified upper bound of `ln |x|`.
    pub fn ln_upper(&self) -> f64 {
        self.ln_abs + self.rel_radius.ln_1p()
    }
}

/// Convergent `p_n / q_n` with its certified error `eps_n = q_n alpha - p_n`.
#[derive(Clone, Debug)]
pub struct Convergent {
    pub index: usize,
    pub p: BigInt,
    pub q: BigUint,
    pub eps: CertifiedReal,
}

/// Fixed-point projection of `alpha mod 1` onto the 2^-256 grid.
#[derive(Clone, Copy, Debug)]
pub struct Projection {
    pub value: Circle256,
    /// Upper bound on `|alpha - value|` measured on the real line mod 1.
    pub delta: f64,
    /// Convergent index used to build the projection.
    pub index: usize,
}

#[derive(Debug)]
struct Cache {
    a: Vec<BigUint>,
    p: Vec<BigInt>,
    q: Vec<BigUint>,
    exhausted: bool,
}

#[derive(Debug)]
struct Inner {
    source: PartialQuotientSource,
    cache: RwLock<Cache>,
    projection: OnceLock<Projection>,
}

/// Shared handle to an irrational number given by its continued fraction.
/// Cloning is cheap; the convergent cache is shared and internally locked.
#[derive(Clone, Debug)]
pub struct Alpha {
    inner: Arc<Inner>,
}

/// Target relative radius for certified `eps_n`.
const EPS_REL_TARGET: f64 = 3.6e-15;
/// Deepening beyond this many extra convergents gives up on the target.
const EPS_MAX_EXTRA: usize = 200;

impl Alpha {
    pub fn new(source: PartialQuotientSource) -> Result<Self> {
        source.validate()?;
        let a0 = source.a0();
        let cache = Cache {
            a: vec![BigUint::zero()],
            p: vec![BigInt::one(), BigInt::from(a0)],
            q: vec![BigUint::zero(), BigUint::one()],
            exhausted: false,
        };
        Ok(Alpha {
            inner: Arc::new(Inner {
                source,
                cache: RwLock::new(cache),
                projection: OnceLock::new(),
            }),
        })
    }

    pub fn source(&self) -> &PartialQuotientSource {
        &self.inner.source
    }

    /// Materialize convergents up to index `n` (inclusive).
    pub fn ensure(&self, n: usize) -> Result<()> {
        {
            let c = self.inner.cache.read().unwrap();
            if c.q.len() > n {
                return Ok(());
            }
            if c.exhausted {
                return Err(Error::DepthExhausted { requested: n, available: c.q.len() - 1 });
            }
        }
        let mut c = self.inner.cache.write().unwrap();
        while c.q.len() <= n {
            let i = c.q.len() - 1;
            let Some(a) = self.inner.source.term(i, &c.q[i]) else {
                c.exhausted = true;
                return Err(Error::DepthExhausted { requested: n, available: i });
            };
            let q_next = &a * &c.q[i] + &c.q[i - 1];
            let p_next = BigInt::from(a.clone()) * &c.p[i] + &c.p[i - 1];
            c.a.push(a);
            c.q.push(q_next);
            c.p.push(p_next);
        }
        Ok(())
    }

    /// Largest materialized convergent index.
    pub fn cached_depth(&self) -> usize {
        self.inner.cache.read().unwrap().q.len() - 1
    }

    /// Partial quotient `a_i`, `i >= 1`.
    pub fn partial_quotient(&self, i: usize) -> Result<BigUint> {
        if i == 0 {
            return Err(Error::Precondition("a_0 is an integer; use Alpha::a0".into()));
        }
        self.ensure(i + 1)?;
        Ok(self.inner.cache.read().unwrap().a[i].clone())
    }

    pub fn a0(&self) -> i64 {
        self.inner.source.a0()
    }

    pub fn q(&self, n: usize) -> Result<BigUint> {
        self.ensure(n)?;
        Ok(self.inner.cache.read().unwrap().q[n].clone())
    }

    pub fn p(&self, n: usize) -> Result<BigInt> {
        self.ensure(n)?;
        Ok(self.inner.cache.read().unwrap().p[n].clone())
    }

    /// Denominator as u128 if it fits.
    pub fn q_u128(&self, n: usize) -> Result<Option<u128>> {
        Ok(self.q(n)?.to_u128())
    }

    /// Try to materialize convergents up to `n`; returns the depth reached.
    fn ensure_up_to(&self, n: usize) -> usize {
        match self.ensure(n) {
            Ok(()) => n,
            Err(_) => self.cached_depth(),
        }
    }

    /// Convergent with index `n >= 1`.
    pub fn convergent(&self, n: usize) -> Result<Convergent> {
        if n == 0 {
            return Err(Error::Precondition("convergent index starts at 1".into()));
        }
        self.ensure(n)?;
        let eps = self.eps(n)?;
        let c = self.inner.cache.read().unwrap();
        Ok(Convergent { index: n, p: c.p[n].clone(), q: c.q[n].clone(), eps })
    }

    /// Certified `eps_n = q_n alpha - p_n`, bracketed by deeper convergents.
    ///
    /// For `m > n`, `alpha` lies within `1 / (q_m q_{m+1})` of `p_m / q_m`, so
    /// `eps_n = (q_n p_m - p_n q_m) / q_m + err` with
    /// `|err| <= q_n / (q_m q_{m+1})`. When `a_m` is not known the bound uses
    /// `q_{m+1} >= q_m + q_{m-1}`.
    pub fn eps(&self, n: usize) -> Result<CertifiedReal> {
        self.ensure(n)?;
        let mut best: Option<CertifiedReal> = None;
        for m in n + 1..=n + EPS_MAX_EXTRA {
            if self.ensure_up_to(m) < m {
                break;
            }
            let cert = {
                let c = self.inner.cache.read().unwrap();
                let num = &c.p[m] * BigInt::from(c.q[n].clone()) - &c.p[n] * BigInt::from(c.q[m].clone());
                let q_next = if c.q.len() > m + 1 {
                    c.q[m + 1].clone()
                } else {
                    &c.q[m] + &c.q[m - 1]
                };
                let ln_center = ln_biguint(num.magnitude()) - ln_biguint(&c.q[m]);
                let ln_err = ln_biguint(&c.q[n]) - ln_biguint(&c.q[m]) - ln_biguint(&q_next);
                // the 1e-15 term absorbs rounding in the logarithms
                let rel = (ln_err - ln_center).exp() + 1e-15 * ln_center.abs().max(1.0);
                let sign = if num.sign() == num_bigint::Sign::Minus { -1 } else { 1 };
                CertifiedReal { sign, ln_abs: ln_center, rel_radius: rel }
            };
            let done = cert.rel_radius <= EPS_REL_TARGET.max(2e-15 * cert.ln_abs.abs());
            best = Some(cert);
            if done {
                break;
            }
        }
        best.ok_or(Error::DepthExhausted { requested: n + 1, available: n })
    }

    /// `|| h alpha ||` for `h >= 1`, with certified absolute error `<= eta`.
    ///
    /// Picks the first convergent with `h / q_n^2 <= eta / 2`, evaluates
    /// `|| h p_n / q_n ||` exactly and reports `h / q_n^2` plus the final
    /// rounding as the certificate.
    pub fn dist_nearest_int(&self, h: u64, eta: f64) -> Result<(f64, f64)> {
        if h == 0 {
            return Err(Error::Precondition("h must be positive".into()));
        }
        if !(eta > 0.0) {
            return Err(Error::Precondition("eta must be positive".into()));
        }
        let hb = BigUint::from(h);
        let mut n = 1;
        loop {
            n += 1;
            let q = self.q(n)?;
            let cert = ratio_f64(&hb, &(&q * &q));
            if cert <= eta / 2.0 {
                let p = self.p(n)?;
                let r = rem_euclid(&(p * BigInt::from(h)), &q);
                let s = &q - &r;
                let near = r.min(s);
                let v = ratio_f64(&near, &q);
                return Ok((v, cert + v * f64::EPSILON));
            }
        }
    }

    /// `|| h alpha ||` to relative precision `rel`, by deepening until the
    /// convergent error `h / (q_n q_{n+1})` is below `rel` times the value.
    pub fn dist_nearest_int_rel(&self, h: &BigUint, rel: f64) -> Result<f64> {
        if h.is_zero() {
            return Err(Error::Precondition("h must be positive".into()));
        }
        let mut n = 1;
        loop {
            n += 1;
            let q = self.q(n)?;
            let q_next = self.q(n + 1)?;
            let p = self.p(n)?;
            let r = rem_euclid(&(p * BigInt::from(h.clone())), &q);
            let near = r.clone().min(&q - &r);
            if near.is_zero() {
                continue;
            }
            // |h alpha - h p/q| <= h/(q q'), compare with near/q
            let err_over_val = ratio_f64(h, &(&near * &q_next));
            if err_over_val <= rel {
                return Ok(ratio_f64(&near, &q));
            }
        }
    }

    /// Fixed-point projection of `alpha mod 1` with error below 2^-255.
    pub fn projection(&self) -> Result<Projection> {
        if let Some(p) = self.inner.projection.get() {
            return Ok(*p);
        }
        let proj = self.projection_with_margin(0)?;
        let _ = self.inner.projection.set(proj);
        Ok(proj)
    }

    /// Projection built from the first convergent with
    /// `q_n q_{n+1} >= 2^(264 + extra_bits)`; larger margins use deeper
    /// convergents for the same 256-bit grid.
    pub fn projection_with_margin(&self, extra_bits: u32) -> Result<Projection> {
        let target = BigUint::one() << (CIRCLE_BITS + 8 + extra_bits);
        let mut n = 1;
        loop {
            let q = self.q(n)?;
            let q_next = self.q(n + 1)?;
            if &q * &q_next >= target {
                let p = self.p(n)?;
                let num = rem_euclid(&p, &q);
                let value = Circle256::from_ratio(&num, &q);
                let delta = ratio_f64(&BigUint::one(), &(&q * &q_next)) + ldexp(1.0, -(CIRCLE_BITS as i64));
                return Ok(Projection { value, delta, index: n });
            }
            n += 1;
        }
    }

    /// `{h alpha}` for a signed integer `h`, accurate to about 2^-53.
    pub fn frac_mul(&self, h: i128) -> Result<f64> {
        Ok(self.projection()?.value.mul_i128(h).to_f64())
    }

    /// Diophantine profile of `alpha` over convergents `2..=depth`.
    pub fn estimate_strong_type(&self, depth: usize) -> Result<DiophantineProfile> {
        DiophantineProfile::compute(self, depth)
    }
}

/// Convenience constructor matching the grammar in [`PartialQuotientSource`].
pub fn make_alpha(source: PartialQuotientSource) -> Result<Alpha> {
    Alpha::new(source)
}

/// One convergent of a [`DiophantineProfile`].
#[derive(Clone, Debug)]
pub struct ProfileRecord {
    pub n: usize,
    pub q: BigUint,
    pub ln_q: f64,
    /// `|| q_n alpha || = |eps_n|`.
    pub dist: CertifiedReal,
    /// `ln (q_n^gamma_hat || q_n alpha ||)`.
    pub ln_witness: f64,
}

/// Convergent-based estimate of the strong type of `alpha`.
#[derive(Clone, Debug)]
pub struct DiophantineProfile {
    pub depth: usize,
    pub records: Vec<ProfileRecord>,
    /// Least-squares slope of `ln(1/||q_n alpha||)` against `ln q_n` over the
    /// upper half of the usable convergents, floored at 1.
    pub gamma_hat: f64,
    /// `max_n ln(1/||q_n alpha||) / ln q_n` over convergents with `q_n >= 2`.
    /// Biased upward at small `n` by bounded factors; kept as a diagnostic.
    pub gamma_pointwise_max: f64,
}

impl DiophantineProfile {
    fn compute(alpha: &Alpha, depth: usize) -> Result<Self> {
        if depth < 3 {
            return Err(Error::Precondition("depth must be at least 3".into()));
        }
        let mut records = Vec::with_capacity(depth - 1);
        for n in 2..=depth {
            let q = alpha.q(n)?;
            let dist = alpha.eps(n)?;
            records.push(ProfileRecord { n, ln_q: ln_biguint(&q), q, dist, ln_witness: 0.0 });
        }
        let usable: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.q > BigUint::one())
            .map(|r| (r.ln_q, -r.dist.ln_abs))
            .collect();
        if usable.len() < 2 {
            return Err(Error::Insufficient("fewer than two convergents with q_n >= 2".into()));
        }
        let pointwise = usable.iter().map(|(x, y)| y / x).fold(f64::NEG_INFINITY, f64::max);
        let upper = &usable[usable.len() / 2..];
        let upper = if upper.len() < 2 { &usable[usable.len() - 2..] } else { upper };
        let slope = ls_slope(upper);
        let gamma_hat = slope.max(1.0);
        for r in &mut records {
            r.ln_witness = gamma_hat * r.ln_q + r.dist.ln_abs;
        }
        Ok(DiophantineProfile {
            depth,
            records,
            gamma_hat,
            gamma_pointwise_max: pointwise.max(1.0),
        })
    }
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::ToBigUint;
    use num_integer::Integer;

    fn alpha(s: &str) -> Alpha {
        Alpha::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        let a = alpha("golden");
        let q: Vec<u64> = (1..=8).map(|n| a.q(n).unwrap().to_u64().unwrap()).collect();
        assert_eq!(q, vec![1, 1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn sqrt2_fourth_convergent() {
        let a = alpha("sqrt2");
        assert_eq!(a.p(4).unwrap(), BigInt::from(17));
        assert_eq!(a.q(4).unwrap(), BigUint::from(12u32));
    }

    #[test]
    fn explicit_list_exhausts() {
        let a = alpha("cf:[0;1]");
        assert!(a.q(2).is_ok());
        assert!(matches!(a.convergent(5), Err(Error::DepthExhausted { .. })));
    }

    #[test]
    fn invalid_sources_rejected() {
        assert!("cf:[0;1,0,2]".parse::<PartialQuotientSource>().is_err());
        assert!("cf:[0;1,-2]".parse::<PartialQuotientSource>().is_err());
        assert!("period:[1;()]".parse::<PartialQuotientSource>().is_err());
        assert!("power:0.5".parse::<PartialQuotientSource>().is_err());
        assert!("nope".parse::<PartialQuotientSource>().is_err());
    }

    #[test]
    fn grammar_round_trips() {
        for s in ["golden", "sqrt2", "e", "cf:[-3;1,4,1,5]", "period:[2;(1,2,3)]", "power:4", "power:2.5"] {
            let src: PartialQuotientSource = s.parse().unwrap();
            assert_eq!(src.to_string(), s);
            assert_eq!(src.to_string().parse::<PartialQuotientSource>().unwrap(), src);
        }
    }

    /// Continued fraction of the exact rational sum_{k<=60} 1/k!, which agrees
    /// with e to ~1e-82 and therefore shares its leading partial quotients.
    #[test]
    fn e_pattern_matches_high_precision_expansion() {
        let mut num = BigUint::zero();
        let mut den = BigUint::one();
        for k in (0..=60u32).rev() {
            // num/den <- 1 + num/(den*k) evaluated Horner-style from the tail
            if k == 0 {
                num += &den;
            } else {
                num += &den;
                den *= k;
            }
        }
        let (mut x, mut y) = (num, den);
        let mut cf = Vec::new();
        for _ in 0..30 {
            let (qt, r) = x.div_rem(&y);
            cf.push(qt.to_u64().unwrap());
            x = y;
            y = r;
        }
        let a = alpha("e");
        assert_eq!(cf[0], 2);
        for (i, &t) in cf.iter().enumerate().skip(1) {
            assert_eq!(a.partial_quotient(i).unwrap(), t.to_biguint().unwrap(), "a_{i}");
        }
    }

    #[test]
    fn power_rule_denominators() {
        let a = alpha("power:4");
        let q: Vec<u64> = (1..=5).map(|n| a.q(n).unwrap().to_u64().unwrap()).collect();
        assert_eq!(q, vec![1, 1, 2, 17, 83523]);
        let a8 = alpha("power:8");
        assert_eq!(a8.q(4).unwrap(), BigUint::from(257u32));
    }

    #[test]
    fn eps_sign_and_bounds() {
        for s in ["golden", "sqrt2", "e", "power:4"] {
            let a = alpha(s);
            for n in 2..9 {
                let c = a.convergent(n).unwrap();
                let want = if n % 2 == 1 { 1 } else { -1 };
                assert_eq!(c.eps.sign, want, "{s} n={n}");
                let ql = ln_biguint(&a.q(n + 1).unwrap());
                let qs = ln_biguint(&(a.q(n + 1).unwrap() + a.q(n).unwrap()));
                assert!(c.eps.ln_lower() <= -ql, "{s} n={n}");
                assert!(c.eps.ln_upper() >= -qs, "{s} n={n}");
                // alpha lies between p_j/q_j for j = n+2, n+3: check both
                // rational endpoints against the bounds exactly
                for j in [n + 2, n + 3] {
                    let num = (a.p(j).unwrap() * BigInt::from(c.q.clone())
                        - &c.p * BigInt::from(a.q(j).unwrap()))
                        .magnitude()
                        .clone();
                    let qj = a.q(j).unwrap();
                    let q1 = a.q(n + 1).unwrap();
                    assert!(&num * &q1 <= qj, "{s} n={n} j={j}");
                    assert!(&num * (&q1 + &c.q) >= qj, "{s} n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn golden_dist_h1() {
        let a = alpha("golden");
        let (v, cert) = a.dist_nearest_int(1, 1e-12).unwrap();
        assert!((v - 0.381_966_011_250_105_1).abs() < 1e-12);
        assert!(cert <= 1e-12);
        assert!(a.dist_nearest_int(0, 1e-12).is_err());
    }

    #[test]
    fn frac_mul_golden() {
        let a = alpha("golden");
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for h in [-7i128, -1, 1, 2, 3, 1000] {
            let want = (h as f64 * phi).rem_euclid(1.0);
            assert!((a.frac_mul(h).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn strong_type_estimates() {
        let g = alpha("golden").estimate_strong_type(30).unwrap();
        assert!((0.99..=1.01).contains(&g.gamma_hat), "{}", g.gamma_hat);
        let p = alpha("power:4").estimate_strong_type(8).unwrap();
        assert!((3.8..=4.2).contains(&p.gamma_hat), "{}", p.gamma_hat);
        let s = alpha("sqrt2").estimate_strong_type(30).unwrap();
        assert!((0.99..=1.01).contains(&s.gamma_hat), "{}", s.gamma_hat);
    }

    #[test]
    fn relative_dist_is_tight_at_convergents() {
        let a = alpha("golden");
        let q = a.q(40).unwrap();
        let v = a.dist_nearest_int_rel(&q, 1e-14).unwrap();
        let e = a.eps(40).unwrap();
        assert!((v / e.abs() - 1.0).abs() < 1e-12);
    }
}
