//! Integer-valued step distributions.
//!
//! Finite-support laws are stored as sorted `(value, probability)` pairs.
//! Zeta-tail laws have `P(X = n) = n^{-(1+beta)} / zeta(1+beta)` for `n >= 1`;
//! the symmetric variant puts half of that mass on each of `n` and `-n`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use rand::Rng;

use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, polylog_unit, zeta};

/// Parsed form of a step distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum StepSpec {
    /// `P(X = a) = w`, `P(X = b) = 1 - w`.
    TwoPoint { a: i64, b: i64, w: f64 },
    /// Explicit finite support.
    Pmf(Vec<(i64, f64)>),
    Zeta { beta: f64 },
    SymZeta { beta: f64 },
}

impl fmt::Display for StepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSpec::TwoPoint { a, b, w } => write!(f, "twopoint:{a},{b},{w}"),
            StepSpec::Pmf(v) => {
                let items: Vec<String> = v.iter().map(|(x, p)| format!("({x},{p})")).collect();
                write!(f, "pmf:[{}]", items.join(","))
            }
            StepSpec::Zeta { beta } => write!(f, "zeta:{beta}"),
            StepSpec::SymZeta { beta } => write!(f, "symzeta:{beta}"),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: f64 = n.trim().parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))?;
        let d: f64 = d.trim().parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))?;
        return Ok(n / d);
    }
    s.parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

fn parse_i64(s: &str) -> Result<i64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad integer '{s}'")))
}

impl FromStr for StepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("unknown distribution spec '{s}'")))?;
        match kind.trim() {
            "twopoint" => {
                let parts: Vec<&str> = body.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("twopoint needs a,b,w: '{s}'")));
                }
                Ok(StepSpec::TwoPoint {
                    a: parse_i64(parts[0])?,
                    b: parse_i64(parts[1])?,
                    w: parse_f64(parts[2])?,
                })
            }
            "pmf" => {
                let inner = body
                    .trim()
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| Error::Parse(format!("expected pmf:[(v,p),...]: '{s}'")))?;
                let mut out = Vec::new();
                for item in inner.split(')') {
                    let item = item.trim().trim_start_matches(',').trim();
                    if item.is_empty() {
                        continue;
                    }
                    let item = item
                        .strip_prefix('(')
                        .ok_or_else(|| Error::Parse(format!("bad pmf entry '{item}'")))?;
                    let (v, p) = item
                        .split_once(',')
                        .ok_or_else(|| Error::Parse(format!("bad pmf entry '{item}'")))?;
                    out.push((parse_i64(v)?, parse_f64(p)?));
                }
                Ok(StepSpec::Pmf(out))
            }
            "zeta" => Ok(StepSpec::Zeta { beta: parse_f64(body)? }),
            "symzeta" => Ok(StepSpec::SymZeta { beta: parse_f64(body)? }),
            other => Err(Error::Parse(format!("unknown distribution kind '{other}'"))),
        }
    }
}

/// Size of the precomputed tail-mass table for zeta-tail sampling.
pub const ZETA_TABLE_LEN: usize = 1 << 20;

#[derive(Debug)]
enum Law {
    Finite {
        values: Vec<i64>,
        probs: Vec<f64>,
        cdf: Vec<f64>,
    },
    Zeta {
        s: f64,
        norm: f64,
        symmetric: bool,
        /// `tail[n] = P(|X| >= n)` for `1 <= n <= ZETA_TABLE_LEN + 1`.
        tail: OnceLock<Vec<f64>>,
    },
}

/// An integer step distribution. Cloning shares the (lazily built) tables.
#[derive(Clone, Debug)]
pub struct StepDistribution {
    spec: StepSpec,
    law: Arc<Law>,
}

impl StepDistribution {
    pub fn new(spec: StepSpec) -> Result<Self> {
        let law = match &spec {
            StepSpec::TwoPoint { a, b, w } => {
                if a == b {
                    return Err(Error::InvalidDistribution("two-point values must differ".into()));
                }
                if !(*w > 0.0 && *w < 1.0) {
                    return Err(Error::InvalidDistribution(format!("weight {w} not in (0, 1)")));
                }
                finite_law(vec![(*a, *w), (*b, 1.0 - *w)])?
            }
            StepSpec::Pmf(v) => finite_law(v.clone())?,
            StepSpec::Zeta { beta } | StepSpec::SymZeta { beta } => {
                if !(beta.is_finite() && *beta > 0.0) {
                    return Err(Error::InvalidDistribution(format!("beta must be positive, got {beta}")));
                }
                let s = 1.0 + beta;
                Law::Zeta {
                    s,
                    norm: zeta(s),
                    symmetric: matches!(spec, StepSpec::SymZeta { .. }),
                    tail: OnceLock::new(),
                }
            }
        };
        Ok(StepDistribution { spec, law: Arc::new(law) })
    }

    pub fn spec(&self) -> &StepSpec {
        &self.spec
    }

    /// `P(X = v)`.
    pub fn pmf(&self, v: i64) -> f64 {
        match &*self.law {
            Law::Finite { values, probs, .. } => match values.binary_search(&v) {
                Ok(i) => probs[i],
                Err(_) => 0.0,
            },
            Law::Zeta { s, norm, symmetric, .. } => {
                if v == 0 || (!symmetric && v < 0) {
                    return 0.0;
                }
                let p = (v.unsigned_abs() as f64).powf(-s) / norm;
                if *symmetric {
                    p / 2.0
                } else {
                    p
                }
            }
        }
    }

    /// Support values in enumeration order; `None` for infinite support.
    pub fn finite_support(&self) -> Option<&[i64]> {
        match &*self.law {
            Law::Finite { values, .. } => Some(values),
            Law::Zeta { .. } => None,
        }
    }

    /// The `k`-th support value in a fixed enumeration (`1, 2, ...` or
    /// `1, -1, 2, -2, ...`).
    pub fn support_value(&self, k: usize) -> Option<i64> {
        match &*self.law {
            Law::Finite { values, .. } => values.get(k).copied(),
            Law::Zeta { symmetric: false, .. } => Some(k as i64 + 1),
            Law::Zeta { symmetric: true, .. } => {
                let m = (k / 2) as i64 + 1;
                Some(if k % 2 == 0 { m } else { -m })
            }
        }
    }

    /// Tail mass `P(|X| >= n)` for the zeta laws, `n >= 1`.
    pub fn zeta_tail(&self, n: f64) -> Option<f64> {
        match &*self.law {
            Law::Zeta { s, norm, .. } => Some(if n <= 1.0 { 1.0 } else { hurwitz_zeta(*s, n) / norm }),
            Law::Finite { .. } => None,
        }
    }

    /// `E X`, or `None` when the mean is undefined.
    pub fn mean(&self) -> Option<f64> {
        match &*self.law {
            Law::Finite { values, probs, .. } => {
                Some(values.iter().zip(probs).map(|(&v, &p)| v as f64 * p).sum())
            }
            Law::Zeta { s, norm, symmetric, .. } => {
                if *s <= 2.0 {
                    None
                } else if *symmetric {
                    Some(0.0)
                } else {
                    Some(zeta(s - 1.0) / norm)
                }
            }
        }
    }

    /// `E |X|`, or `None` when infinite.
    pub fn abs_mean(&self) -> Option<f64> {
        match &*self.law {
            Law::Finite { values, probs, .. } => {
                Some(values.iter().zip(probs).map(|(&v, &p)| v.unsigned_abs() as f64 * p).sum())
            }
            Law::Zeta { s, norm, .. } => (*s > 2.0).then(|| zeta(s - 1.0) / norm),
        }
    }

    /// `E X^2`, or `None` when infinite.
    pub fn second_moment(&self) -> Option<f64> {
        match &*self.law {
            Law::Finite { values, probs, .. } => {
                Some(values.iter().zip(probs).map(|(&v, &p)| (v as f64).powi(2) * p).sum())
            }
            Law::Zeta { s, norm, .. } => (*s > 3.0).then(|| zeta(s - 2.0) / norm),
        }
    }

    /// Smallest `m` with `P(X <= m) >= 1/2`.
    pub fn median(&self) -> i64 {
        match &*self.law {
            Law::Finite { values, cdf, .. } => {
                let i = cdf.iter().position(|&c| c >= 0.5 - 1e-15).unwrap_or(values.len() - 1);
                values[i]
            }
            Law::Zeta { symmetric: true, .. } => -1,
            Law::Zeta { .. } => {
                let tail = self.tail_table();
                // P(X <= m) = 1 - tail[m + 1]
                (1..tail.len() - 1).find(|&m| 1.0 - tail[m + 1] >= 0.5).unwrap_or(1) as i64
            }
        }
    }

    /// gcd of `|v|` over the support.
    pub fn support_gcd(&self) -> u64 {
        match &*self.law {
            Law::Finite { values, .. } => values.iter().fold(0u64, |g, v| g.gcd(&v.unsigned_abs())),
            Law::Zeta { .. } => 1,
        }
    }

    /// gcd of all differences of distinct support values.
    ///
    /// For infinite support the enumeration stops once the gcd has been
    /// unchanged for 32 further values.
    pub fn support_gcd_diff(&self) -> Result<u64> {
        const WINDOW: usize = 32;
        let first = self.support_value(0).expect("support is nonempty");
        let mut g = 0u64;
        let mut stable = 0;
        let mut k = 1;
        while let Some(v) = self.support_value(k) {
            let ng = g.gcd(&(v - first).unsigned_abs());
            if ng == g {
                stable += 1;
            } else {
                stable = 0;
            }
            g = ng;
            if self.finite_support().is_none() && g > 0 && stable >= WINDOW {
                break;
            }
            k += 1;
        }
        if g == 0 {
            return Err(Error::Degenerate(format!("{} has a single support point", self.spec)));
        }
        Ok(g)
    }

    /// `E e^{itX}`.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        match &*self.law {
            Law::Finite { .. } => self.char_fn_turns(t / (2.0 * PI)),
            Law::Zeta { s, norm, symmetric, .. } => {
                let li = polylog_unit(*s, t) / norm;
                if *symmetric {
                    Complex64::new(li.re, 0.0)
                } else {
                    li
                }
            }
        }
    }

    /// `phi(2 pi x)`, reducing `x v mod 1` before taking the exponential so
    /// large support values keep full accuracy.
    pub fn char_fn_turns(&self, x: f64) -> Complex64 {
        match &*self.law {
            Law::Finite { values, probs, .. } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&v, &p) in values.iter().zip(probs) {
                    let y = (x * v as f64).rem_euclid(1.0);
                    acc += Complex64::from_polar(p, 2.0 * PI * y);
                }
                acc
            }
            Law::Zeta { .. } => {
                let mut y = x.rem_euclid(1.0);
                if y > 0.5 {
                    y -= 1.0;
                }
                self.char_fn(2.0 * PI * y)
            }
        }
    }

    fn tail_table(&self) -> &[f64] {
        let Law::Zeta { s, norm, tail, .. } = &*self.law else {
            panic!("tail table only exists for zeta laws");
        };
        tail.get_or_init(|| {
            let n = ZETA_TABLE_LEN;
            let mut t = vec![0.0; n + 2];
            t[n + 1] = hurwitz_zeta(*s, (n + 1) as f64) / norm;
            for k in (1..=n).rev() {
                t[k] = t[k + 1] + (k as f64).powf(-s) / norm;
            }
            t[0] = 1.0;
            t
        })
    }

    /// Draw one step by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i128 {
        match &*self.law {
            Law::Finite { values, .. } => values[self.sample_index(rng).unwrap()] as i128,
            Law::Zeta { s, norm, symmetric, .. } => {
                let sign = if *symmetric && rng.random::<bool>() { -1 } else { 1 };
                let bits: u64 = rng.random::<u64>() >> 11;
                let v = (bits as f64 + 1.0) * (1.0 / 9_007_199_254_740_992.0);
                sign * self.zeta_inverse(v, *s, *norm) as i128
            }
        }
    }

    /// For finite laws, draw the index into [`Self::finite_support`]; uses
    /// the same random stream as [`Self::sample`].
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        match &*self.law {
            Law::Finite { values, cdf, .. } => {
                let u: f64 = rng.random();
                Some(cdf.partition_point(|&c| c <= u).min(values.len() - 1))
            }
            Law::Zeta { .. } => None,
        }
    }

    /// Largest `n` with `P(|X| >= n) >= v`, for `v` in `(0, 1]`.
    fn zeta_inverse(&self, v: f64, s: f64, norm: f64) -> u128 {
        let tail = self.tail_table();
        let last = tail.len() - 1;
        if v <= tail[last] {
            // beyond the table: bisect on the Hurwitz tail
            let t = |n: u128| hurwitz_zeta(s, n as f64) / norm;
            let mut lo = last as u128;
            let mut hi = lo * 2;
            while t(hi) >= v {
                lo = hi;
                if hi >= 1u128 << 126 {
                    return hi;
                }
                hi *= 2;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if t(mid) >= v {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return lo;
        }
        // tail is decreasing on 1..=last; find the last index with tail >= v
        let idx = tail[1..=last].partition_point(|&x| x >= v);
        idx as u128
    }
}

fn finite_law(mut v: Vec<(i64, f64)>) -> Result<Law> {
    if v.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    v.sort_by_key(|e| e.0);
    for w in v.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidDistribution(format!("repeated support value {}", w[0].0)));
        }
    }
    if let Some(&(x, p)) = v.iter().find(|e| !(e.1 > 0.0 && e.1.is_finite())) {
        return Err(Error::InvalidDistribution(format!("probability of {x} is {p}, must be positive")));
    }
    let total: f64 = v.iter().map(|e| e.1).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    let values: Vec<i64> = v.iter().map(|e| e.0).collect();
    let probs: Vec<f64> = v.iter().map(|e| e.1 / total).collect();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cdf.push(acc);
    }
    *cdf.last_mut().unwrap() = 1.0;
    Ok(Law::Finite { values, probs, cdf })
}

impl FromStr for StepDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StepDistribution::new(s.parse()?)
    }
}

impl fmt::Display for StepDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn d(s: &str) -> StepDistribution {
        s.parse().unwrap()
    }

    #[test]
    fn grammar_round_trips() {
        for s in ["twopoint:1,2,0.5", "pmf:[(-1,0.5),(1,0.5)]", "zeta:0.5", "symzeta:1"] {
            let spec: StepSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("pmf:[(1,0.5),(1,0.5)]".parse::<StepDistribution>().is_err());
        assert!("pmf:[(1,0.5),(2,0.4)]".parse::<StepDistribution>().is_err());
        assert!("zeta:-1".parse::<StepDistribution>().is_err());
        assert!("twopoint:1,2,1".parse::<StepDistribution>().is_err());
    }

    #[test]
    fn char_fn_trivial_values() {
        let x = d("twopoint:1,2,0.5");
        assert!((x.char_fn(0.0) - 1.0).norm() < 1e-15);
        assert!((x.char_fn(2.0 * PI) - 1.0).norm() < 1e-13);
        let pm = d("pmf:[(-1,0.5),(1,0.5)]");
        assert!(pm.char_fn(PI / 2.0).norm() < 1e-15);
    }

    #[test]
    fn zeta_char_fn_at_zero_and_period() {
        let z = d("zeta:0.5");
        assert!((z.char_fn(0.0) - 1.0).norm() < 1e-14);
        for &t in &[0.2, 1.3, 3.0] {
            assert!((z.char_fn(t) - z.char_fn(t + 2.0 * PI)).norm() < 1e-12);
            assert!(z.char_fn(t).norm() <= 1.0 + 1e-13);
        }
    }

    #[test]
    fn gcd_of_differences() {
        assert_eq!(d("twopoint:1,2,0.5").support_gcd_diff().unwrap(), 1);
        assert_eq!(d("pmf:[(-1,0.5),(1,0.5)]").support_gcd_diff().unwrap(), 2);
        assert_eq!(d("zeta:0.5").support_gcd_diff().unwrap(), 1);
        assert_eq!(d("symzeta:0.5").support_gcd_diff().unwrap(), 1);
        assert!(matches!(d("pmf:[(1,1)]").support_gcd_diff(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn moments_and_median() {
        let x = d("pmf:[(1,0.9),(5,0.1)]");
        assert!((x.mean().unwrap() - 1.4).abs() < 1e-15);
        assert_eq!(x.median(), 1);
        assert!(d("zeta:0.5").mean().is_none());
        assert!(d("zeta:1.5").second_moment().is_none());
        assert!((d("zeta:2").mean().unwrap() - zeta(2.0) / zeta(3.0)).abs() < 1e-15);
        assert_eq!(d("zeta:0.5").median(), 2);
    }

    #[test]
    fn degenerate_always_same() {
        let x = d("pmf:[(7,1)]");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| x.sample(&mut rng) == 7));
    }

    #[test]
    fn zeta_sampling_matches_tail() {
        let z = d("zeta:0.5");
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        let hits = (0..n).filter(|_| z.sample(&mut rng) >= 100).count() as f64;
        let p = z.zeta_tail(100.0).unwrap();
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 4.0 * sd);
    }

    #[test]
    fn zeta_inverse_beyond_table() {
        let z = d("zeta:0.5");
        let v = z.zeta_tail(1e9).unwrap();
        let n = z.zeta_inverse(v, 1.5, zeta(1.5));
        assert!(z.zeta_tail(n as f64).unwrap() >= v);
        assert!(z.zeta_tail(n as f64 + 1.0).unwrap() < v);
    }

    proptest! {
        #[test]
        fn char_fn_is_periodic(x in -3.0f64..3.0) {
            for s in ["twopoint:1,2,0.5", "pmf:[(-3,0.2),(4,0.5),(9,0.3)]", "symzeta:0.5"] {
                let dist = d(s);
                let a = dist.char_fn(2.0 * PI * x);
                let b = dist.char_fn(2.0 * PI * (x + 1.0));
                prop_assert!((a - b).norm() <= 1e-12);
            }
        }
    }
}
