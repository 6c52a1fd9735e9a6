//! Seeded simulation of `S_k` and the fractional parts `{S_k h alpha}`.
//!
//! The position `S_k alpha mod 1` is carried as a [`Circle256`] and updated
//! by adding `X_k A`, where `A` is the 256-bit projection of `alpha`. The
//! update is exact modulo 1, so the only error in `{S_k alpha}` is
//! `|S_k| |alpha - A|`, which stays below 2^-180 for any walk that fits in
//! memory. Harmonic `h` is read off the stored top 128 bits by an integer
//! multiplication, adding at most `h 2^-128`, and the final conversion to
//! f64 truncates by at most 2^-53.

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::alpha::{Alpha, Projection};
use crate::circle::{frac_from_u128, Circle256};
use crate::dist::StepDistribution;
use crate::error::{Error, Result};
use crate::rng::{par_replicas, replica_rng, ReplicaRng};

/// Checkpoints at which point sets are reported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointSchedule {
    /// `1, 2, 4, ...` up to `n_max`, plus `n_max` itself.
    Dyadic,
    Explicit(Vec<u64>),
}

impl CheckpointSchedule {
    pub fn resolve(&self, n_max: u64) -> Result<Vec<u64>> {
        let mut v = match self {
            CheckpointSchedule::Dyadic => {
                let mut v: Vec<u64> = (0..64).map(|j| 1u64 << j).take_while(|&n| n <= n_max).collect();
                v.push(n_max);
                v
            }
            CheckpointSchedule::Explicit(list) => list.clone(),
        };
        v.sort_unstable();
        v.dedup();
        if v.first() == Some(&0) || v.last().is_some_and(|&n| n > n_max) || v.is_empty() {
            return Err(Error::Config(format!("checkpoints must lie in 1..={n_max}")));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug)]
pub struct WalkConfig {
    pub dist: StepDistribution,
    pub alpha: Alpha,
    pub n_max: u64,
    pub harmonics: Vec<u64>,
    pub checkpoints: CheckpointSchedule,
    pub seed: u64,
    /// Required bound on the per-point error of every emitted fractional part.
    pub eta: f64,
    /// Build the projection of `alpha` from a deeper convergent than needed.
    pub projection_margin_bits: u32,
}

impl WalkConfig {
    pub fn new(dist: StepDistribution, alpha: Alpha, n_max: u64) -> Self {
        WalkConfig {
            dist,
            alpha,
            n_max,
            harmonics: vec![1],
            checkpoints: CheckpointSchedule::Dyadic,
            seed: 0,
            eta: 1e-12,
            projection_margin_bits: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if !(self.eta > 0.0) {
            return Err(Error::Config("eta must be positive".into()));
        }
        if self.harmonics.is_empty() || self.harmonics.contains(&0) {
            return Err(Error::Config("harmonics must be a nonempty list of positive integers".into()));
        }
        self.checkpoints.resolve(self.n_max)?;
        Ok(())
    }

    fn projection(&self) -> Result<Projection> {
        if self.projection_margin_bits == 0 {
            self.alpha.projection()
        } else {
            self.alpha.projection_with_margin(self.projection_margin_bits)
        }
    }
}

/// Exact running sum that spills to a big integer on i128 overflow.
#[derive(Clone, Debug)]
enum Exact {
    Small(i128),
    Big(BigInt),
}

impl Exact {
    fn add(&mut self, x: i128) {
        match self {
            Exact::Small(s) => match s.checked_add(x) {
                Some(v) => *s = v,
                None => *self = Exact::Big(BigInt::from(*s) + x),
            },
            Exact::Big(b) => *b += x,
        }
    }

    fn to_bigint(&self) -> BigInt {
        match self {
            Exact::Small(s) => BigInt::from(*s),
            Exact::Big(b) => b.clone(),
        }
    }

    fn abs_big(&self) -> BigUint {
        match self {
            Exact::Small(s) => BigUint::from(s.unsigned_abs()),
            Exact::Big(b) => b.magnitude().clone(),
        }
    }
}

/// Step-by-step walk on the circle. Each call to [`Walker::step`] draws one
/// increment and returns the top 128 bits of `S_k alpha mod 1`.
pub struct Walker<'a> {
    dist: &'a StepDistribution,
    rng: ReplicaRng,
    a: Circle256,
    pos: Circle256,
    increments: Option<(Vec<i64>, Vec<Circle256>)>,
    s: Exact,
    max_small: u128,
    max_big: Option<BigUint>,
}

impl<'a> Walker<'a> {
    pub fn new(dist: &'a StepDistribution, a: Circle256, rng: ReplicaRng) -> Self {
        let increments = dist.finite_support().map(|vals| {
            let inc = vals.iter().map(|&v| a.mul_i128(v as i128)).collect();
            (vals.to_vec(), inc)
        });
        Walker {
            dist,
            rng,
            a,
            pos: Circle256::ZERO,
            increments,
            s: Exact::Small(0),
            max_small: 0,
            max_big: None,
        }
    }

    #[inline]
    pub fn step(&mut self) -> u128 {
        let x = match &self.increments {
            Some((vals, inc)) => {
                let i = self.dist.sample_index(&mut self.rng).unwrap();
                self.pos = self.pos.wrapping_add(inc[i]);
                vals[i] as i128
            }
            None => {
                let x = self.dist.sample(&mut self.rng);
                self.pos = self.pos.wrapping_add(self.a.mul_i128(x));
                x
            }
        };
        self.s.add(x);
        match &self.s {
            Exact::Small(s) => {
                let m = s.unsigned_abs();
                if m > self.max_small {
                    self.max_small = m;
                }
            }
            Exact::Big(b) => {
                let m = b.magnitude();
                if self.max_big.as_ref().is_none_or(|cur| m > cur) {
                    self.max_big = Some(m.clone());
                }
            }
        }
        self.pos.top128()
    }

    pub fn position(&self) -> Circle256 {
        self.pos
    }

    pub fn s(&self) -> BigInt {
        self.s.to_bigint()
    }

    pub fn abs_s(&self) -> BigUint {
        self.s.abs_big()
    }

    /// `|S_k|` rounded to f64.
    pub fn abs_s_f64(&self) -> f64 {
        match &self.s {
            Exact::Small(s) => s.unsigned_abs() as f64,
            Exact::Big(b) => b.magnitude().to_f64().unwrap_or(f64::INFINITY),
        }
    }

    /// `max_{j <= k} |S_j|` so far.
    pub fn max_abs_s(&self) -> BigUint {
        match &self.max_big {
            Some(b) => b.clone().max(BigUint::from(self.max_small)),
            None => BigUint::from(self.max_small),
        }
    }
}

/// Certificate attached to a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceCertificate {
    /// Index `n` of the convergent `p_n / q_n` behind the projection.
    pub convergent_index: usize,
    /// `q_n` in decimal.
    pub q_n: String,
    /// Bound on `|alpha - A|` for the 256-bit projection `A`.
    pub eps_bound: f64,
    pub eta: f64,
    /// `max_k |S_k|` in decimal.
    pub max_abs_s: String,
    /// Worst per-point error over the traced harmonics.
    pub max_point_error: f64,
}

/// Fractional parts of one replica's walk.
#[derive(Clone, Debug)]
pub struct FracPartTrace {
    pub replica: u64,
    pub harmonics: Vec<u64>,
    pub checkpoints: Vec<u64>,
    /// Top 128 bits of `{S_k alpha}` for `k = 1..=n_max`.
    base: Vec<u128>,
    /// Exact `S_N` at each checkpoint.
    pub s_at_checkpoints: Vec<BigInt>,
    pub max_abs_s: BigUint,
    pub projection: Projection,
    pub eta: f64,
    q_n: BigUint,
}

impl FracPartTrace {
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn raw(&self) -> &[u128] {
        &self.base
    }

    pub fn check_harmonic(&self, h: u64) -> Result<()> {
        if self.harmonics.contains(&h) {
            Ok(())
        } else {
            Err(Error::MissingHarmonic(h))
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > self.base.len() {
            return Err(Error::Precondition(format!("requested {n} points, trace has {}", self.base.len())));
        }
        Ok(())
    }

    /// `{S_{k+1} h alpha}` for zero-based `k`.
    pub fn fracpart(&self, h: u64, k: usize) -> Result<f64> {
        self.check_harmonic(h)?;
        self.check_len(k + 1)?;
        Ok(frac_from_u128(self.base[k].wrapping_mul(h as u128)))
    }

    /// The first `n` points of harmonic `h` in walk order.
    pub fn points(&self, h: u64, n: usize) -> Result<Vec<f64>> {
        self.check_harmonic(h)?;
        self.check_len(n)?;
        Ok(self.base[..n].iter().map(|&b| frac_from_u128(b.wrapping_mul(h as u128))).collect())
    }

    /// The first `n` points of harmonic `h`, sorted ascending.
    pub fn sorted_points(&self, h: u64, n: usize) -> Result<Vec<f64>> {
        self.check_harmonic(h)?;
        self.check_len(n)?;
        Ok(sorted_fracs(&self.base[..n], h))
    }

    /// Certified bound on `|emitted - {S_k h alpha}|` (real line, see the
    /// module docs) for any point of harmonic `h`.
    pub fn error_bound(&self, h: u64) -> f64 {
        point_error(&self.max_abs_s, h, self.projection.delta)
    }

    pub fn certificate(&self) -> TraceCertificate {
        let max_h = self.harmonics.iter().copied().max().unwrap_or(1);
        TraceCertificate {
            convergent_index: self.projection.index,
            q_n: self.q_n.to_string(),
            eps_bound: self.projection.delta,
            eta: self.eta,
            max_abs_s: self.max_abs_s.to_string(),
            max_point_error: self.error_bound(max_h),
        }
    }
}

/// Sort 128-bit fractions scaled by `h` and convert them to f64; truncation
/// is monotone so sorting before conversion gives sorted output.
pub fn sorted_fracs(base: &[u128], h: u64) -> Vec<f64> {
    let mut v: Vec<u128> = base.iter().map(|&b| b.wrapping_mul(h as u128)).collect();
    v.sort_unstable();
    v.into_iter().map(frac_from_u128).collect()
}

/// `|S| h delta + h 2^-128 + 2^-53`, rounded up.
pub fn point_error(max_abs_s: &BigUint, h: u64, delta: f64) -> f64 {
    let s = max_abs_s.to_f64().unwrap_or(f64::INFINITY);
    let hf = h as f64;
    (s * hf * delta + hf * 2f64.powi(-128) + 2f64.powi(-53)) * (1.0 + 1e-12)
}

/// Simulate replica 0 of `config`.
pub fn simulate(config: &WalkConfig) -> Result<FracPartTrace> {
    simulate_replica(config, 0)
}

/// Simulate one replica; the stream depends only on `(config.seed, replica)`.
pub fn simulate_replica(config: &WalkConfig, replica: u64) -> Result<FracPartTrace> {
    config.validate()?;
    let proj = config.projection()?;
    let checkpoints = config.checkpoints.resolve(config.n_max)?;
    let n_max = usize::try_from(config.n_max).map_err(|_| Error::Guardrail("n_max too large".into()))?;
    let mut walker = Walker::new(&config.dist, proj.value, replica_rng(config.seed, replica));
    let mut base = Vec::with_capacity(n_max);
    let mut s_at = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0;
    for k in 1..=config.n_max {
        base.push(walker.step());
        if checkpoints[next_cp] == k {
            s_at.push(walker.s());
            next_cp = (next_cp + 1).min(checkpoints.len() - 1);
        }
    }
    let max_abs_s = walker.max_abs_s();
    let max_h = *config.harmonics.iter().max().unwrap();
    let err = point_error(&max_abs_s, max_h, proj.delta);
    if err > config.eta {
        return Err(Error::Precision(format!(
            "per-point error {err:e} exceeds eta {:e} (max |S_k| = {max_abs_s})",
            config.eta
        )));
    }
    let mut harmonics = config.harmonics.clone();
    harmonics.sort_unstable();
    harmonics.dedup();
    Ok(FracPartTrace {
        replica,
        harmonics,
        checkpoints,
        base,
        s_at_checkpoints: s_at,
        max_abs_s,
        projection: proj,
        eta: config.eta,
        q_n: config.alpha.q(proj.index)?,
    })
}

/// Simulate replicas `0..replicas` on `workers` threads, in replica order.
pub fn simulate_replicas(config: &WalkConfig, replicas: u64, workers: usize) -> Result<Vec<FracPartTrace>> {
    par_replicas(workers, replicas, |r| simulate_replica(config, r))
}

/// Distance between two circle points.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dist: &str, alpha: &str, n: u64) -> WalkConfig {
        WalkConfig::new(dist.parse().unwrap(), Alpha::new(alpha.parse().unwrap()).unwrap(), n)
    }

    #[test]
    fn degenerate_walk_is_weyl_sequence() {
        let c = cfg("pmf:[(1,1)]", "golden", 100);
        let t = simulate(&c).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for k in 0..100 {
            let want = ((k + 1) as f64 * phi).rem_euclid(1.0);
            assert!(circle_dist(t.fracpart(1, k).unwrap(), want) < 1e-12);
        }
        assert_eq!(t.s_at_checkpoints.last().unwrap(), &BigInt::from(100));
        assert_eq!(t.checkpoints, vec![1, 2, 4, 8, 16, 32, 64, 100]);
    }

    #[test]
    fn missing_harmonic() {
        let t = simulate(&cfg("twopoint:1,2,0.5", "golden", 10)).unwrap();
        assert!(matches!(t.points(3, 5), Err(Error::MissingHarmonic(3))));
    }

    #[test]
    fn heavy_tail_certificate() {
        let mut c = cfg("symzeta:0.5", "golden", 1 << 10);
        c.harmonics = vec![1, 2, 7];
        let t = simulate(&c).unwrap();
        assert!(t.error_bound(7) <= c.eta);
        c.projection_margin_bits = 64;
        let t2 = simulate(&c).unwrap();
        for h in [1, 2, 7] {
            for (a, b) in t.points(h, 1 << 10).unwrap().iter().zip(t2.points(h, 1 << 10).unwrap()) {
                assert!(circle_dist(*a, b) <= 2.0 * c.eta);
            }
        }
    }

    #[test]
    fn replicas_independent_of_workers() {
        let c = cfg("twopoint:1,2,0.5", "golden", 500);
        let a = simulate_replicas(&c, 4, 1).unwrap();
        let b = simulate_replicas(&c, 4, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.raw(), y.raw());
        }
        assert_ne!(a[0].raw(), a[1].raw());
    }
}
