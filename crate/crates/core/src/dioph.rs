//! Diophantine sums `sum_{h=1}^{H} 1 / (h ||h alpha||^b)` for `0 < b <= 1`:
//! certified evaluation, the block decomposition over `[q_k, q_{k+1})`, and
//! growth-regime fits.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::alpha::{Alpha, Projection};
use crate::bigutil::{ln_biguint, NeumaierSum};
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, LinearFit};
use crate::rng::par_replicas;

/// Terms per work unit; partial sums are reduced in chunk order.
const CHUNK: u64 = 1 << 16;
/// Largest `H` (or total block length) evaluated term by term.
pub const DIOPH_MAX_TERMS: u64 = 1 << 26;
/// Smallest dyadic level used by [`growth_fit`].
pub const GROWTH_MIN_LEVEL: u32 = 6;
/// Slack added to `1/b` when deciding the growth regime from `gamma_hat`.
pub const REGIME_SLACK: f64 = 0.1;

const UNIT: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophSumValue {
    pub h: u64,
    pub b: f64,
    pub value: f64,
    /// Certified relative error of `value`.
    pub rel_err: f64,
}

fn check_b(b: f64) -> Result<()> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::Precondition(format!("b = {b} not in (0, 1]")));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta >= 1e-14) {
        return Err(Error::Precondition(format!("eta = {eta} below 1e-14")));
    }
    Ok(())
}

/// `||h alpha||` with a relative error bound, from the projection when it is
/// precise enough and from exact convergent arithmetic otherwise.
fn dist_certified(alpha: &Alpha, proj: &Projection, h: u64, rel: f64) -> Result<(f64, f64)> {
    let d = proj.value.mul_u128(h as u128).dist_to_int();
    let abs_err = h as f64 * proj.delta;
    if d > 0.0 {
        let r = abs_err / d + 2.0 * UNIT;
        if r <= rel {
            return Ok((d, r));
        }
    }
    let d = alpha.dist_nearest_int_rel(&BigUint::from(h), rel / 2.0)?;
    Ok((d, rel / 2.0 + 2.0 * UNIT))
}

/// `1 / (h ||h alpha||^b)` and its relative error.
fn term(alpha: &Alpha, proj: &Projection, h: u64, b: f64, eta: f64) -> Result<(f64, f64)> {
    let (d, r) = dist_certified(alpha, proj, h, eta / (2.0 * b))?;
    Ok((1.0 / (h as f64 * d.powf(b)), b * r + 4.0 * UNIT))
}

#[derive(Clone, Copy, Default)]
struct Partial {
    sum: f64,
    weighted_rel: f64,
}

/// Sum over `h in lo..=hi`, recording the running total at each `marks`
/// value inside the range.
fn chunk_sum(
    alpha: &Alpha,
    proj: &Projection,
    lo: u64,
    hi: u64,
    b: f64,
    eta: f64,
    marks: &[u64],
) -> Result<(Partial, Vec<Partial>)> {
    let mut acc = NeumaierSum::new();
    let mut wrel = 0.0;
    let mut at_marks = Vec::new();
    let mut mi = marks.partition_point(|&m| m < lo);
    for h in lo..=hi {
        let (t, r) = term(alpha, proj, h, b, eta)?;
        acc.add(t);
        wrel += t * r;
        while mi < marks.len() && marks[mi] == h {
            at_marks.push(Partial { sum: acc.value(), weighted_rel: wrel });
            mi += 1;
        }
    }
    Ok((Partial { sum: acc.value(), weighted_rel: wrel }, at_marks))
}

/// The sum at each `H` in `hs` (strictly increasing), evaluated in one pass.
pub fn dioph_sum_prefix(alpha: &Alpha, hs: &[u64], b: f64, eta: f64, workers: usize) -> Result<Vec<DiophSumValue>> {
    check_b(b)?;
    check_eta(eta)?;
    if hs.is_empty() || hs[0] == 0 {
        return Err(Error::Precondition("H must be at least 1".into()));
    }
    if hs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("H values must be strictly increasing".into()));
    }
    let h_max = *hs.last().unwrap();
    if h_max > DIOPH_MAX_TERMS {
        return Err(Error::Guardrail(format!("H = {h_max} exceeds {DIOPH_MAX_TERMS}")));
    }
    let proj = alpha.projection()?;
    let n_chunks = h_max.div_ceil(CHUNK);
    let chunks = par_replicas(workers, n_chunks, |c| {
        let lo = c * CHUNK + 1;
        let hi = ((c + 1) * CHUNK).min(h_max);
        chunk_sum(alpha, &proj, lo, hi, b, eta, hs)
    })?;
    let mut out = Vec::with_capacity(hs.len());
    let mut before = NeumaierSum::new();
    let mut wrel_before = 0.0;
    let mut hi_iter = hs.iter();
    for (total, marks) in &chunks {
        for m in marks {
            let h = *hi_iter.next().expect("mark count matches H list");
            let mut s = before;
            s.add(m.sum);
            let value = s.value();
            let rel_err = (wrel_before + m.weighted_rel) / value + 2.0 * UNIT;
            out.push(DiophSumValue { h, b, value, rel_err });
        }
        before.add(total.sum);
        wrel_before += total.weighted_rel;
    }
    Ok(out)
}

/// `sum_{h=1}^{H} 1 / (h ||h alpha||^b)` with relative error at most `eta`.
pub fn dioph_sum(alpha: &Alpha, big_h: u64, b: f64, eta: f64) -> Result<DiophSumValue> {
    if big_h == 0 {
        return Err(Error::Precondition("empty sum: H must be at least 1".into()));
    }
    Ok(dioph_sum_prefix(alpha, &[big_h], b, eta, 1)?.remove(0))
}

/// One block `q_k <= h < q_{k+1}` split into the classes
/// `A: h p_k = 0`, `B: h p_k = (-1)^k` and `C` (all mod `q_k`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub k: usize,
    pub q_k: u64,
    pub q_next: u64,
    pub a_k: u64,
    pub count_a: u64,
    pub count_b: u64,
    pub count_c: u64,
    pub sum_a: f64,
    pub sum_b: f64,
    pub sum_c: f64,
    pub total: f64,
    pub rel_err: f64,
    pub members_a: Vec<u64>,
    pub members_b: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub b: f64,
    /// `s = 1` for `b < 1`, `s = 2` for `b = 1`.
    pub s: u32,
    /// Index `n` of the last denominator; blocks run over `3 <= k <= n - 1`.
    pub n: usize,
    pub q_n: u64,
    /// Sum over `0 < h < q_3`.
    pub head: f64,
    pub head_rel_err: f64,
    pub blocks: Vec<BlockRecord>,
    /// `ln^s q_n`.
    pub log_term: f64,
    /// `sum_{0<k<n} 1 / (q_k ||q_k alpha||^b)`.
    pub convergent_term: f64,
}

impl BlockDecomposition {
    /// Head plus all block totals, i.e. the sum over `0 < h < q_n`.
    pub fn total(&self) -> f64 {
        let mut s = NeumaierSum::new();
        s.add(self.head);
        for b in &self.blocks {
            s.add(b.total);
        }
        s.value()
    }
}

fn log_exponent(b: f64) -> u32 {
    if b == 1.0 {
        2
    } else {
        1
    }
}

fn q_u64(alpha: &Alpha, n: usize) -> Result<u64> {
    alpha
        .q(n)?
        .to_u64()
        .ok_or_else(|| Error::Guardrail(format!("q_{n} does not fit in 64 bits")))
}

/// Decompose `sum_{0<h<q_n}` with `n = n_blocks + 3` into the head
/// `h < q_3` and the blocks `[q_k, q_{k+1})`, `3 <= k < n`.
pub fn dioph_sum_blocks(alpha: &Alpha, n_blocks: usize, b: f64, eta: f64) -> Result<BlockDecomposition> {
    check_b(b)?;
    check_eta(eta)?;
    if n_blocks < 3 {
        return Err(Error::Precondition("at least 3 blocks are required".into()));
    }
    let n = n_blocks + 3;
    let q_n = q_u64(alpha, n)?;
    if q_n > DIOPH_MAX_TERMS {
        return Err(Error::Guardrail(format!("q_{n} = {q_n} exceeds {DIOPH_MAX_TERMS}")));
    }
    let proj = alpha.projection()?;
    let q3 = q_u64(alpha, 3)?;
    let (head, head_rel_err) = if q3 > 1 {
        let v = dioph_sum(alpha, q3 - 1, b, eta)?;
        (v.value, v.rel_err)
    } else {
        (0.0, 0.0)
    };

    let mut blocks = Vec::with_capacity(n_blocks);
    for k in 3..n {
        let q_k = q_u64(alpha, k)?;
        let q_next = q_u64(alpha, k + 1)?;
        let a_k = alpha.partial_quotient(k)?.to_u64().unwrap_or(u64::MAX);
        let p_mod = crate::bigutil::rem_euclid(&alpha.p(k)?, &BigUint::from(q_k))
            .to_u64()
            .expect("residue below q_k");
        let target_b = if k % 2 == 0 { 1 % q_k } else { q_k - 1 };
        let mut sums = [NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new()];
        let mut counts = [0u64; 3];
        let mut wrel = 0.0;
        let mut members_a = Vec::new();
        let mut members_b = Vec::new();
        for h in q_k..q_next {
            let r = ((h as u128 * p_mod as u128) % q_k as u128) as u64;
            let class = if r == 0 {
                members_a.push(h);
                0
            } else if r == target_b {
                members_b.push(h);
                1
            } else {
                2
            };
            let (t, rel) = term(alpha, &proj, h, b, eta)?;
            sums[class].add(t);
            counts[class] += 1;
            wrel += t * rel;
        }
        let [sa, sb, sc] = sums.map(|s| s.value());
        let mut tot = NeumaierSum::new();
        tot.add(sa);
        tot.add(sb);
        tot.add(sc);
        let total = tot.value();
        blocks.push(BlockRecord {
            k,
            q_k,
            q_next,
            a_k,
            count_a: counts[0],
            count_b: counts[1],
            count_c: counts[2],
            sum_a: sa,
            sum_b: sb,
            sum_c: sc,
            total,
            rel_err: wrel / total + 4.0 * UNIT,
            members_a,
            members_b,
        });
    }

    let s = log_exponent(b);
    let log_term = (q_n as f64).ln().powi(s as i32);
    let mut conv = NeumaierSum::new();
    for k in 1..n {
        let qk = alpha.q(k)?;
        let e = alpha.eps(k)?.abs();
        conv.add((-(ln_biguint(&qk) + b * e.ln())).exp());
    }
    Ok(BlockDecomposition {
        b,
        s,
        n,
        q_n,
        head,
        head_rel_err,
        blocks,
        log_term,
        convergent_term: conv.value(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthRegime {
    /// `sum ~ c log^s H`.
    Logarithmic,
    /// `sum ~ H^{b gamma - 1}`.
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub b: f64,
    pub s: u32,
    pub gamma_hat: f64,
    pub regime: GrowthRegime,
    pub levels: Vec<DiophSumValue>,
    /// `sum / ln^s H` at each level.
    pub log_ratios: Vec<f64>,
    /// Max over min of `log_ratios` on the top four levels.
    pub top4_ratio_spread: f64,
    /// Fit of `ln sum` against `ln H` over the levels.
    pub power_fit: LinearFit,
    /// `b gamma_hat - 1`, the exponent predicted in the power regime.
    pub predicted_exponent: f64,
}

impl GrowthFit {
    /// The headline number: the ratio spread in the logarithmic regime,
    /// the fitted exponent in the power regime.
    pub fn descriptor(&self) -> f64 {
        match self.regime {
            GrowthRegime::Logarithmic => self.top4_ratio_spread,
            GrowthRegime::Power => self.power_fit.slope,
        }
    }
}

/// Convergent depth at which `ln q_n` first exceeds `64 ln H`, within 6..=40.
fn profile_depth(alpha: &Alpha, h_max: u64) -> Result<usize> {
    let limit = 64.0 * (h_max as f64).ln();
    let mut n = 6;
    while n < 40 && ln_biguint(&alpha.q(n)?) < limit {
        n += 1;
    }
    Ok(n)
}

/// Evaluate the sum at `H = 2^j` for `j in levels` and classify its growth
/// by the estimated strong type of `alpha`.
pub fn growth_fit(
    alpha: &Alpha,
    b: f64,
    levels: std::ops::RangeInclusive<u32>,
    eta: f64,
    workers: usize,
) -> Result<GrowthFit> {
    check_b(b)?;
    let lo = (*levels.start()).max(GROWTH_MIN_LEVEL);
    let hi = *levels.end();
    if hi < lo || hi - lo + 1 < 6 {
        return Err(Error::Insufficient(format!(
            "need at least 6 dyadic levels from 2^{GROWTH_MIN_LEVEL}, got 2^{lo}..=2^{hi}"
        )));
    }
    let hs: Vec<u64> = (lo..=hi).map(|j| 1u64 << j).collect();
    let values = dioph_sum_prefix(alpha, &hs, b, eta, workers)?;
    let gamma_hat = alpha.estimate_strong_type(profile_depth(alpha, *hs.last().unwrap())?)?.gamma_hat;
    let s = log_exponent(b);
    let log_ratios: Vec<f64> = values.iter().map(|v| v.value / (v.h as f64).ln().powi(s as i32)).collect();
    let top = &log_ratios[log_ratios.len() - 4..];
    let mx = top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mn = top.iter().copied().fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = values.iter().map(|v| v.h as f64).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.value).collect();
    let power_fit = fit_power_law(&xs, &ys)?;
    let regime = if gamma_hat <= 1.0 / b + REGIME_SLACK {
        GrowthRegime::Logarithmic
    } else {
        GrowthRegime::Power
    };
    Ok(GrowthFit {
        b,
        s,
        gamma_hat,
        regime,
        levels: values,
        log_ratios,
        top4_ratio_spread: mx / mn,
        power_fit,
        predicted_exponent: b * gamma_hat - 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(s: &str) -> Alpha {
        Alpha::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn golden_first_term() {
        let v = dioph_sum(&alpha("golden"), 1, 1.0, 1e-12).unwrap();
        assert!((v.value - 2.618_033_988_749_895).abs() < 1e-12);
        assert!(v.rel_err <= 1e-12);
        assert!(dioph_sum(&alpha("golden"), 0, 1.0, 1e-12).is_err());
        assert!(dioph_sum(&alpha("golden"), 5, 1.5, 1e-12).is_err());
    }

    #[test]
    fn prefix_matches_single_and_workers() {
        let a = alpha("sqrt2");
        let hs = [3, 100, 65_536, 65_537, 200_000];
        let one = dioph_sum_prefix(&a, &hs, 0.5, 1e-12, 1).unwrap();
        let three = dioph_sum_prefix(&a, &hs, 0.5, 1e-12, 3).unwrap();
        assert_eq!(one, three);
        for v in &one {
            let single = dioph_sum(&a, v.h, 0.5, 1e-12).unwrap();
            assert!((single.value - v.value).abs() <= 1e-13 * v.value);
        }
        assert!(one.windows(2).all(|w| w[0].value < w[1].value));
    }

    #[test]
    fn tiny_distances_use_exact_fallback() {
        // q_5 = 83523 for power-rule(4), so ||q_5 alpha|| is about 2e-15
        let a = alpha("power:4");
        let q5 = a.q(5).unwrap().to_u64().unwrap();
        let v = dioph_sum(&a, q5, 1.0, 1e-12).unwrap();
        assert!(v.rel_err <= 1e-12);
        let d = a.dist_nearest_int_rel(&BigUint::from(q5), 1e-14).unwrap();
        assert!(v.value > 1.0 / (q5 as f64 * d));
    }

    #[test]
    fn blocks_partition_and_classes() {
        let a = alpha("golden");
        let dec = dioph_sum_blocks(&a, 12, 1.0, 1e-12).unwrap();
        for blk in &dec.blocks {
            assert_eq!(blk.count_a + blk.count_b + blk.count_c, blk.q_next - blk.q_k);
            assert!(blk.members_a.iter().all(|h| h % blk.q_k == 0));
            let q_prev = a.q(blk.k - 1).unwrap().to_u64().unwrap();
            assert!(blk.members_b.iter().all(|h| h % blk.q_k == q_prev % blk.q_k));
            assert_eq!(blk.count_a, blk.a_k);
        }
        let direct = dioph_sum(&a, dec.q_n - 1, 1.0, 1e-12).unwrap();
        assert!((dec.total() - direct.value).abs() <= 1e-11 * direct.value);
    }

    #[test]
    fn growth_needs_six_levels() {
        assert!(matches!(growth_fit(&alpha("golden"), 0.5, 6..=10, 1e-10, 1), Err(Error::Insufficient(_))));
        assert!(matches!(growth_fit(&alpha("golden"), 0.5, 0..=8, 1e-10, 1), Err(Error::Insufficient(_))));
    }
}
