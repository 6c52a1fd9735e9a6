//! Exponential sums `T_h(N) = sum_{k<=N} e^{2 pi i S_k h alpha}` and the
//! even moments `E |sum_{k=m+1}^{m+n} e^{2 pi i S_k h alpha}|^{2p}`.
//!
//! Exact values come from the ordered-partition expansion (any law with a
//! computable characteristic function) or from enumerating every path of a
//! finite-support walk. Monte Carlo values reuse the fixed-point walk.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::alpha::Alpha;
use crate::circle::frac_from_u128;
use crate::dist::StepDistribution;
use crate::error::{Error, Result};
use crate::rng::{par_replicas, replica_rng};
use crate::walk::{FracPartTrace, Walker};

/// Largest `p` accepted by [`moment_via_partitions`].
pub const PARTITION_MAX_P: u32 = 3;
/// Largest `n` accepted by [`moment_via_partitions`].
pub const PARTITION_MAX_N: u64 = 12;
/// Largest number of paths enumerated by [`moment_via_paths`].
pub const PATHS_MAX: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PathEnumeration,
    PartitionFormula,
    ClosedFormP1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    MomI,
    MomII,
}

/// One moment value, empirical or exact, optionally paired with a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub m: u64,
    pub n: u64,
    pub p: u32,
    pub h: u64,
    pub empirical: Option<f64>,
    pub stderr: Option<f64>,
    pub replicas: Option<u64>,
    pub exact: Option<f64>,
    pub provenance: Option<Provenance>,
    pub bound: Option<f64>,
    pub bound_kind: Option<BoundKind>,
}

impl MomentRecord {
    fn blank(m: u64, n: u64, p: u32, h: u64) -> Self {
        MomentRecord {
            m,
            n,
            p,
            h,
            empirical: None,
            stderr: None,
            replicas: None,
            exact: None,
            provenance: None,
            bound: None,
            bound_kind: None,
        }
    }
}

#[inline]
fn unit(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// `T_h(N)` from a trace. Each term is off by at most `2 pi eta`, so the
/// sum is within `2 pi N eta` of the exact value.
pub fn exp_sum(trace: &FracPartTrace, h: u64, n: usize) -> Result<Complex64> {
    trace.check_harmonic(h)?;
    if n > trace.len() {
        return Err(Error::Precondition(format!("N = {n} exceeds trace length {}", trace.len())));
    }
    Ok(trace.raw()[..n]
        .iter()
        .map(|&b| unit(frac_from_u128(b.wrapping_mul(h as u128))))
        .sum())
}

/// `n + 2 Re sum_{d=1}^{n-1} (n - d) z^d`, the second moment with
/// `z = phi(2 pi h alpha)`.
pub fn closed_form_second_moment(z: Complex64, n: u64) -> f64 {
    let nf = n as f64;
    let one = Complex64::new(1.0, 0.0);
    let g = if (one - z).norm() >= 1e-2 {
        let zn = z.powu(n as u32);
        z * (nf * (one - z) - (one - zn)) / ((one - z) * (one - z))
    } else {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zd = one;
        for d in 1..n {
            zd *= z;
            acc += zd * (nf - d as f64);
        }
        acc
    };
    nf + 2.0 * g.re
}

/// All ordered partitions of `{0, ..., k-1}`, each as a list of blocks.
pub fn ordered_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for s in 1..=k {
        // every surjection [k] -> [s] labels one ordered partition
        let total = s.pow(k as u32);
        for code in 0..total {
            let mut labels = Vec::with_capacity(k);
            let mut c = code;
            for _ in 0..k {
                labels.push(c % s);
                c /= s;
            }
            let mut blocks = vec![Vec::new(); s];
            for (i, &l) in labels.iter().enumerate() {
                blocks[l].push(i);
            }
            if blocks.iter().all(|b| !b.is_empty()) {
                out.push(blocks);
            }
        }
    }
    out
}

/// `phi(2 pi c h alpha)` for `c` in `-p..=p`, indexed by `c + p`.
fn phi_table(dist: &StepDistribution, alpha: &Alpha, h: u64, p: i64) -> Result<Vec<Complex64>> {
    (-p..=p)
        .map(|c| Ok(dist.char_fn_turns(alpha.frac_mul(c as i128 * h as i128)?)))
        .collect()
}

/// Exact `E|sum_{k=m+1}^{m+n} e^{2 pi i S_k h alpha}|^{2p}` by expanding the
/// power over ordered partitions `P = (P_1, ..., P_s)` of `[2p]`:
/// with `eps_j = sum_{i in P_j} (-1)^{i+1}` and suffix sums
/// `c_j = eps_j + ... + eps_s`,
/// `S(P) = sum_{m+1 <= l_1 < ... < l_s <= m+n} prod_j phi(2 pi c_j h alpha)^{l_j - l_{j-1}}`
/// (`l_0 = 0`), evaluated by dynamic programming over `l`.
pub fn moment_via_partitions(
    dist: &StepDistribution,
    alpha: &Alpha,
    h: u64,
    m: u64,
    n: u64,
    p: u32,
) -> Result<f64> {
    if p == 0 || p > PARTITION_MAX_P || n == 0 || n > PARTITION_MAX_N {
        return Err(Error::Guardrail(format!(
            "partition expansion needs 1 <= p <= {PARTITION_MAX_P} and 1 <= n <= {PARTITION_MAX_N}"
        )));
    }
    let table = phi_table(dist, alpha, h, p as i64)?;
    let phi = |c: i64| table[(c + p as i64) as usize];
    let mut total = Complex64::new(0.0, 0.0);
    let len = (m + n) as usize;
    for blocks in ordered_partitions(2 * p as usize) {
        let eps: Vec<i64> = blocks
            .iter()
            .map(|b| b.iter().map(|&i| if i % 2 == 0 { 1 } else { -1 }).sum())
            .collect();
        let s = eps.len();
        let mut c = vec![0i64; s];
        let mut acc = 0;
        for j in (0..s).rev() {
            acc += eps[j];
            c[j] = acc;
        }
        if s as u64 > n {
            continue;
        }
        // dp[l] for l in 0..=len: sum over chains ending exactly at l
        let w0 = phi(c[0]);
        let mut dp = vec![Complex64::new(0.0, 0.0); len + 1];
        let mut pw = Complex64::new(1.0, 0.0);
        for (l, slot) in dp.iter_mut().enumerate().skip(1) {
            pw *= w0;
            if l as u64 > m {
                *slot = pw;
            }
        }
        for &cj in &c[1..] {
            let w = phi(cj);
            let mut next = vec![Complex64::new(0.0, 0.0); len + 1];
            for l in 1..=len {
                next[l] = w * (next[l - 1] + dp[l - 1]);
            }
            for slot in next.iter_mut().take(m as usize + 1) {
                *slot = Complex64::new(0.0, 0.0);
            }
            dp = next;
        }
        total += dp.iter().sum::<Complex64>();
    }
    if total.im.abs() > 1e-10 * total.re.abs().max(1.0) {
        return Err(Error::Precision(format!("imaginary residue {} in even moment", total.im)));
    }
    Ok(total.re)
}

/// Exact moment by enumerating every path of a finite-support walk of
/// length `m + n`.
pub fn moment_via_paths(
    dist: &StepDistribution,
    alpha: &Alpha,
    h: u64,
    m: u64,
    n: u64,
    p: u32,
) -> Result<f64> {
    let values = dist
        .finite_support()
        .ok_or_else(|| Error::Unsupported("path enumeration needs finite support".into()))?;
    let len = m + n;
    let paths = (values.len() as f64).powf(len as f64);
    if paths > PATHS_MAX as f64 {
        return Err(Error::Guardrail(format!("{paths} paths exceed the limit {PATHS_MAX}")));
    }
    let a = alpha.projection()?.value.mul_u128(h as u128);
    let steps: Vec<(f64, crate::circle::Circle256)> =
        values.iter().map(|&v| (dist.pmf(v), a.mul_i128(v as i128))).collect();

    fn rec(
        steps: &[(f64, crate::circle::Circle256)],
        k: u64,
        m: u64,
        len: u64,
        p: u32,
        prob: f64,
        pos: crate::circle::Circle256,
        sum: Complex64,
    ) -> f64 {
        if k == len {
            return prob * sum.norm_sqr().powi(p as i32);
        }
        let mut acc = 0.0;
        for &(w, inc) in steps {
            let np = pos.wrapping_add(inc);
            let ns = if k + 1 > m { sum + unit(np.to_f64()) } else { sum };
            acc += rec(steps, k + 1, m, len, p, prob * w, np, ns);
        }
        acc
    }
    Ok(rec(&steps, 0, m, len, p, 1.0, crate::circle::Circle256::ZERO, Complex64::new(0.0, 0.0)))
}

/// Monte Carlo moments for every combination of `ns`, `hs` and `ps`,
/// sharing one walk per replica. Records come out ordered by `(n, h, p)`.
#[allow(clippy::too_many_arguments)]
pub fn mc_moment_sweep(
    dist: &StepDistribution,
    alpha: &Alpha,
    hs: &[u64],
    m: u64,
    ns: &[u64],
    ps: &[u32],
    replicas: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<MomentRecord>> {
    if replicas < 100 {
        return Err(Error::Precondition("at least 100 replicas are required".into()));
    }
    if hs.is_empty() || ns.is_empty() || ps.is_empty() || hs.contains(&0) || ns.contains(&0) || ps.contains(&0) {
        return Err(Error::Precondition("h, n and p lists must be nonempty and positive".into()));
    }
    let mut ns_sorted = ns.to_vec();
    ns_sorted.sort_unstable();
    ns_sorted.dedup();
    let n_max = *ns_sorted.last().unwrap();
    let proj = alpha.projection()?;
    let n_cells = ns_sorted.len() * hs.len() * ps.len();

    let per_replica = par_replicas(workers, replicas, |r| {
        let mut walker = Walker::new(dist, proj.value, replica_rng(seed, r));
        let mut sums = vec![Complex64::new(0.0, 0.0); hs.len()];
        let mut out = Vec::with_capacity(n_cells);
        let mut next = 0;
        for k in 1..=m + n_max {
            let b = walker.step();
            if k <= m {
                continue;
            }
            for (s, &h) in sums.iter_mut().zip(hs) {
                *s += unit(frac_from_u128(b.wrapping_mul(h as u128)));
            }
            if k - m == ns_sorted[next] {
                for s in &sums {
                    let sq = s.norm_sqr();
                    for &p in ps {
                        out.push(sq.powi(p as i32));
                    }
                }
                next += 1;
                if next == ns_sorted.len() {
                    break;
                }
            }
        }
        Ok(out)
    })?;

    let r = replicas as f64;
    let mut records = Vec::with_capacity(n_cells);
    let mut idx = 0;
    for &n in &ns_sorted {
        for &h in hs {
            for &p in ps {
                let mut sum = 0.0;
                let mut sum2 = 0.0;
                for v in &per_replica {
                    sum += v[idx];
                    sum2 += v[idx] * v[idx];
                }
                let mean = sum / r;
                let var = ((sum2 / r - mean * mean) * r / (r - 1.0)).max(0.0);
                let mut rec = MomentRecord::blank(m, n, p, h);
                rec.empirical = Some(mean);
                rec.stderr = Some((var / r).sqrt());
                rec.replicas = Some(replicas);
                records.push(rec);
                idx += 1;
            }
        }
    }
    Ok(records)
}

/// Monte Carlo estimate of a single moment.
#[allow(clippy::too_many_arguments)]
pub fn mc_moment(
    dist: &StepDistribution,
    alpha: &Alpha,
    h: u64,
    m: u64,
    n: u64,
    p: u32,
    replicas: u64,
    seed: u64,
) -> Result<MomentRecord> {
    Ok(mc_moment_sweep(dist, alpha, &[h], m, &[n], &[p], replicas, seed, 1)?.remove(0))
}

fn check_bound_args(n: u64, p: u32, c: f64, dalpha: f64) -> Result<()> {
    if n == 0 || p == 0 || !(c > 0.0) {
        return Err(Error::Precondition("n, p and c must be positive".into()));
    }
    if dalpha == 0.0 {
        return Err(Error::Domain("||d alpha|| = 0, i.e. d alpha is an integer".into()));
    }
    if !(dalpha > 0.0 && dalpha <= 0.5) {
        return Err(Error::Precondition(format!("||d alpha|| = {dalpha} not in (0, 1/2]")));
    }
    Ok(())
}

fn ln_factorial(r: u32) -> f64 {
    ln_gamma(r as f64 + 1.0)
}

/// `ln` of `(8p)^{2p} max_{1<=r<=p} n^r / (r! (c ||d alpha||^beta)^{2p-r})`.
pub fn ln_bound_mom_i(n: u64, p: u32, c: f64, dalpha: f64, beta: f64) -> Result<f64> {
    check_bound_args(n, p, c, dalpha)?;
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Precondition(format!("beta = {beta} not in (0, 2]")));
    }
    let pf = p as f64;
    let ln_base = c.ln() + beta * dalpha.ln();
    let best = (1..=p)
        .map(|r| r as f64 * (n as f64).ln() - ln_factorial(r) - (2.0 * pf - r as f64) * ln_base)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(2.0 * pf * (8.0 * pf).ln() + best)
}

pub fn bound_mom_i(n: u64, p: u32, c: f64, dalpha: f64, beta: f64) -> Result<f64> {
    Ok(ln_bound_mom_i(n, p, c, dalpha, beta)?.exp())
}

/// `ln` of `(4p)^{2p} sum_{r=0}^{p} n^r / (r! (c ||d alpha||)^{2p-r})`.
pub fn ln_bound_mom_ii(n: u64, p: u32, c: f64, dalpha: f64) -> Result<f64> {
    check_bound_args(n, p, c, dalpha)?;
    let pf = p as f64;
    let ln_base = c.ln() + dalpha.ln();
    let terms: Vec<f64> = (0..=p)
        .map(|r| r as f64 * (n as f64).ln() - ln_factorial(r) - (2.0 * pf - r as f64) * ln_base)
        .collect();
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln();
    Ok(2.0 * pf * (4.0 * pf).ln() + lse)
}

pub fn bound_mom_ii(n: u64, p: u32, c: f64, dalpha: f64) -> Result<f64> {
    Ok(ln_bound_mom_ii(n, p, c, dalpha)?.exp())
}

/// Largest `s` accepted by the `f_{m,n,s}` routines.
pub const FMNS_MAX_S: usize = 8;
/// Largest `n` accepted by the `f_{m,n,s}` routines.
pub const FMNS_MAX_N: u64 = 64;

fn check_fmns(x: &[Complex64], m: u64, n: u64) -> Result<()> {
    if x.is_empty() || x.len() > FMNS_MAX_S || n == 0 || n > FMNS_MAX_N {
        return Err(Error::Guardrail(format!(
            "f_mns needs 1 <= s <= {FMNS_MAX_S} and 1 <= n <= {FMNS_MAX_N}"
        )));
    }
    if m > u32::MAX as u64 - n {
        return Err(Error::Guardrail("m too large".into()));
    }
    Ok(())
}

/// `f_{m,n,s}(x) = sum_{m+1 <= l_1 < ... < l_s <= m+n} x_1^{l_1} ... x_s^{l_s}`.
pub fn f_mns_eval(x: &[Complex64], m: u64, n: u64) -> Result<Complex64> {
    check_fmns(x, m, n)?;
    let n = n as usize;
    // dp[i] = sum over chains ending at l = m + 1 + i
    let mut dp: Vec<Complex64> = (0..n).map(|i| x[0].powu((m as usize + 1 + i) as u32)).collect();
    for xj in &x[1..] {
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        let mut prefix = Complex64::new(0.0, 0.0);
        let mut pw = xj.powu(m as u32 + 1);
        for i in 0..n {
            next[i] = pw * prefix;
            prefix += dp[i];
            pw *= xj;
        }
        dp = next;
    }
    Ok(dp.iter().sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FmnsBound {
    pub s: usize,
    pub delta: f64,
    pub m: u64,
    pub n: u64,
    pub q: usize,
    pub k: f64,
    pub bound: f64,
}

/// Bound `K^{m+n+1} (2/delta)^s sum_{r=0}^{q} (delta n)^r / r!`.
///
/// `q` is the maximum number of disjoint runs `I` of consecutive indices
/// with `|1 - prod_{j in I} x_j| < delta` (earliest-endpoint greedy), and
/// `K` the largest suffix product `|x_a ... x_s|`, at least 1.
pub fn f_mns_bound(x: &[Complex64], delta: f64, m: u64, n: u64) -> Result<FmnsBound> {
    check_fmns(x, m, n)?;
    if !(delta > 0.0) {
        return Err(Error::Precondition("delta must be positive".into()));
    }
    let s = x.len();
    // intervals [a, b], 0-based inclusive, qualifying under delta
    let mut intervals = Vec::new();
    for a in 0..s {
        let mut prod = Complex64::new(1.0, 0.0);
        for (b, xb) in x.iter().enumerate().skip(a) {
            prod *= xb;
            if (Complex64::new(1.0, 0.0) - prod).norm() < delta {
                intervals.push((a, b));
            }
        }
    }
    intervals.sort_by_key(|&(a, b)| (b, a));
    let mut q = 0;
    let mut free_from = 0;
    for (a, b) in intervals {
        if a >= free_from {
            q += 1;
            free_from = b + 1;
        }
    }
    let mut k = 1f64;
    let mut suffix = 1f64;
    for xj in x.iter().rev() {
        suffix *= xj.norm();
        k = k.max(suffix);
    }
    let mut series = 0.0;
    let mut term = 1.0;
    for r in 0..=q {
        if r > 0 {
            term *= delta * n as f64 / r as f64;
        }
        series += term;
    }
    let bound = k.powf((m + n + 1) as f64) * (2.0 / delta).powi(s as i32) * series;
    Ok(FmnsBound { s, delta, m, n, q, k, bound })
}

/// `(6/N) (N/H + sum_{h=1}^{H} |T_h(N)| / h)`.
pub fn erdos_turan_bound(trace: &FracPartTrace, n: usize, big_h: u64) -> Result<f64> {
    if n == 0 || big_h == 0 {
        return Err(Error::Precondition("N and H must be positive".into()));
    }
    let mut acc = 0.0;
    for h in 1..=big_h {
        acc += exp_sum(trace, h, n)?.norm() / h as f64;
    }
    Ok(6.0 / n as f64 * (n as f64 / big_h as f64 + acc))
}

/// Harmonics are re-anchored with an exact evaluation this often.
const ANCHOR_EVERY: u64 = 32;

/// `|T_h(N)|` for `h = 1..=big_h` from 128-bit base points, using the power
/// recurrence `e(hx) = e((h-1)x) e(x)` re-anchored every 32 harmonics.
pub fn exp_sum_magnitudes(base: &[u128], big_h: u64) -> Vec<f64> {
    let mut sums = vec![Complex64::new(0.0, 0.0); big_h as usize];
    for &b in base {
        let z1 = unit(frac_from_u128(b));
        let mut z = Complex64::new(1.0, 0.0);
        for h in 1..=big_h {
            z = if h % ANCHOR_EVERY == 1 && h > 1 {
                unit(frac_from_u128(b.wrapping_mul(h as u128)))
            } else {
                z * z1
            };
            sums[(h - 1) as usize] += z;
        }
    }
    sums.iter().map(|s| s.norm()).collect()
}

/// `|T_h(N)|` at every `N` in `checkpoints` (increasing, at most
/// `base.len()`) for `h = 1..=harmonics(N)`, in one pass over the points.
/// `harmonics` must be nondecreasing in `N`.
pub fn exp_sum_magnitudes_at(base: &[u128], checkpoints: &[u64], harmonics: impl Fn(u64) -> u64) -> Vec<Vec<f64>> {
    let Some(&last) = checkpoints.last() else {
        return Vec::new();
    };
    let h_max = harmonics(last) as usize;
    let mut sums = vec![Complex64::new(0.0, 0.0); h_max];
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for (k, &b) in base[..last as usize].iter().enumerate() {
        let z1 = unit(frac_from_u128(b));
        let mut z = Complex64::new(1.0, 0.0);
        for (i, s) in sums.iter_mut().enumerate() {
            let h = i as u64 + 1;
            z = if h % ANCHOR_EVERY == 1 && h > 1 {
                unit(frac_from_u128(b.wrapping_mul(h as u128)))
            } else {
                z * z1
            };
            *s += z;
        }
        while next < checkpoints.len() && checkpoints[next] == k as u64 + 1 {
            let hn = harmonics(checkpoints[next]) as usize;
            out.push(sums[..hn].iter().map(|s| s.norm()).collect());
            next += 1;
        }
    }
    out
}

/// Erdős–Turán bound with constant 6 from precomputed `|T_h(N)|`.
pub fn erdos_turan_from_magnitudes(n: usize, magnitudes: &[f64]) -> f64 {
    let big_h = magnitudes.len();
    let acc: f64 = magnitudes.iter().enumerate().map(|(i, t)| t / (i + 1) as f64).sum();
    6.0 / n as f64 * (n as f64 / big_h as f64 + acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{simulate, WalkConfig};
    use proptest::prelude::*;

    fn alpha(s: &str) -> Alpha {
        Alpha::new(s.parse().unwrap()).unwrap()
    }

    fn dist(s: &str) -> StepDistribution {
        s.parse().unwrap()
    }

    #[test]
    fn fubini_counts() {
        assert_eq!(ordered_partitions(2).len(), 3);
        assert_eq!(ordered_partitions(4).len(), 75);
        assert_eq!(ordered_partitions(6).len(), 4683);
    }

    #[test]
    fn closed_form_trivial_cases() {
        assert_eq!(closed_form_second_moment(Complex64::new(0.0, 0.0), 7), 7.0);
        assert!((closed_form_second_moment(Complex64::new(1.0, 0.0), 7) - 49.0).abs() < 1e-12);
        let z = Complex64::new(0.3, -0.4);
        assert!((closed_form_second_moment(z, 2) - (2.0 + 2.0 * z.re)).abs() < 1e-14);
        let z = Complex64::new(0.999, 0.001);
        let direct = 9.0 + 2.0 * (1..9).map(|d| (9 - d) as f64 * z.powu(d).re).sum::<f64>();
        assert!((closed_form_second_moment(z, 9) - direct).abs() < 1e-10);
    }

    #[test]
    fn partitions_match_paths_and_closed_form() {
        let a = alpha("golden");
        let d = dist("twopoint:1,2,0.5");
        let z = d.char_fn_turns(a.frac_mul(1).unwrap());
        let closed = closed_form_second_moment(z, 5);
        let part1 = moment_via_partitions(&d, &a, 1, 0, 5, 1).unwrap();
        assert!((closed - part1).abs() <= 1e-10 * closed);
        let part2 = moment_via_partitions(&d, &a, 1, 0, 5, 2).unwrap();
        let paths2 = moment_via_paths(&d, &a, 1, 0, 5, 2).unwrap();
        assert!((part2 - paths2).abs() <= 1e-10 * paths2);
        let part_m = moment_via_partitions(&d, &a, 2, 3, 4, 2).unwrap();
        let paths_m = moment_via_paths(&d, &a, 2, 3, 4, 2).unwrap();
        assert!((part_m - paths_m).abs() <= 1e-10 * paths_m);
    }

    #[test]
    fn zero_walk_moment() {
        let a = alpha("sqrt2");
        let d = dist("pmf:[(0,1)]");
        for p in 1..=3 {
            let v = moment_via_partitions(&d, &a, 1, 0, 6, p).unwrap();
            assert!((v - 6f64.powi(2 * p as i32)).abs() < 1e-8);
        }
        assert!(moment_via_partitions(&d, &a, 1, 0, 13, 1).is_err());
        assert!(moment_via_partitions(&d, &a, 1, 0, 5, 4).is_err());
    }

    #[test]
    fn single_term_moment_is_one() {
        let r = mc_moment(&dist("symzeta:0.5"), &alpha("golden"), 3, 0, 1, 2, 100, 9).unwrap();
        assert!((r.empirical.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_basic() {
        assert!((bound_mom_i(1, 1, 1.0, 0.5, 1.0).unwrap() - 128.0).abs() < 1e-9);
        assert!((bound_mom_i(1, 1, 2.0, 0.5, 1.0).unwrap() - 64.0).abs() < 1e-9);
        assert!(matches!(bound_mom_i(1, 1, 1.0, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bound_mom_ii(1, 1, 1.0, 0.0), Err(Error::Domain(_))));
        // p = 1, c ||d alpha|| = 1: 16 (1 + n)
        assert!((bound_mom_ii(3, 1, 2.0, 0.5).unwrap() - 16.0 * 4.0).abs() < 1e-9);
        let mut prev = 0.0;
        for n in [1, 2, 10, 100, 1000] {
            let b = bound_mom_i(n, 2, 0.3, 0.2, 1.5).unwrap();
            assert!(b >= prev);
            prev = b;
        }
        assert!(ln_bound_mom_ii(1 << 20, 40, 0.01, 1e-6).unwrap().is_finite());
    }

    #[test]
    fn fmns_examples() {
        let x = [Complex64::new(1.0, 0.0); 3];
        assert!((f_mns_eval(&x, 0, 10).unwrap().re - 120.0).abs() < 1e-9);
        let b = f_mns_bound(&x, 0.5, 0, 10).unwrap();
        assert_eq!(b.q, 3);
        assert!(b.bound >= 120.0);
        let z = [Complex64::new(0.5, 0.1), Complex64::new(0.0, 0.0)];
        assert_eq!(f_mns_eval(&z, 2, 7).unwrap(), Complex64::new(0.0, 0.0));
        let g = [Complex64::from_polar(0.9, 1.0)];
        let direct: Complex64 = (4..=11).map(|l| g[0].powu(l)).sum();
        assert!((f_mns_eval(&g, 3, 8).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn et_with_h_one_at_least_six() {
        let c = WalkConfig::new(dist("twopoint:1,2,0.5"), alpha("golden"), 64);
        let t = simulate(&c).unwrap();
        assert!(erdos_turan_bound(&t, 64, 1).unwrap() >= 6.0);
        assert!(matches!(erdos_turan_bound(&t, 64, 2), Err(Error::MissingHarmonic(2))));
        let m = exp_sum_magnitudes(&t.raw()[..64], 1);
        assert!((erdos_turan_from_magnitudes(64, &m) - erdos_turan_bound(&t, 64, 1).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn recurrence_matches_direct_harmonics() {
        let mut c = WalkConfig::new(dist("twopoint:1,2,0.5"), alpha("golden"), 300);
        c.harmonics = (1..=100).collect();
        let t = simulate(&c).unwrap();
        let mags = exp_sum_magnitudes(t.raw(), 100);
        for h in [1u64, 2, 31, 32, 33, 64, 65, 100] {
            let direct = exp_sum(&t, h, 300).unwrap().norm();
            assert!((mags[h as usize - 1] - direct).abs() < 1e-9, "h={h}");
        }
    }

    #[test]
    fn streaming_magnitudes_match_batch() {
        let c = WalkConfig::new(dist("twopoint:1,2,0.5"), alpha("golden"), 200);
        let t = simulate(&c).unwrap();
        let cps = [1u64, 50, 64, 200];
        let h_of = |n: u64| (n as f64).sqrt().ceil() as u64;
        let got = exp_sum_magnitudes_at(t.raw(), &cps, h_of);
        for (i, &n) in cps.iter().enumerate() {
            let want = exp_sum_magnitudes(&t.raw()[..n as usize], h_of(n));
            assert_eq!(got[i].len(), want.len());
            for (a, b) in got[i].iter().zip(&want) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn fmns_bound_holds(
            raw in prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), 1..=8),
            delta in 0.01f64..1.0,
            m in 0u64..20,
            n in 1u64..=64,
        ) {
            let x: Vec<Complex64> = raw.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
            let f = f_mns_eval(&x, m, n).unwrap();
            let b = f_mns_bound(&x, delta, m, n).unwrap();
            prop_assert!(b.q <= x.len());
            prop_assert!(b.k >= 1.0);
            prop_assert!(f.norm() <= b.bound * (1.0 + 1e-12));
        }
    }
}
