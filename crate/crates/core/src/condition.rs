//! Numeric certification of the non-flatness conditions on `phi`:
//!
//! * first condition: `1 - |phi(2 pi x)| >= c ||d x||^beta`
//! * second condition: `|phi(2 pi x) - phi(2 pi y)| >= c ||d (x - y)||`
//!
//! A grid minimum of the defining ratio is refined locally. Points within a
//! guard band around the zero set of `||d .||` are excluded because the ratio
//! is 0/0 there.

use serde::{Deserialize, Serialize};

use crate::dist::StepDistribution;
use crate::error::{Error, Result};

/// Ratios at or below this value do not certify the condition.
pub const CERT_FLOOR: f64 = 1e-9;

/// Default bound on `d` in the second-condition search.
pub const DEFAULT_D_MAX: u64 = 8;

/// Default grid for the second condition (divisible by 1..=8 except 7).
pub const DEFAULT_SECOND_GRID: usize = 840;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Failed,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConditionKind {
    First { beta: f64 },
    Second,
}

/// Outcome for a single `d` in the second-condition search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DCandidate {
    pub d: u64,
    pub c: f64,
    pub argmin: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCertificate {
    pub kind: ConditionKind,
    pub d: u64,
    /// Refined minimum of the defining ratio.
    pub c: f64,
    pub grid_n: usize,
    /// `[x]` for the first condition, `[x, y]` for the second.
    pub argmin: Vec<f64>,
    pub verdict: Verdict,
    /// Every `d` tried (second condition only).
    pub candidates: Vec<DCandidate>,
}

impl ConditionCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Golden-section minimization of `f` on `[a, b]` down to width `tol`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn circle_norm(t: f64) -> f64 {
    let r = t.rem_euclid(1.0);
    r.min(1.0 - r)
}

/// Certify `1 - |phi(2 pi x)| >= c ||d x||^beta` with `d` the gcd of support
/// differences.
///
/// `|phi(2 pi x)|` has period `1/d` and is even, so with `u = d x` the ratio
/// is scanned on `u in [guard, 1/2]`, where the guard band has width
/// `1/(4 grid_n)` in `x`.
pub fn verify_first_condition(dist: &StepDistribution, beta: f64, grid_n: usize) -> Result<ConditionCertificate> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Precondition(format!("beta must lie in (0, 2], got {beta}")));
    }
    if grid_n < 4 {
        return Err(Error::Precondition("grid_n must be at least 4".into()));
    }
    let d = dist.support_gcd_diff()?;
    let df = d as f64;
    let ratio = |u: f64| (1.0 - dist.char_fn_turns(u / df).norm()) / circle_norm(u).powf(beta);
    let guard = df / (4.0 * grid_n as f64);
    let step = 1.0 / grid_n as f64;

    let mut best = (f64::NAN, f64::INFINITY);
    let mut i = 1;
    loop {
        let u = (i as f64 * step).min(0.5);
        if u >= guard {
            let r = ratio(u);
            if r < best.1 {
                best = (u, r);
            }
        }
        if u >= 0.5 {
            break;
        }
        i += 1;
    }
    // the band [guard, first grid point) is covered by the refinement below
    let lo_edge = guard;
    let r_edge = ratio(lo_edge);
    if r_edge < best.1 {
        best = (lo_edge, r_edge);
    }
    let (a, b) = ((best.0 - step).max(guard), (best.0 + step).min(0.5));
    let refined = golden_min(ratio, a, b, 1e-12);
    if refined.1 < best.1 {
        best = refined;
    }
    let (u_min, c) = best;

    let at_edge = u_min - guard < 2.0 * step;
    let decreasing_inward = at_edge && {
        let probes: Vec<f64> = (1..=4).map(|j| ratio(guard / 2f64.powi(j))).collect();
        probes[0] < r_edge && probes.windows(2).all(|w| w[1] < w[0])
    };
    let verdict = if decreasing_inward {
        Verdict::Inconclusive
    } else if c > CERT_FLOOR {
        Verdict::Certified
    } else {
        Verdict::Failed
    };
    Ok(ConditionCertificate {
        kind: ConditionKind::First { beta },
        d,
        c,
        grid_n,
        argmin: vec![u_min / df],
        verdict,
        candidates: Vec::new(),
    })
}

/// Certify `|phi(2 pi x) - phi(2 pi y)| >= c ||d (x - y)||` with `d` searched
/// among multiples of the support gcd up to [`DEFAULT_D_MAX`].
pub fn verify_second_condition(dist: &StepDistribution, grid_n: usize) -> Result<ConditionCertificate> {
    verify_second_condition_with(dist, grid_n, DEFAULT_D_MAX)
}

pub fn verify_second_condition_with(
    dist: &StepDistribution,
    grid_n: usize,
    d_max: u64,
) -> Result<ConditionCertificate> {
    if dist.abs_mean().is_none() {
        return Err(Error::Unsupported(format!("{} has infinite first absolute moment", dist.spec())));
    }
    dist.support_gcd_diff()?;
    if grid_n < 8 {
        return Err(Error::Precondition("grid_n must be at least 8".into()));
    }
    let g = dist.support_gcd().max(1);
    let n = grid_n;
    let phi: Vec<_> = (0..n).map(|i| dist.char_fn_turns(i as f64 / n as f64)).collect();
    let guard = 1.0 / (4.0 * n as f64);

    let mut candidates = Vec::new();
    let mut d = g;
    while d <= d_max {
        candidates.push(second_for_d(dist, &phi, d, guard));
        d += g;
    }
    if candidates.is_empty() {
        return Err(Error::Precondition(format!("no multiple of the support gcd {g} is <= {d_max}")));
    }
    let best_cert = candidates
        .iter()
        .filter(|c| c.verdict == Verdict::Certified)
        .max_by(|a, b| a.c.total_cmp(&b.c));
    let chosen = match best_cert {
        Some(c) => c.clone(),
        None => {
            let mut c = candidates.iter().max_by(|a, b| a.c.total_cmp(&b.c)).unwrap().clone();
            if candidates.iter().any(|c| c.verdict == Verdict::Inconclusive) {
                c.verdict = Verdict::Inconclusive;
            }
            c
        }
    };
    Ok(ConditionCertificate {
        kind: ConditionKind::Second,
        d: chosen.d,
        c: chosen.c,
        grid_n,
        argmin: chosen.argmin.clone(),
        verdict: chosen.verdict,
        candidates,
    })
}

fn second_for_d(dist: &StepDistribution, phi: &[num_complex::Complex64], d: u64, guard: f64) -> DCandidate {
    let n = phi.len();
    let df = d as f64;
    let zero_dist = |delta: f64| circle_norm(delta * df) / df;
    let ratio = |x: f64, delta: f64| {
        let num = (dist.char_fn_turns(x) - dist.char_fn_turns(x - delta)).norm();
        num / circle_norm(df * delta)
    };

    // grid pass: x = i/n, delta = j/n, 1 <= j <= n/2 (the ratio is symmetric
    // under swapping x and y)
    let mut seeds: Vec<(f64, usize, usize)> = Vec::new();
    for j in 1..=n / 2 {
        let delta = j as f64 / n as f64;
        if zero_dist(delta) < guard {
            continue;
        }
        let den = circle_norm(df * delta);
        for i in 0..n {
            let k = (i + n - j) % n;
            let r = (phi[i] - phi[k]).norm() / den;
            seeds.push((r, i, j));
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(8);

    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &(r0, i, j) in &seeds {
        let (mut x, mut delta, mut r) = (i as f64 / n as f64, j as f64 / n as f64, r0);
        let mut step = 1.0 / n as f64;
        while step > 1e-12 {
            let mut moved = false;
            for (dx, dd) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
                let nx = x + dx * step;
                let nd = delta + dd * step;
                if zero_dist(nd) < guard {
                    continue;
                }
                let nr = ratio(nx, nd);
                if nr < r {
                    x = nx;
                    delta = nd;
                    r = nr;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step /= 2.0;
            }
        }
        if r < best.0 {
            best = (r, x, delta);
        }
    }
    let (c, x, delta) = best;

    // a minimum sitting on the guard band whose ratio keeps shrinking toward
    // the zero set cannot be certified by any grid
    let gap = zero_dist(delta);
    let on_edge = gap < guard * 1.5;
    let inconclusive = on_edge && {
        let k = (delta * df).round() / df;
        let side = (delta - k).signum();
        let probes: Vec<f64> = (1..=4).map(|j| ratio(x, k + side * guard / 2f64.powi(j))).collect();
        probes[0] < c && probes.windows(2).all(|w| w[1] < w[0])
    };
    let verdict = if inconclusive {
        Verdict::Inconclusive
    } else if c > CERT_FLOOR {
        Verdict::Certified
    } else {
        Verdict::Failed
    };
    DCandidate {
        d,
        c,
        argmin: vec![x.rem_euclid(1.0), (x - delta).rem_euclid(1.0)],
        verdict,
    }
}
