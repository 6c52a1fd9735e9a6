//! Configuration-driven experiment runners and their reports.
//!
//! All parallelism is over replicas; results are collected in replica order,
//! so every data file is identical for any worker count.

pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::condition::{verify_first_condition, verify_second_condition_with, ConditionCertificate};
use crate::dioph::{dioph_sum_blocks, growth_fit, BlockDecomposition, GrowthFit, GrowthRegime};
use crate::discrepancy::{discrepancy_sorted, gap_diagnostic, DiscrepancyValue};
use crate::error::{Error, Result};
use crate::fit::{fit_loglog_corrected, fit_power_law, LinearFit};
use crate::moments::{
    bound_mom_i, bound_mom_ii, erdos_turan_from_magnitudes, exp_sum_magnitudes_at, mc_moment_sweep,
    moment_via_partitions, BoundKind, MomentRecord, Provenance, PARTITION_MAX_N, PARTITION_MAX_P,
};
use crate::rng::{par_replicas, replica_rng};
use crate::walk::{simulate_replicas, TraceCertificate, WalkConfig, Walker};

pub use config::{ConditionChoice, ExperimentConfig, ExperimentKind};
pub use report::{all_passed, fmt_f64, Check, DataFile, SCHEMA_LINE};

/// Harmonics used by the Erdős–Turán bound at `N`: `ceil(N^e)`, exact for
/// `e = 1/2`.
pub fn et_harmonics(n: u64, exponent: f64) -> u64 {
    if exponent == 0.5 {
        let r = n.isqrt();
        if r * r < n {
            r + 1
        } else {
            r
        }
    } else {
        ((n as f64).powf(exponent).ceil() as u64).max(1)
    }
}

/// Linear-interpolation quantile of a sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn walk_config(cfg: &ExperimentConfig, harmonics: Vec<u64>) -> Result<WalkConfig> {
    let mut wc = WalkConfig::new(cfg.make_dist()?, cfg.make_alpha()?, cfg.n_max);
    wc.harmonics = harmonics;
    wc.checkpoints = cfg.schedule();
    wc.seed = cfg.seed;
    wc.eta = cfg.eta;
    Ok(wc)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplicaCurve {
    pub replica: u64,
    pub values: Vec<DiscrepancyValue>,
    /// Erdős–Turán bound at each checkpoint, when requested.
    pub et_bounds: Option<Vec<f64>>,
    pub certificate: TraceCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: u64,
    pub median_extreme: f64,
    pub q1_extreme: f64,
    pub q3_extreme: f64,
    pub median_star: f64,
    pub q1_star: f64,
    pub q3_star: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyCurve {
    pub alpha: String,
    pub dist: String,
    pub checkpoints: Vec<u64>,
    pub replicas: Vec<ReplicaCurve>,
    pub summary: Vec<CurvePoint>,
    pub fit_min_n: u64,
    /// Fit of `ln median D_N` against `ln N` over `N >= fit_min_n`.
    pub fit: LinearFit,
    /// `-slope` of `fit`.
    pub tau_hat: f64,
    pub loglog_fit: Option<LinearFit>,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub et_h_exponent: f64,
}

impl DiscrepancyCurve {
    /// Checkpoints (over all replicas) where `D_N` exceeds the Erdős–Turán
    /// bound; `None` if the bound was not evaluated.
    pub fn et_violations(&self) -> Option<usize> {
        let mut count = 0;
        for r in &self.replicas {
            let et = r.et_bounds.as_ref()?;
            count += r.values.iter().zip(et).filter(|(v, b)| v.extreme > **b).count();
        }
        Some(count)
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let in_range = self
            .replicas
            .iter()
            .flat_map(|r| &r.values)
            .all(|v| v.extreme > 0.0 && v.extreme <= 1.0 && v.star > 0.0 && v.star <= 1.0);
        out.push(Check::new("discrepancy-range", in_range, "all D_N, D*_N in (0, 1]"));
        if self.tau_min.is_some() || self.tau_max.is_some() {
            let lo = self.tau_min.unwrap_or(f64::NEG_INFINITY);
            let hi = self.tau_max.unwrap_or(f64::INFINITY);
            out.push(Check::new(
                "tau-window",
                self.tau_hat >= lo && self.tau_hat <= hi,
                format!("tau_hat = {:.4} (+-{:.4}), window [{lo}, {hi}]", self.tau_hat, self.fit.slope_ci),
            ));
        }
        if let Some(v) = self.et_violations() {
            let total = self.replicas.len() * self.checkpoints.len();
            out.push(Check::new("erdos-turan", v == 0, format!("{v} of {total} checkpoints exceed the bound")));
        }
        out
    }

    /// Write `curve.csv` (per replica and checkpoint) and
    /// `curve_summary.csv` (medians and quartiles).
    pub fn write_data(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut cols = vec!["replica", "N", "extreme", "star"];
        let with_et = self.replicas.first().is_some_and(|r| r.et_bounds.is_some());
        if with_et {
            cols.extend(["et_harmonics", "et_bound"]);
        }
        let mut f = DataFile::create(dir, "curve.csv", &cols)?;
        for r in &self.replicas {
            for (i, v) in r.values.iter().enumerate() {
                let n = self.checkpoints[i];
                let mut row = vec![r.replica.to_string(), n.to_string(), fmt_f64(v.extreme), fmt_f64(v.star)];
                if let Some(et) = &r.et_bounds {
                    row.push(et_harmonics(n, self.et_h_exponent).to_string());
                    row.push(fmt_f64(et[i]));
                }
                f.row(row)?;
            }
        }
        let mut files = vec![f.finish()?];
        let mut s = DataFile::create(
            dir,
            "curve_summary.csv",
            &["N", "median_extreme", "q1_extreme", "q3_extreme", "median_star", "q1_star", "q3_star"],
        )?;
        for p in &self.summary {
            s.row([
                p.n.to_string(),
                fmt_f64(p.median_extreme),
                fmt_f64(p.q1_extreme),
                fmt_f64(p.q3_extreme),
                fmt_f64(p.median_star),
                fmt_f64(p.q1_star),
                fmt_f64(p.q3_star),
            ])?;
        }
        files.push(s.finish()?);
        Ok(files)
    }

    fn manifest_results(&self) -> serde_json::Value {
        let certs: Vec<&TraceCertificate> = self.replicas.iter().map(|r| &r.certificate).collect();
        serde_json::json!({
            "alpha": self.alpha,
            "dist": self.dist,
            "tau_hat": self.tau_hat,
            "fit": self.fit,
            "loglog_fit": self.loglog_fit,
            "fit_min_n": self.fit_min_n,
            "et_violations": self.et_violations(),
            "certificates": certs,
        })
    }

    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let mut files = self.write_data(dir)?;
        files.push(report::write_manifest(dir, cfg, &files, &self.checks(), &self.manifest_results())?);
        Ok(files)
    }
}

fn curve_impl(cfg: &ExperimentConfig, workers: usize, with_et: bool) -> Result<DiscrepancyCurve> {
    let wc = walk_config(cfg, vec![1])?;
    let cps = wc.checkpoints.resolve(cfg.n_max)?;
    let h_of = |n: u64| et_harmonics(n, cfg.et_h_exponent);
    let replicas = par_replicas(workers, cfg.replicas, |r| {
        let t = crate::walk::simulate_replica(&wc, r)?;
        let values = cps
            .iter()
            .map(|&n| discrepancy_sorted(&t.sorted_points(1, n as usize)?))
            .collect::<Result<Vec<_>>>()?;
        let et_bounds = with_et.then(|| {
            exp_sum_magnitudes_at(t.raw(), &cps, h_of)
                .iter()
                .zip(&cps)
                .map(|(m, &n)| erdos_turan_from_magnitudes(n as usize, m))
                .collect()
        });
        Ok(ReplicaCurve { replica: r, values, et_bounds, certificate: t.certificate() })
    })?;

    let summary: Vec<CurvePoint> = cps
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut ex: Vec<f64> = replicas.iter().map(|r| r.values[i].extreme).collect();
            let mut st: Vec<f64> = replicas.iter().map(|r| r.values[i].star).collect();
            ex.sort_by(f64::total_cmp);
            st.sort_by(f64::total_cmp);
            CurvePoint {
                n,
                median_extreme: quantile(&ex, 0.5),
                q1_extreme: quantile(&ex, 0.25),
                q3_extreme: quantile(&ex, 0.75),
                median_star: quantile(&st, 0.5),
                q1_star: quantile(&st, 0.25),
                q3_star: quantile(&st, 0.75),
            }
        })
        .collect();
    let used: Vec<&CurvePoint> = summary.iter().filter(|p| p.n >= cfg.fit_min_n).collect();
    let xs: Vec<f64> = used.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.median_extreme).collect();
    let fit = fit_power_law(&xs, &ys)?;
    let loglog_fit = if cfg.fit_min_n >= 16 { Some(fit_loglog_corrected(&xs, &ys)?) } else { None };
    Ok(DiscrepancyCurve {
        alpha: cfg.alpha.clone(),
        dist: cfg.dist.clone(),
        checkpoints: cps,
        replicas,
        summary,
        fit_min_n: cfg.fit_min_n,
        tau_hat: -fit.slope,
        fit,
        loglog_fit,
        tau_min: cfg.tau_min,
        tau_max: cfg.tau_max,
        et_h_exponent: cfg.et_h_exponent,
    })
}

/// Simulate the replicas and compute `D_N`, `D*_N` at every checkpoint,
/// with the Erdős–Turán bound if `et_check` is set.
pub fn run_discrepancy_curve(cfg: &ExperimentConfig, workers: usize) -> Result<DiscrepancyCurve> {
    curve_impl(cfg, workers, cfg.et_check)
}

/// A discrepancy curve that always carries the Erdős–Turán bound.
pub fn run_et_check(cfg: &ExperimentConfig, workers: usize) -> Result<DiscrepancyCurve> {
    curve_impl(cfg, workers, true)
}

#[derive(Clone, Debug, Serialize)]
pub struct FitExponentReport {
    pub curve: DiscrepancyCurve,
}

impl FitExponentReport {
    pub fn checks(&self) -> Vec<Check> {
        self.curve.checks()
    }

    /// Curve files plus `fit.csv` with the regression inputs and residuals.
    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let mut files = self.curve.write_data(dir)?;
        let mut f = DataFile::create(dir, "fit.csv", &["N", "ln_N", "ln_median_extreme", "residual"])?;
        let used = self.curve.summary.iter().filter(|p| p.n >= self.curve.fit_min_n);
        for (p, r) in used.zip(&self.curve.fit.residuals) {
            f.row([
                p.n.to_string(),
                fmt_f64((p.n as f64).ln()),
                fmt_f64(p.median_extreme.ln()),
                fmt_f64(*r),
            ])?;
        }
        files.push(f.finish()?);
        let results = serde_json::json!({
            "slope": self.curve.fit.slope,
            "slope_ci95": self.curve.fit.slope_ci,
            "intercept": self.curve.fit.intercept,
            "rms_residual": self.curve.fit.rms_residual,
            "tau_hat": self.curve.tau_hat,
            "loglog_fit": self.curve.loglog_fit,
        });
        files.push(report::write_manifest(dir, cfg, &files, &self.checks(), &results)?);
        Ok(files)
    }
}

/// Least-squares exponent of the median discrepancy curve.
pub fn run_fit_exponent(cfg: &ExperimentConfig, workers: usize) -> Result<FitExponentReport> {
    Ok(FitExponentReport { curve: run_discrepancy_curve(cfg, workers)? })
}

fn certify(cfg: &ExperimentConfig) -> Result<ConditionCertificate> {
    let dist = cfg.make_dist()?;
    match cfg.condition {
        ConditionChoice::First => verify_first_condition(&dist, cfg.beta, cfg.cond_grid),
        ConditionChoice::Second => verify_second_condition_with(&dist, cfg.cond_grid, cfg.d_max),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentCheckReport {
    pub certificate: ConditionCertificate,
    pub bound_kind: BoundKind,
    pub records: Vec<MomentRecord>,
    pub stderr_slack: f64,
}

impl MomentCheckReport {
    fn violates(&self, r: &MomentRecord) -> bool {
        match (r.empirical, r.stderr, r.bound) {
            (Some(e), Some(se), Some(b)) => e - self.stderr_slack * se > b,
            _ => false,
        }
    }

    /// Records whose Monte Carlo value exceeds the bound by more than
    /// `stderr_slack` standard errors.
    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| self.violates(r)).count()
    }

    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::new(
                "condition-certified",
                self.certificate.is_certified(),
                format!("d = {}, c = {:.6}", self.certificate.d, self.certificate.c),
            ),
            Check::new(
                "moment-bounds",
                self.violations() == 0,
                format!("{} of {} records exceed the bound", self.violations(), self.records.len()),
            ),
        ]
    }

    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let mut f = DataFile::create(
            dir,
            "moments.csv",
            &["m", "n", "p", "h", "empirical", "stderr", "replicas", "exact", "provenance", "bound", "bound_kind", "violation"],
        )?;
        for r in &self.records {
            f.row([
                r.m.to_string(),
                r.n.to_string(),
                r.p.to_string(),
                r.h.to_string(),
                opt(r.empirical),
                opt(r.stderr),
                r.replicas.map(|v| v.to_string()).unwrap_or_default(),
                opt(r.exact),
                r.provenance.map(|p| serde_json::to_value(p).unwrap().as_str().unwrap().to_owned()).unwrap_or_default(),
                opt(r.bound),
                r.bound_kind.map(|b| serde_json::to_value(b).unwrap().as_str().unwrap().to_owned()).unwrap_or_default(),
                self.violates(r).to_string(),
            ])?;
        }
        let mut files = vec![f.finish()?];
        let results = serde_json::json!({
            "certificate": self.certificate,
            "bound_kind": self.bound_kind,
            "violations": self.violations(),
            "stderr_slack": self.stderr_slack,
        });
        files.push(report::write_manifest(dir, cfg, &files, &self.checks(), &results)?);
        Ok(files)
    }
}

/// Monte Carlo moments over the configured `(n, h, p)` grid, each paired
/// with the bound implied by the certified condition, plus exact values
/// where the partition expansion applies.
pub fn run_moment_check(cfg: &ExperimentConfig, workers: usize) -> Result<MomentCheckReport> {
    let dist = cfg.make_dist()?;
    let alpha = cfg.make_alpha()?;
    let certificate = certify(cfg)?;
    let bound_kind = match cfg.condition {
        ConditionChoice::First => BoundKind::MomI,
        ConditionChoice::Second => BoundKind::MomII,
    };
    let mut records = mc_moment_sweep(
        &dist,
        &alpha,
        &cfg.moment_h,
        cfg.moment_m,
        &cfg.moment_n,
        &cfg.moment_p,
        cfg.replicas,
        cfg.seed,
        workers,
    )?;
    let proj = alpha.projection()?;
    for r in &mut records {
        let dh = certificate.d as u128 * r.h as u128;
        let dalpha = proj.value.mul_u128(dh).dist_to_int();
        if certificate.is_certified() {
            let b = match bound_kind {
                BoundKind::MomI => bound_mom_i(r.n, r.p, certificate.c, dalpha, cfg.beta),
                BoundKind::MomII => bound_mom_ii(r.n, r.p, certificate.c, dalpha),
            };
            r.bound = Some(b?);
            r.bound_kind = Some(bound_kind);
        }
        if r.n <= PARTITION_MAX_N && r.p <= PARTITION_MAX_P {
            r.exact = Some(moment_via_partitions(&dist, &alpha, r.h, r.m, r.n, r.p)?);
            r.provenance = Some(Provenance::PartitionFormula);
        }
    }
    Ok(MomentCheckReport { certificate, bound_kind, records, stderr_slack: cfg.stderr_slack })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiophReport {
    pub alpha: String,
    pub growth: GrowthFit,
    pub blocks: Option<BlockDecomposition>,
    pub ratio_max: f64,
    pub exponent_min: Option<f64>,
    pub exponent_max: Option<f64>,
}

impl DiophReport {
    pub fn checks(&self) -> Vec<Check> {
        let g = &self.growth;
        let mut out = Vec::new();
        match g.regime {
            GrowthRegime::Logarithmic => out.push(Check::new(
                "log-ratio-spread",
                g.top4_ratio_spread <= self.ratio_max,
                format!("max/min of sum/ln^{} H over top 4 levels = {:.4}", g.s, g.top4_ratio_spread),
            )),
            GrowthRegime::Power => {
                if self.exponent_min.is_some() || self.exponent_max.is_some() {
                    let lo = self.exponent_min.unwrap_or(f64::NEG_INFINITY);
                    let hi = self.exponent_max.unwrap_or(f64::INFINITY);
                    out.push(Check::new(
                        "growth-exponent",
                        g.power_fit.slope >= lo && g.power_fit.slope <= hi,
                        format!("exponent = {:.4}, window [{lo}, {hi}]", g.power_fit.slope),
                    ));
                }
            }
        }
        let increasing = g.levels.windows(2).all(|w| w[0].value < w[1].value);
        out.push(Check::new("sums-increasing", increasing, "sums strictly increase in H"));
        out
    }

    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let s = self.growth.s as i32;
        let mut f = DataFile::create(dir, "dioph_sums.csv", &["H", "sum", "certified_rel_err", "sum_over_log_s"])?;
        for v in &self.growth.levels {
            f.row([
                v.h.to_string(),
                fmt_f64(v.value),
                fmt_f64(v.rel_err),
                fmt_f64(v.value / (v.h as f64).ln().powi(s)),
            ])?;
        }
        let mut files = vec![f.finish()?];
        if let Some(dec) = &self.blocks {
            let mut f = DataFile::create(
                dir,
                "dioph_blocks.csv",
                &["k", "q_k", "q_next", "a_k", "count_A", "count_B", "count_C", "A_sum", "B_sum", "C_sum", "total", "certified_rel_err"],
            )?;
            for b in &dec.blocks {
                f.row([
                    b.k.to_string(),
                    b.q_k.to_string(),
                    b.q_next.to_string(),
                    b.a_k.to_string(),
                    b.count_a.to_string(),
                    b.count_b.to_string(),
                    b.count_c.to_string(),
                    fmt_f64(b.sum_a),
                    fmt_f64(b.sum_b),
                    fmt_f64(b.sum_c),
                    fmt_f64(b.total),
                    fmt_f64(b.rel_err),
                ])?;
            }
            files.push(f.finish()?);
        }
        let results = serde_json::json!({
            "alpha": self.alpha,
            "b": self.growth.b,
            "s": self.growth.s,
            "gamma_hat": self.growth.gamma_hat,
            "regime": self.growth.regime,
            "top4_ratio_spread": self.growth.top4_ratio_spread,
            "power_fit": self.growth.power_fit,
            "predicted_exponent": self.growth.predicted_exponent,
            "blocks": self.blocks.as_ref().map(|d| serde_json::json!({
                "n": d.n,
                "q_n": d.q_n,
                "head": d.head,
                "log_term": d.log_term,
                "convergent_term": d.convergent_term,
                "total": d.total(),
            })),
        });
        files.push(report::write_manifest(dir, cfg, &files, &self.checks(), &results)?);
        Ok(files)
    }
}

/// Diophantine sums at dyadic `H` with the growth-regime fit, and the block
/// decomposition if `dioph_blocks` is set.
pub fn run_dioph_sum(cfg: &ExperimentConfig, workers: usize) -> Result<DiophReport> {
    let alpha = cfg.make_alpha()?;
    let growth = growth_fit(&alpha, cfg.b, cfg.dioph_min_level..=cfg.dioph_max_level, cfg.dioph_eta, workers)?;
    let blocks = cfg.dioph_blocks.map(|n| dioph_sum_blocks(&alpha, n, cfg.b, cfg.dioph_eta)).transpose()?;
    Ok(DiophReport {
        alpha: cfg.alpha.clone(),
        growth,
        blocks,
        ratio_max: cfg.ratio_max,
        exponent_min: cfg.exponent_min,
        exponent_max: cfg.exponent_max,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CondReport {
    pub dist: String,
    pub certificate: ConditionCertificate,
}

impl CondReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![Check::new(
            "condition-certified",
            self.certificate.is_certified(),
            format!("{:?}: d = {}, c = {:.6}", self.certificate.kind, self.certificate.d, self.certificate.c),
        )]
    }

    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let mut f = DataFile::create(dir, "condition.csv", &["d", "c", "argmin", "verdict"])?;
        for cand in &self.certificate.candidates {
            f.row([
                cand.d.to_string(),
                fmt_f64(cand.c),
                cand.argmin.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";"),
                format!("{:?}", cand.verdict).to_lowercase(),
            ])?;
        }
        let mut files = vec![f.finish()?];
        files.push(report::write_manifest(dir, cfg, &files, &self.checks(), &self.certificate)?);
        Ok(files)
    }
}

pub fn run_cond_check(cfg: &ExperimentConfig) -> Result<CondReport> {
    Ok(CondReport { dist: cfg.dist.clone(), certificate: certify(cfg)? })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub replica: u64,
    /// `max_k |S_k| / psi(k)` over the simulated horizon.
    pub k_const: f64,
    /// Largest `N <= n_max` with `psi(N) < 1 / (3 K ||q alpha||)`.
    pub n_q: u64,
    /// Points among the first `n_q` in `[1/(3q), 2/(3q))`.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapDenominator {
    pub index: usize,
    pub q: u64,
    /// Upper bound on `||q alpha||`.
    pub dist: f64,
    pub rows: Vec<GapRow>,
}

impl GapDenominator {
    pub fn clear_replicas(&self) -> u64 {
        self.rows.iter().filter(|r| r.count == 0).count() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    /// `psi(k) = envelope_slope k`.
    pub envelope_slope: f64,
    pub denominators: Vec<GapDenominator>,
    pub min_clear: Option<u64>,
}

impl GapReport {
    pub fn checks(&self) -> Vec<Check> {
        let Some(min) = self.min_clear else {
            return Vec::new();
        };
        self.denominators
            .iter()
            .map(|d| {
                Check::new(
                    format!("empty-gap-q{}", d.q),
                    d.clear_replicas() >= min,
                    format!("{} of {} replicas clear, need {min}", d.clear_replicas(), d.rows.len()),
                )
            })
            .collect()
    }

    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let mut f = DataFile::create(dir, "gap.csv", &["n", "q", "q_alpha_dist", "replica", "K", "N_q", "count"])?;
        for d in &self.denominators {
            for r in &d.rows {
                f.row([
                    d.index.to_string(),
                    d.q.to_string(),
                    fmt_f64(d.dist),
                    r.replica.to_string(),
                    fmt_f64(r.k_const),
                    r.n_q.to_string(),
                    r.count.to_string(),
                ])?;
            }
        }
        let mut files = vec![f.finish()?];
        let results = serde_json::json!({
            "envelope": "psi(k) = E|X| k",
            "envelope_slope": self.envelope_slope,
            "clear_replicas": self.denominators.iter().map(|d| (d.q, d.clear_replicas())).collect::<Vec<_>>(),
        });
        files.push(report::write_manifest(dir, cfg, &files, &self.checks(), &results)?);
        Ok(files)
    }
}

/// Empty-gap diagnostic: for the `gap_q_count` largest convergent
/// denominators `2 <= q_n < n_max`, count how many of the first `N(q)`
/// points land in `[1/(3q), 2/(3q))`, with the envelope `psi(k) = E|X| k`.
pub fn run_gap_diagnostic(cfg: &ExperimentConfig, workers: usize) -> Result<GapReport> {
    let dist = cfg.make_dist()?;
    let alpha = cfg.make_alpha()?;
    let slope = dist
        .abs_mean()
        .filter(|m| *m > 0.0)
        .ok_or_else(|| Error::Unsupported("linear envelope needs 0 < E|X| < infinity".into()))?;
    let mut qs = Vec::new();
    let mut n = 1;
    loop {
        let q = alpha.q(n)?;
        if q >= num_bigint::BigUint::from(cfg.n_max) {
            break;
        }
        let q = num_traits::ToPrimitive::to_u64(&q).expect("q below n_max");
        if q >= 2 && qs.last().is_none_or(|&(_, prev, _): &(usize, u64, f64)| prev != q) {
            let e = alpha.eps(n)?;
            qs.push((n, q, e.abs() + e.abs_radius()));
        }
        n += 1;
    }
    let qs: Vec<_> = qs.split_off(qs.len().saturating_sub(cfg.gap_q_count));
    if qs.is_empty() {
        return Err(Error::Insufficient(format!("no denominator 2 <= q_n < {}", cfg.n_max)));
    }

    let proj = alpha.projection()?;
    let per_replica = par_replicas(workers, cfg.replicas, |r| {
        let mut walker = Walker::new(&dist, proj.value, replica_rng(cfg.seed, r));
        let mut base = Vec::with_capacity(cfg.n_max as usize);
        let mut k_const = 0f64;
        for k in 1..=cfg.n_max {
            base.push(walker.step());
            k_const = k_const.max(walker.abs_s_f64() / (slope * k as f64));
        }
        let rows: Vec<GapRow> = qs
            .iter()
            .map(|&(_, q, d)| {
                let limit = 1.0 / (3.0 * k_const * d);
                // largest N with slope N < limit
                let n_q = ((limit / slope).ceil() - 1.0).clamp(0.0, cfg.n_max as f64) as u64;
                let pts: Vec<f64> = base[..n_q as usize].iter().map(|&b| crate::circle::frac_from_u128(b)).collect();
                Ok(GapRow { replica: r, k_const, n_q, count: gap_diagnostic(&pts, q)? })
            })
            .collect::<Result<_>>()?;
        Ok(rows)
    })?;
    let denominators = qs
        .iter()
        .enumerate()
        .map(|(i, &(index, q, d))| GapDenominator {
            index,
            q,
            dist: d,
            rows: per_replica.iter().map(|rows| rows[i].clone()).collect(),
        })
        .collect();
    Ok(GapReport { envelope_slope: slope, denominators, min_clear: cfg.gap_min_clear })
}

/// Simulated traces written as `trace.csv` plus the certificate sidecar
/// `trace_certificates.json`.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub certificates: Vec<TraceCertificate>,
    pub files: Vec<PathBuf>,
}

/// Simulate `replicas` walks and dump every point of every traced harmonic.
/// Each point is written once, under the smallest checkpoint covering it.
pub fn run_simulate(cfg: &ExperimentConfig, workers: usize, dir: &Path) -> Result<SimulationReport> {
    let wc = walk_config(cfg, cfg.trace_harmonics.clone())?;
    let traces = simulate_replicas(&wc, cfg.replicas, workers)?;
    let mut f = DataFile::create(dir, "trace.csv", &["replica", "checkpoint_N", "h", "point_index", "fracpart"])?;
    for t in &traces {
        for &h in &t.harmonics {
            let mut cp = 0;
            for k in 0..t.len() {
                while (t.checkpoints[cp] as usize) < k + 1 {
                    cp += 1;
                }
                f.row([
                    t.replica.to_string(),
                    t.checkpoints[cp].to_string(),
                    h.to_string(),
                    (k + 1).to_string(),
                    fmt_f64(t.fracpart(h, k)?),
                ])?;
            }
        }
    }
    let mut files = vec![f.finish()?];
    let certificates: Vec<TraceCertificate> = traces.iter().map(|t| t.certificate()).collect();
    let side = dir.join("trace_certificates.json");
    let text = serde_json::to_string_pretty(&certificates).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(&side, text + "\n")?;
    files.push(side);
    files.push(report::write_manifest(dir, cfg, &files, &[], &certificates)?);
    Ok(SimulationReport { certificates, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_harmonics() {
        assert_eq!(et_harmonics(1, 0.5), 1);
        assert_eq!(et_harmonics(2, 0.5), 2);
        assert_eq!(et_harmonics(1 << 20, 0.5), 1024);
        assert_eq!(et_harmonics((1 << 20) + 1, 0.5), 1025);
    }

    #[test]
    fn quartiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn small_curve_with_et() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::EtCheck);
        cfg.n_max = 1 << 12;
        cfg.replicas = 3;
        let c = run_et_check(&cfg, 1).unwrap();
        assert_eq!(c.checkpoints.len(), 13);
        assert_eq!(c.et_violations(), Some(0));
        assert!(all_passed(&c.checks()));
        let dir = tempfile::tempdir().unwrap();
        let files = c.write(dir.path(), &cfg).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert!(text.starts_with(SCHEMA_LINE));
        assert_eq!(text.lines().count(), 2 + 3 * 13);
    }
}
