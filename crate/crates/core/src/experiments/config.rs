//! Flat TOML experiment configuration with a canonical text form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alpha::{Alpha, PartialQuotientSource};
use crate::condition::{DEFAULT_D_MAX, DEFAULT_SECOND_GRID};
use crate::dist::{StepDistribution, StepSpec};
use crate::error::{Error, Result};
use crate::walk::CheckpointSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DiscrepancyCurve,
    FitExponent,
    MomentCheck,
    DiophSum,
    CondCheck,
    EtCheck,
    GapDiagnostic,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DiscrepancyCurve => "discrepancy-curve",
            ExperimentKind::FitExponent => "fit-exponent",
            ExperimentKind::MomentCheck => "moment-check",
            ExperimentKind::DiophSum => "dioph-sum",
            ExperimentKind::CondCheck => "cond-check",
            ExperimentKind::EtCheck => "et-check",
            ExperimentKind::GapDiagnostic => "gap-diagnostic",
        }
    }
}

/// Which regularity condition on the characteristic function to certify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionChoice {
    /// `1 - |phi(2 pi x)| >= c ||d x||^beta`.
    First,
    /// `|phi(2 pi x) - phi(2 pi y)| >= c ||d (x - y)||`.
    Second,
}

fn d_alpha() -> String {
    "golden".into()
}
fn d_dist() -> String {
    "twopoint:1,2,0.5".into()
}
fn d_n_max() -> u64 {
    1 << 20
}
fn d_replicas() -> u64 {
    16
}
fn d_output() -> String {
    "out".into()
}
fn d_eta() -> f64 {
    1e-12
}
fn d_fit_min_n() -> u64 {
    1024
}
fn d_et_h_exponent() -> f64 {
    0.5
}
fn d_trace_harmonics() -> Vec<u64> {
    vec![1]
}
fn d_moment_n() -> Vec<u64> {
    vec![64, 128, 256, 512, 1024]
}
fn d_moment_p() -> Vec<u32> {
    vec![1, 2, 3]
}
fn d_moment_h() -> Vec<u64> {
    (1..=16).collect()
}
fn d_condition() -> ConditionChoice {
    ConditionChoice::Second
}
fn d_beta() -> f64 {
    2.0
}
fn d_stderr_slack() -> f64 {
    4.0
}
fn d_cond_grid() -> usize {
    DEFAULT_SECOND_GRID
}
fn d_d_max() -> u64 {
    DEFAULT_D_MAX
}
fn d_b() -> f64 {
    0.5
}
fn d_dioph_min_level() -> u32 {
    6
}
fn d_dioph_max_level() -> u32 {
    20
}
fn d_dioph_eta() -> f64 {
    1e-10
}
fn d_ratio_max() -> f64 {
    3.0
}
fn d_gap_q_count() -> usize {
    3
}

/// Every experiment reads the same flat table; fields a kind does not use
/// are ignored by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "d_alpha")]
    pub alpha: String,
    #[serde(default = "d_dist")]
    pub dist: String,
    #[serde(default = "d_n_max")]
    pub n_max: u64,
    /// Explicit checkpoints; empty means dyadic up to `n_max`.
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default = "d_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_output")]
    pub output: String,
    /// Per-point error budget for simulated fractional parts.
    #[serde(default = "d_eta")]
    pub eta: f64,

    /// Exponent fits use checkpoints `N >= fit_min_n`.
    #[serde(default = "d_fit_min_n")]
    pub fit_min_n: u64,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    /// Also evaluate the Erdős–Turán bound at every checkpoint.
    #[serde(default)]
    pub et_check: bool,
    /// The Erdős–Turán bound uses `H = ceil(N^et_h_exponent)` harmonics.
    #[serde(default = "d_et_h_exponent")]
    pub et_h_exponent: f64,
    #[serde(default = "d_trace_harmonics")]
    pub trace_harmonics: Vec<u64>,

    #[serde(default)]
    pub moment_m: u64,
    #[serde(default = "d_moment_n")]
    pub moment_n: Vec<u64>,
    #[serde(default = "d_moment_p")]
    pub moment_p: Vec<u32>,
    #[serde(default = "d_moment_h")]
    pub moment_h: Vec<u64>,
    #[serde(default = "d_condition")]
    pub condition: ConditionChoice,
    #[serde(default = "d_beta")]
    pub beta: f64,
    /// Monte Carlo moments may exceed a bound by this many standard errors.
    #[serde(default = "d_stderr_slack")]
    pub stderr_slack: f64,
    #[serde(default = "d_cond_grid")]
    pub cond_grid: usize,
    #[serde(default = "d_d_max")]
    pub d_max: u64,

    #[serde(default = "d_b")]
    pub b: f64,
    #[serde(default = "d_dioph_min_level")]
    pub dioph_min_level: u32,
    #[serde(default = "d_dioph_max_level")]
    pub dioph_max_level: u32,
    #[serde(default = "d_dioph_eta")]
    pub dioph_eta: f64,
    /// Number of `[q_k, q_{k+1})` blocks to decompose, if any.
    pub dioph_blocks: Option<usize>,
    /// Largest accepted max/min spread of `sum / ln^s H` in the log regime.
    #[serde(default = "d_ratio_max")]
    pub ratio_max: f64,
    pub exponent_min: Option<f64>,
    pub exponent_max: Option<f64>,

    /// How many of the largest denominators `2 <= q_n < n_max` to test.
    #[serde(default = "d_gap_q_count")]
    pub gap_q_count: usize,
    /// Replicas per denominator that must show an empty gap.
    pub gap_min_clear: Option<u64>,
}

impl ExperimentConfig {
    /// A configuration of the given kind with every other field defaulted.
    pub fn new(kind: ExperimentKind) -> Self {
        Self::parse(&format!("kind = \"{}\"", kind.name())).expect("defaults are valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical text: every field, in declaration order.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.make_alpha()?;
        self.make_dist()?;
        let pos = |name: &str, v: u64| {
            if v == 0 {
                Err(Error::Config(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        pos("n_max", self.n_max)?;
        pos("replicas", self.replicas)?;
        if !(self.eta > 0.0) || !(self.dioph_eta > 0.0) {
            return Err(Error::Config("eta values must be positive".into()));
        }
        if !(self.et_h_exponent > 0.0 && self.et_h_exponent <= 1.0) {
            return Err(Error::Config("et_h_exponent must lie in (0, 1]".into()));
        }
        if self.trace_harmonics.is_empty() || self.trace_harmonics.contains(&0) {
            return Err(Error::Config("trace_harmonics must be positive".into()));
        }
        if self.moment_n.contains(&0) || self.moment_p.contains(&0) || self.moment_h.contains(&0) {
            return Err(Error::Config("moment lists must be positive".into()));
        }
        if !(self.b > 0.0 && self.b <= 1.0) {
            return Err(Error::Config("b must lie in (0, 1]".into()));
        }
        if let (Some(lo), Some(hi)) = (self.tau_min, self.tau_max) {
            if lo > hi {
                return Err(Error::Config("tau_min exceeds tau_max".into()));
            }
        }
        self.schedule().resolve(self.n_max)?;
        Ok(())
    }

    pub fn alpha_source(&self) -> Result<PartialQuotientSource> {
        self.alpha.parse()
    }

    pub fn step_spec(&self) -> Result<StepSpec> {
        self.dist.parse()
    }

    pub fn make_alpha(&self) -> Result<Alpha> {
        Alpha::new(self.alpha_source()?)
    }

    pub fn make_dist(&self) -> Result<StepDistribution> {
        StepDistribution::new(self.step_spec()?)
    }

    pub fn schedule(&self) -> CheckpointSchedule {
        if self.checkpoints.is_empty() {
            CheckpointSchedule::Dyadic
        } else {
            CheckpointSchedule::Explicit(self.checkpoints.clone())
        }
    }
}
