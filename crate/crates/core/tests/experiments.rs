use alpha_walk_core::experiments::config::{ConditionChoice, ExperimentConfig, ExperimentKind};
use alpha_walk_core::experiments::report::SCHEMA_LINE;
use alpha_walk_core::experiments::{
    run_cond_check, run_discrepancy_curve, run_dioph_sum, run_gap_diagnostic, run_moment_check, run_simulate,
};
use alpha_walk_core::fit::{fit_loglog_corrected, fit_power_law};
use std::path::Path;

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn config_text_round_trips() {
    let text = r#"
kind = "discrepancy-curve"
alpha = "power:4"
dist = "symzeta:0.5"
n_max = 4096
replicas = 3
tau_min = 0.1
checkpoints = [16, 256, 4096]
"#;
    let cfg = ExperimentConfig::parse(text).unwrap();
    let canon = cfg.to_canonical();
    assert_eq!(ExperimentConfig::parse(&canon).unwrap(), cfg);
    assert_eq!(ExperimentConfig::parse(&canon).unwrap().to_canonical(), canon);
    assert!(ExperimentConfig::parse("kind = \"discrepancy-curve\"\nbogus = 1").is_err());
    assert!(ExperimentConfig::parse("kind = \"discrepancy-curve\"\nalpha = \"golden\"\ndist = \"pmf:[(1,0.5)]\"").is_err());
}

#[test]
fn curve_files_are_worker_independent() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::DiscrepancyCurve);
    cfg.n_max = 1 << 12;
    cfg.replicas = 5;
    cfg.seed = 9;
    cfg.et_check = true;
    cfg.fit_min_n = 64;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_discrepancy_curve(&cfg, 1).unwrap().write(a.path(), &cfg).unwrap();
    run_discrepancy_curve(&cfg, 3).unwrap().write(b.path(), &cfg).unwrap();
    for name in ["curve.csv", "curve_summary.csv"] {
        let x = read(a.path(), name);
        assert_eq!(x, read(b.path(), name), "{name}");
        assert!(x.starts_with(SCHEMA_LINE.as_bytes()));
    }
    let manifest: serde_json::Value = serde_json::from_slice(&read(a.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["kind"], "discrepancy-curve");
    assert_eq!(manifest["seed"], 9);
    let embedded = ExperimentConfig::parse(manifest["config"].as_str().unwrap()).unwrap();
    assert_eq!(embedded, cfg);
}

#[test]
fn simulate_writes_trace() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::DiscrepancyCurve);
    cfg.n_max = 100;
    cfg.replicas = 2;
    cfg.trace_harmonics = vec![1, 3];
    let dir = tempfile::tempdir().unwrap();
    run_simulate(&cfg, 2, dir.path()).unwrap();
    let text = String::from_utf8(read(dir.path(), "trace.csv")).unwrap();
    // schema line, header, then 2 replicas x 2 harmonics x 100 points
    assert_eq!(text.lines().count(), 2 + 400);
    assert!(dir.path().join("trace_certificates.json").exists());
}

#[test]
fn degenerate_golden_exponent() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::DiscrepancyCurve);
    cfg.dist = "pmf:[(1,1)]".into();
    cfg.n_max = 1 << 18;
    cfg.replicas = 1;
    let curve = run_discrepancy_curve(&cfg, 1).unwrap();
    assert!(curve.tau_hat >= 0.85 && curve.tau_hat <= 1.0, "tau_hat = {}", curve.tau_hat);
}

#[test]
fn synthetic_fits() {
    let ns: Vec<f64> = (10..=20).map(|k| 2f64.powi(k)).collect();
    let pure: Vec<f64> = ns.iter().map(|n| n.powf(-0.5)).collect();
    assert!((fit_power_law(&ns, &pure).unwrap().slope + 0.5).abs() < 1e-9);
    let ll: Vec<f64> = ns.iter().map(|n| (n.ln().ln() / n).sqrt()).collect();
    let s = fit_power_law(&ns, &ll).unwrap().slope;
    assert!((-0.56..=-0.44).contains(&s), "{s}");
    assert!(fit_loglog_corrected(&ns, &ll).unwrap().slope.abs() < 1e-12);
}

#[test]
fn cond_check_certifies_two_point() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::CondCheck);
    cfg.condition = ConditionChoice::Second;
    let rep = run_cond_check(&cfg).unwrap();
    assert!(rep.certificate.is_certified());
    let dir = tempfile::tempdir().unwrap();
    rep.write(dir.path(), &cfg).unwrap();
    let manifest: serde_json::Value = serde_json::from_slice(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["passed"], true);
    assert!(manifest["results"]["c"].as_f64().unwrap() > 0.0);
}

#[test]
fn small_moment_check() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::MomentCheck);
    cfg.moment_n = vec![8, 64];
    cfg.moment_h = vec![1, 2];
    cfg.moment_p = vec![1, 2];
    cfg.replicas = 400;
    let rep = run_moment_check(&cfg, 1).unwrap();
    assert_eq!(rep.records.len(), 8);
    assert_eq!(rep.violations(), 0);
    // n = 8 is small enough for the exact expansion
    assert!(rep.records.iter().filter(|r| r.n == 8).all(|r| r.exact.is_some()));
}

#[test]
fn small_dioph_run() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::DiophSum);
    cfg.dioph_max_level = 12;
    cfg.dioph_blocks = Some(5);
    let rep = run_dioph_sum(&cfg, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    rep.write(dir.path(), &cfg).unwrap();
    let sums = String::from_utf8(read(dir.path(), "dioph_sums.csv")).unwrap();
    assert_eq!(sums.lines().count(), 2 + 7);
    assert!(dir.path().join("dioph_blocks.csv").exists());
}

#[test]
fn small_gap_run() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::GapDiagnostic);
    cfg.alpha = "power:4".into();
    cfg.n_max = 1 << 12;
    cfg.replicas = 4;
    let rep = run_gap_diagnostic(&cfg, 1).unwrap();
    let qs: Vec<u64> = rep.denominators.iter().map(|d| d.q).collect();
    assert_eq!(qs, vec![2, 17]);
    assert!((rep.envelope_slope - 1.5).abs() < 1e-15);
    for d in &rep.denominators {
        for r in &d.rows {
            assert!(r.k_const >= 2.0 / 3.0 - 1e-12);
            assert!(1.5 * r.n_q as f64 * 3.0 * r.k_const * d.dist < 1.0);
        }
    }
}
