//! Shared fixtures for the benchmarks.

use alpha_walk_core::walk::{simulate_replica, FracPartTrace, WalkConfig};
use alpha_walk_core::Alpha;

pub fn alpha(spec: &str) -> Alpha {
    Alpha::new(spec.parse().expect("alpha spec")).expect("alpha")
}

/// One replica of `dist` steps against `alpha`, `n` points long.
pub fn trace(alpha_spec: &str, dist: &str, n: u64) -> FracPartTrace {
    let cfg = WalkConfig::new(dist.parse().expect("dist spec"), alpha(alpha_spec), n);
    simulate_replica(&cfg, 0).expect("simulation")
}
