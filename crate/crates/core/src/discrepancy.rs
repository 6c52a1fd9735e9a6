//! Extreme and star discrepancy of finite point sets in [0, 1).
//!
//! Intervals are half-open, `[a, b)`. With `x_(1) <= ... <= x_(N)` sorted,
//!
//! * `D_N  = max_i (i/N - x_(i)) + max_i (x_(i) - (i-1)/N)`
//! * `D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N)`
//!
//! `D_N` is a supremum that need not be attained (a single point has
//! `D_1 = 1`, approached by shrinking intervals around it).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyValue {
    pub n: usize,
    pub extreme: f64,
    pub star: f64,
}

fn check_points(points: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(Error::Precondition(format!("point {x} outside [0, 1)")));
    }
    Ok(())
}

fn sorted_copy(points: &[f64]) -> Vec<f64> {
    let mut v = points.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `(max_i (i/N - x_(i)), max_i (x_(i) - (i-1)/N))` over a sorted slice.
fn one_sided(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len() as f64;
    let mut over = f64::NEG_INFINITY;
    let mut under = f64::NEG_INFINITY;
    for (i, &x) in sorted.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        over = over.max(hi - x);
        under = under.max(x - lo);
    }
    (over, under)
}

/// Extreme discrepancy of an already sorted, nonempty slice.
pub fn extreme_discrepancy_sorted(sorted: &[f64]) -> f64 {
    let (over, under) = one_sided(sorted);
    over + under
}

/// Star discrepancy of an already sorted, nonempty slice.
pub fn star_discrepancy_sorted(sorted: &[f64]) -> f64 {
    let (over, under) = one_sided(sorted);
    over.max(under)
}

pub fn extreme_discrepancy(points: &[f64]) -> Result<f64> {
    check_points(points)?;
    Ok(extreme_discrepancy_sorted(&sorted_copy(points)))
}

pub fn star_discrepancy(points: &[f64]) -> Result<f64> {
    check_points(points)?;
    Ok(star_discrepancy_sorted(&sorted_copy(points)))
}

/// Both discrepancies of an already sorted slice.
pub fn discrepancy_sorted(sorted: &[f64]) -> Result<DiscrepancyValue> {
    check_points(sorted)?;
    let (over, under) = one_sided(sorted);
    Ok(DiscrepancyValue { n: sorted.len(), extreme: over + under, star: over.max(under) })
}

pub fn discrepancy(points: &[f64]) -> Result<DiscrepancyValue> {
    check_points(points)?;
    discrepancy_sorted(&sorted_copy(points))
}

/// Number of points in `[1/(3q), 2/(3q))`. A count of zero means the empty
/// interval of length `1/(3q)` forces `D_N >= 1/(3q)`.
pub fn gap_diagnostic(points: &[f64], q: u64) -> Result<usize> {
    if q == 0 {
        return Err(Error::Precondition("q must be positive".into()));
    }
    let lo = 1.0 / (3.0 * q as f64);
    let hi = 2.0 / (3.0 * q as f64);
    Ok(points.iter().filter(|&&x| x >= lo && x < hi).count())
}
