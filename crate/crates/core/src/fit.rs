//! Ordinary least squares for exponent fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval for the slope.
    pub slope_ci: f64,
    pub residuals: Vec<f64>,
    /// Root mean square of the residuals.
    pub rms_residual: f64,
}

/// Fit `y = intercept + slope x`. Needs at least three points and two
/// distinct abscissae.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::Precondition("x and y lengths differ".into()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Insufficient(format!("{n} points, need at least 3")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Insufficient("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - intercept - slope * x).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let dof = nf - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Precondition(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(LinearFit { slope, intercept, slope_ci: t * se, rms_residual: (sse / nf).sqrt(), residuals })
}

/// Fit `ln y` against `ln x`; the slope is the power-law exponent.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Precondition("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    least_squares(&lx, &ly)
}

/// Power-law fit of `D_N sqrt(N / ln ln N)` against `N`; a slope near zero
/// means `D_N` tracks `sqrt(ln ln N / N)`. Needs `N >= 16`.
pub fn fit_loglog_corrected(ns: &[f64], ds: &[f64]) -> Result<LinearFit> {
    if ns.iter().any(|&n| n < 16.0) {
        return Err(Error::Precondition("loglog correction needs N >= 16".into()));
    }
    let corrected: Vec<f64> = ns.iter().zip(ds).map(|(n, d)| d * (n / n.ln().ln()).sqrt()).collect();
    fit_power_law(ns, &corrected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = least_squares(&xs, &ys).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-14);
        assert!((f.intercept - 3.0).abs() < 1e-14);
        assert!(f.slope_ci < 1e-12);
    }

    #[test]
    fn known_ci() {
        // residuals +-1 alternate: sse = 4, sxx = 5, se = sqrt(4/2/5)
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -1.0, 1.0, -1.0];
        let f = least_squares(&xs, &ys).unwrap();
        let se = (f.residuals.iter().map(|r| r * r).sum::<f64>() / 2.0 / 5.0).sqrt();
        assert!((f.slope_ci - 4.302652729749464 * se).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(least_squares(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::Insufficient(_))));
        assert!(matches!(least_squares(&[1.0; 4], &[1.0, 2.0, 3.0, 4.0]), Err(Error::Insufficient(_))));
    }

    #[test]
    fn loglog_corrected_flat() {
        let ns: Vec<f64> = (10..=20).map(|k| 2f64.powi(k)).collect();
        let ds: Vec<f64> = ns.iter().map(|n| 0.7 * (n.ln().ln() / n).sqrt()).collect();
        assert!(fit_loglog_corrected(&ns, &ds).unwrap().slope.abs() < 1e-12);
    }
}
