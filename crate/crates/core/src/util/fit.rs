//! Ordinary least squares fits used for log-log slopes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual.
    pub residual: f64,
}

pub fn line_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, what: "fit points".into() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(LineFit { slope, intercept, residual: (rss / n).sqrt() })
}

/// Slope of `ln y` against `ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    line_fit(&lx, &ly)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    pub slope_a: f64,
    pub slope_b: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Fit `z = sa * a + sb * b + c` by least squares (normal equations, 3x3).
pub fn plane_fit(a: &[f64], b: &[f64], z: &[f64]) -> Result<PlaneFit> {
    let n = z.len();
    if a.len() != n || b.len() != n || n < 3 {
        return Err(Error::TooFewPoints { needed: 3, what: "plane fit points".into() });
    }
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut r = nalgebra::Vector3::<f64>::zeros();
    for i in 0..n {
        let row = nalgebra::Vector3::new(a[i], b[i], 1.0);
        m += row * row.transpose();
        r += row * z[i];
    }
    let sol = m
        .lu()
        .solve(&r)
        .ok_or_else(|| Error::InvalidParameter("degenerate plane fit design".into()))?;
    let rss: f64 = (0..n).map(|i| (z[i] - sol[0] * a[i] - sol[1] * b[i] - sol[2]).powi(2)).sum();
    Ok(PlaneFit { slope_a: sol[0], slope_b: sol[1], intercept: sol[2], residual: (rss / n as f64).sqrt() })
}
