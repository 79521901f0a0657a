use super::field::{propagate, GridField};
use crate::error::{Error, Result};
use crate::phases::{FreqRegion, PhaseModel};
use crate::util::{bump, fit};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayGrid {
    pub points: usize,
    pub box_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub times: Vec<f64>,
    pub sup: Vec<f64>,
    pub max_safe_time: f64,
}

/// Largest `|grad Phi|` over 4096 samples of the region.
pub fn max_group_velocity(model: &PhaseModel, region: &FreqRegion) -> Result<f64> {
    let pts = region.sample(4096, 7)?;
    let mut v: f64 = 0.0;
    for p in pts {
        let g = model.gradient(&p)?;
        v = v.max(g.iter().map(|a| a * a).sum::<f64>().sqrt());
    }
    Ok(v)
}

/// Smooth data with Fourier support in a ball or annulus, peak coefficient 1.
pub fn decay_data(region: &FreqRegion, grid: DecayGrid) -> Result<GridField> {
    let dim = region.dim();
    let kmax = std::f64::consts::PI * grid.points as f64 / grid.box_length;
    let reach = match region {
        FreqRegion::Ball { center, radius } => center.iter().map(|c| c * c).sum::<f64>().sqrt() + radius,
        FreqRegion::Annulus { center, r_out, .. } => center.iter().map(|c| c * c).sum::<f64>().sqrt() + r_out,
        _ => return Err(Error::InvalidParameter("decay data needs a ball or annulus".into())),
    };
    if reach >= kmax {
        return Err(Error::InvalidParameter(format!("region reaches {reach}, beyond the lattice cutoff {kmax}")));
    }
    let region = region.clone();
    GridField::from_fourier_fn(dim, grid.box_length, grid.points, move |xi| {
        let v = match &region {
            FreqRegion::Ball { center, radius } => {
                let d: f64 = xi.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                bump::phi(d / radius)
            }
            FreqRegion::Annulus { center, r_in, r_out } => {
                let d: f64 = xi.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                bump::phi((d - 0.5 * (r_in + r_out)) / (0.5 * (r_out - r_in)))
            }
            _ => 0.0,
        };
        C::new(v, 0.0)
    })
}

/// Least-squares slope of `log sup_x |e^{it Phi} f|` against `log t`.
pub fn dispersive_decay_slope(model: &PhaseModel, region: &FreqRegion, times: &[f64], grid: DecayGrid) -> Result<DecayResult> {
    if times.len() < 4 {
        return Err(Error::TooFewPoints { needed: 4, what: "times".into() });
    }
    let v = max_group_velocity(model, region)?;
    let safe = if v > 0.0 { grid.box_length / (8.0 * v) } else { f64::INFINITY };
    if times.iter().any(|t| t.abs() > safe) {
        return Err(Error::Aliasing { max_safe_time: safe });
    }
    let f = decay_data(region, grid)?;
    let mut sup = Vec::with_capacity(times.len());
    for &t in times {
        sup.push(propagate(&f, model, t)?.sup_norm());
    }
    let fit = fit::loglog_fit(times, &sup)?;
    Ok(DecayResult {
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        times: times.to_vec(),
        sup,
        max_safe_time: safe,
    })
}
