//! Bilinear space-time norms of free waves, the L² change-of-variables bound,
//! the mixed-exponent regions and the small-scale scaling sweeps.

mod exponents;
mod sharp;
mod sweep;

pub use exponents::{admissible_mixed_exponents, exponent_conditions, ExponentConditions, ExponentMode};
pub use sharp::{sharpness_lower_bound, sharpness_sweep, Sharpness, SharpnessGrid};
pub use sweep::{
    exponent_sweep, frame_check, sweep_points, write_sweep_csv, FrameCheck, Resolution, SweepLaw, SweepPoint, SweepResult, SweepSpec,
    Template,
};

use crate::error::{Error, Result};
use crate::phases::PhaseModel;
use crate::spectral::GridField;
use crate::util::fft;
use crate::variation::TimeGrid;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Coefficients below this fraction of the largest one are outside the support.
const SUPPORT_CUT: f64 = 1e-10;

/// A free wave on a relative frequency grid: mode `k` carries the phase `Phi(offset + k) - Phi(offset)`.
/// The modulus of the wave equals that of the free evolution of the shifted data.
pub(crate) struct Wave {
    coeffs: Vec<C>,
    phases: Vec<f64>,
    shape: Vec<usize>,
    support: Vec<Vec<f64>>,
    model: PhaseModel,
}

impl Wave {
    pub(crate) fn new(data: &GridField, model: &PhaseModel, offset: &[f64]) -> Result<Wave> {
        model.validate()?;
        if offset.len() != data.dim {
            return Err(Error::InvalidParameter("frequency offset has the wrong dimension".into()));
        }
        let coeffs = data.fourier();
        let base = model.value(offset);
        let peak = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let mut support = Vec::new();
        let phases = (0..coeffs.len())
            .map(|i| {
                let k = data.frequency(i);
                let xi: Vec<f64> = (0..data.dim).map(|d| offset[d] + k[d]).collect();
                if peak > 0.0 && coeffs[i].norm() > SUPPORT_CUT * peak {
                    support.push(xi.clone());
                }
                model.value(&xi) - base
            })
            .collect();
        Ok(Wave { coeffs, phases, shape: data.shape(), support, model: *model })
    }

    fn at(&self, t: f64) -> Vec<C> {
        let mut s: Vec<C> = self.coeffs.iter().zip(&self.phases).map(|(a, p)| a * C::from_polar(1.0, t * p)).collect();
        fft::inverse(&mut s, &self.shape);
        s
    }

    fn gradients(&self) -> Result<Vec<Vec<f64>>> {
        self.support.iter().map(|xi| self.model.gradient(xi)).collect()
    }
}

/// Largest time for which no two parts of the product travel half a box apart:
/// `L / (2 D)` with `D` the diagonal of the bounding box of both gradient images.
pub(crate) fn safe_time(u: &Wave, v: &Wave, box_length: f64) -> Result<f64> {
    let g: Vec<Vec<f64>> = u.gradients()?.into_iter().chain(v.gradients()?).collect();
    if g.is_empty() {
        return Ok(f64::INFINITY);
    }
    let dim = g[0].len();
    let mut diag = 0.0;
    for d in 0..dim {
        let (lo, hi) = g.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x[d]), b.max(x[d])));
        diag += (hi - lo) * (hi - lo);
    }
    let diag = diag.sqrt();
    Ok(if diag > 0.0 { box_length / (2.0 * diag) } else { f64::INFINITY })
}

fn lp(vals: impl Iterator<Item = f64>, p: f64, w: f64) -> f64 {
    if p.is_infinite() {
        vals.fold(0.0, f64::max)
    } else {
        (vals.map(|v| v.powf(p)).sum::<f64>() * w).powf(1.0 / p)
    }
}

/// `||u v||_{L^a_t L^b_x}` as the same Riemann sum as `spacetime_norm`, one time slice at a time.
pub(crate) fn product_norm(u: &Wave, v: &Wave, layout: &GridField, a: f64, b: f64, grid: TimeGrid) -> Result<f64> {
    if !(a >= 1.0 && b >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponents must be >= 1, got ({a}, {b})")));
    }
    if grid.count == 0 || !(grid.dt > 0.0) {
        return Err(Error::InvalidParameter("time grid needs count >= 1 and dt > 0".into()));
    }
    let safe = safe_time(u, v, layout.box_length)?;
    let reach = grid.t0.abs().max((grid.t0 + grid.dt * (grid.count - 1) as f64).abs());
    if reach > safe {
        return Err(Error::Aliasing { max_safe_time: safe });
    }
    let cell = layout.cell_volume();
    let inner: Vec<f64> = (0..grid.count)
        .into_par_iter()
        .map(|j| {
            let t = grid.t0 + grid.dt * j as f64;
            let (x, y) = (u.at(t), v.at(t));
            lp(x.iter().zip(&y).map(|(p, q)| (p * q).norm()), b, cell)
        })
        .collect();
    Ok(lp(inner.into_iter(), a, grid.dt))
}

/// `||e^{it Phi_1} f e^{it Phi_2} g||_{L^a_t L^b_x}` over the time grid.
#[allow(clippy::too_many_arguments)]
pub fn bilinear_norm(
    f: &GridField,
    g: &GridField,
    m1: &PhaseModel,
    m2: &PhaseModel,
    a: f64,
    b: f64,
    grid: TimeGrid,
) -> Result<f64> {
    if !f.same_layout(g) {
        return Err(Error::InvalidParameter("data layouts differ".into()));
    }
    let zero = vec![0.0; f.dim];
    let u = Wave::new(f, m1, &zero)?;
    let v = Wave::new(g, m2, &zero)?;
    product_norm(&u, &v, f, a, b, grid)
}

/// The diagonal case `a = b = p`.
pub fn bilinear_lp_norm(f: &GridField, g: &GridField, m1: &PhaseModel, m2: &PhaseModel, p: f64, grid: TimeGrid) -> Result<f64> {
    bilinear_norm(f, g, m1, m2, p, p, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Check {
    /// `||uv||_{L^2_{t,x}} / (||f|| ||g||)` over the time grid.
    pub measured: f64,
    /// `2n ((2r)^{n-1} / C0)^{1/2}`.
    pub bound: f64,
    /// `min |grad Phi_1(xi) - grad Phi_2(eta)|` over the data supports.
    pub margin: f64,
}

pub fn l2_bound(n: usize, r: f64, c0: f64) -> f64 {
    2.0 * n as f64 * ((2.0 * r).powi(n as i32 - 1) / c0).sqrt()
}

fn support_diameter(s: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, x) in s.iter().enumerate() {
        for y in &s[i + 1..] {
            d = d.max(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt());
        }
    }
    d
}

/// Measured L² constant against the change-of-variables bound.
///
/// Zero data give `measured = 0`. The margin is computed exactly over the occupied modes.
#[allow(clippy::too_many_arguments)]
pub fn l2_constant_check(
    f: &GridField,
    g: &GridField,
    m1: &PhaseModel,
    m2: &PhaseModel,
    r: f64,
    c0: f64,
    grid: TimeGrid,
) -> Result<L2Check> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("support radius must lie in (0, 1), got {r}")));
    }
    if !(c0 > 0.0) {
        return Err(Error::InvalidParameter("C0 must be positive".into()));
    }
    if !f.same_layout(g) {
        return Err(Error::InvalidParameter("data layouts differ".into()));
    }
    let zero = vec![0.0; f.dim];
    let u = Wave::new(f, m1, &zero)?;
    let v = Wave::new(g, m2, &zero)?;
    let bound = l2_bound(f.dim, r, c0);
    if u.support.is_empty() || v.support.is_empty() {
        return Ok(L2Check { measured: 0.0, bound, margin: f64::INFINITY });
    }
    for s in [&u.support, &v.support] {
        let d = support_diameter(s);
        if d > 2.0 * r * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("support diameter {d} exceeds 2r = {}", 2.0 * r)));
        }
    }
    let (gu, gv) = (u.gradients()?, v.gradients()?);
    let margin = gu
        .par_iter()
        .map(|x| gv.iter().map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min);
    if c0 > margin {
        return Err(Error::InvalidParameter(format!("C0 = {c0} exceeds the transversality margin {margin}")));
    }
    let nrm = product_norm(&u, &v, f, 2.0, 2.0, grid)?;
    Ok(L2Check { measured: nrm / (f.l2_norm() * g.l2_norm()), bound, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proof_constant_arithmetic() {
        assert!((l2_bound(2, 0.125, 1.0) - 2.0).abs() < 1e-15);
    }
}
