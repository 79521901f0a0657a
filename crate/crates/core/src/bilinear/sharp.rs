//! Indicator data on thin slabs `Omega_j = {|xi_1 - c_j| <= f alpha lambda^2, |xi'| <= f alpha lambda}`
//! for the unit-mass half-wave `e^{it<nabla>}`, with `f` the factor standing in for `<<`.

use super::sweep::Resolution;
use super::{product_norm, Wave};
use crate::error::{Error, Result};
use crate::phases::{PhaseModel, Rescale};
use crate::spectral::GridField;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessGrid {
    pub dim: usize,
    /// Rescaled-frame grid and time window.
    pub resolution: Resolution,
    /// Factor standing in for `<<`.
    pub factor: f64,
    /// Samples per axis of the coherence box `A`.
    pub box_samples: usize,
}

impl Default for SharpnessGrid {
    fn default() -> Self {
        SharpnessGrid {
            dim: 2,
            resolution: Resolution { points: 128, box_length: 1024.0, half_window: 400.0, dt: 1.0 },
            factor: 1.0 / 16.0,
            box_samples: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sharpness {
    pub alpha: f64,
    pub lambda: f64,
    /// `||uv||_{L^p} / (||f|| ||g||)`.
    pub measured: f64,
    /// `alpha^{n-(n+2)/p} lambda^{n+1-(n+2)/p}`.
    pub predicted: f64,
    /// Smallest `|uv| / (|Omega_1| |Omega_2|)` over the sampled box `A`.
    pub coherence_min: f64,
    pub modes: [usize; 2],
}

fn bracket(c: f64) -> f64 {
    (1.0 + c * c).sqrt()
}

fn linspace(h: f64, q: usize) -> Vec<f64> {
    if q == 1 {
        return vec![0.0];
    }
    (0..q).map(|i| -h + 2.0 * h * i as f64 / (q - 1) as f64).collect()
}

/// Measured constant of the slab example against the radial-separation law, plus the
/// pointwise coherence check on `A` by direct summation over the occupied modes.
pub fn sharpness_lower_bound(alpha: f64, lambda: f64, c1: f64, c2: f64, p: f64, grid: &SharpnessGrid) -> Result<Sharpness> {
    let n = grid.dim;
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidParameter("dimension must be 2 or 3".into()));
    }
    if !(alpha > 0.0 && lambda > 0.0 && p >= 1.0) {
        return Err(Error::InvalidParameter("need alpha, lambda > 0 and p >= 1".into()));
    }
    let f = grid.factor;
    if !(f > 0.0 && f <= 0.5) {
        return Err(Error::InvalidParameter("factor must lie in (0, 1/2]".into()));
    }
    let a1 = alpha * lambda * lambda;
    let b = alpha * lambda;
    if b > 0.25 {
        return Err(Error::Regime(format!("need alpha lambda <= 1/4, got {b}")));
    }
    if [c1, c2].iter().any(|c| *c < 0.5 * lambda || *c > 2.0 * lambda) {
        return Err(Error::Regime("need c1, c2 within a factor 2 of lambda".into()));
    }
    if (c1 - c2).abs() > 2.0 * a1 {
        return Err(Error::Regime("need |c1 - c2| <= 2 alpha lambda^2".into()));
    }
    let res = grid.resolution;
    let data = GridField::from_fourier_fn(n, res.box_length, res.points, |k| {
        let t = k[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        C::new(if k[0].abs() <= f && t <= f { 1.0 } else { 0.0 }, 0.0)
    })?;
    let coeffs = data.fourier();
    let rel: Vec<Vec<f64>> = (0..coeffs.len())
        .filter(|&i| coeffs[i].norm() > 0.5)
        .map(|i| data.frequency(i)[..n].to_vec())
        .collect();
    if rel.is_empty() {
        return Err(Error::InvalidParameter("slab contains no grid frequency; refine the grid or widen the slab".into()));
    }
    let r = Rescale::SlabII { alpha, lambda, c1, m1: 1.0 };
    let model = PhaseModel::klein_gordon(1.0).with_rescale(r);
    let mut o1 = vec![0.0; n];
    let mut o2 = vec![0.0; n];
    o1[0] = c1 / a1;
    o2[0] = c2 / a1;
    let u = Wave::new(&data, &model, &o1)?;
    let v = Wave::new(&data, &model, &o2)?;
    let nrm = product_norm(&u, &v, &data, p, p, res.time_grid(res.half_window, 1.0))?;
    let rescaled = nrm / (data.l2_norm() * data.l2_norm());
    let jac = a1 * b.powi(n as i32 - 1);
    let ts = alpha * alpha * lambda;
    let measured = rescaled * jac.powf(1.0 - 1.0 / p) * ts.powf(-1.0 / p);
    let nf = n as f64;
    let predicted = alpha.powf(nf - (nf + 2.0) / p) * lambda.powf(nf + 1.0 - (nf + 2.0) / p);

    // Coherence on A in the original frame.
    let w = jac * data.dk().powi(n as i32);
    let modes = |c: f64| -> Vec<Vec<f64>> {
        rel.iter()
            .map(|k| {
                let mut xi = vec![c + a1 * k[0]];
                xi.extend(k[1..].iter().map(|x| b * x));
                xi
            })
            .collect()
    };
    let (s1, s2) = (modes(c1), modes(c2));
    let measure = rel.len() as f64 * w;
    let drift = c1 / bracket(c1);
    let q = grid.box_samples.max(1);
    let ts_axis = linspace(f / ts, q);
    let y1_axis = linspace(f / a1, q);
    let yp_axis = linspace(f / b, q);
    let mut pts = vec![];
    for &t in &ts_axis {
        for &y1 in &y1_axis {
            let mut tail = vec![vec![]];
            for _ in 1..n {
                tail = tail.iter().flat_map(|v: &Vec<f64>| yp_axis.iter().map(move |y| [v.clone(), vec![*y]].concat())).collect();
            }
            for rest in tail {
                let mut x = vec![y1 - drift * t];
                x.extend(rest);
                pts.push((t, x));
            }
        }
    }
    let wave_at = |s: &[Vec<f64>], c: f64, t: f64, x: &[f64]| -> f64 {
        let bc = bracket(c);
        let z: C = s
            .iter()
            .map(|xi| {
                let q2: f64 = xi.iter().map(|v| v * v).sum();
                let ph = t * ((1.0 + q2).sqrt() - bc) + x[0] * (xi[0] - c) + x[1..].iter().zip(&xi[1..]).map(|(a, b)| a * b).sum::<f64>();
                C::from_polar(w, ph)
            })
            .sum();
        z.norm()
    };
    let coherence_min = pts
        .par_iter()
        .map(|(t, x)| wave_at(&s1, c1, *t, x) * wave_at(&s2, c2, *t, x) / (measure * measure))
        .reduce(|| f64::INFINITY, f64::min);
    Ok(Sharpness { alpha, lambda, measured, predicted, coherence_min, modes: [rel.len(), rel.len()] })
}

/// The slab example over a dyadic grid with `c1 = lambda`, `c2 = lambda + alpha lambda^2`.
pub fn sharpness_sweep(alphas: &[f64], lambdas: &[f64], p: f64, grid: &SharpnessGrid) -> Result<Vec<Sharpness>> {
    let coords: Vec<(f64, f64)> = alphas.iter().flat_map(|a| lambdas.iter().map(move |l| (*a, *l))).collect();
    coords
        .par_iter()
        .map(|&(a, l)| sharpness_lower_bound(a, l, l, l + a * l * l, p, grid))
        .collect()
}
