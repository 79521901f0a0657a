use super::field::{GridField, SpaceTimeField};
use crate::dirac::bracket;
use crate::error::{Error, Result};
use crate::phases::FreqRegion;
use crate::util::{bump, fft};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Overlap of the cube partition profile.
const CUBE_OVERLAP: f64 = 0.25;
/// Cap bumps are supported in angle `CAP_REACH * alpha` around their centres.
const CAP_REACH: f64 = 1.5;

/// Fourier multipliers on fields. Spatial kinds act slice-wise on space-time fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierSpec {
    /// `rho(|xi| / lambda)`.
    Dyadic { lambda: f64 },
    /// `chi(|xi| / lambda)`, the sum of all dyadic pieces up to `lambda`.
    LowPass { lambda: f64 },
    /// Cube of side `side` centred at `center`, one member of the partition over `side Z^n + center`.
    Cube { center: Vec<f64>, side: f64 },
    /// Member `index` of the angular partition into caps of size `alpha`.
    Cap { dim: usize, alpha: f64, index: usize },
    /// `rho((tau + sign <xi>_mass) / d)`.
    Modulation { d: f64, sign: f64, mass: f64 },
    /// `chi(|tau + sign <xi>_mass| / d)`.
    ModulationLow { d: f64, sign: f64, mass: f64 },
    /// Indicator of a frequency region.
    Sharp { region: FreqRegion },
}

/// Centres of the cap partition: equally spaced angles for `n = 2`, a Fibonacci sphere for
/// `n = 3`, the two half-lines for `n = 1`.
pub fn cap_centres(dim: usize, alpha: f64) -> Result<Vec<[f64; 3]>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("cap size must be in (0, 1], got {alpha}")));
    }
    Ok(match dim {
        1 => vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        2 => {
            let k = (2.0 * std::f64::consts::PI / alpha).ceil() as usize;
            (0..k)
                .map(|j| {
                    let a = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                    [a.cos(), a.sin(), 0.0]
                })
                .collect()
        }
        3 => {
            let k = (4.0 * std::f64::consts::PI / (alpha * alpha)).ceil() as usize;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / k as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * j as f64;
                    [r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => return Err(Error::InvalidParameter(format!("no caps in dimension {dim}"))),
    })
}

fn cap_symbol(xi: &[f64], alpha: f64, index: usize, centres: &[[f64; 3]]) -> f64 {
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return 0.0;
    }
    if xi.len() == 1 {
        return if (xi[0] > 0.0) == (index == 0) { 1.0 } else { 0.0 };
    }
    let reach = CAP_REACH * alpha;
    let cos_reach = reach.min(std::f64::consts::PI).cos();
    let mut total = 0.0;
    let mut mine = 0.0;
    for (j, c) in centres.iter().enumerate() {
        let d: f64 = xi.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() / r;
        if d <= cos_reach {
            continue;
        }
        let w = bump::phi(d.clamp(-1.0, 1.0).acos() / reach);
        total += w;
        if j == index {
            mine = w;
        }
    }
    if total > 0.0 {
        mine / total
    } else {
        0.0
    }
}

impl MultiplierSpec {
    pub fn is_spacetime(&self) -> bool {
        matches!(self, MultiplierSpec::Modulation { .. } | MultiplierSpec::ModulationLow { .. })
    }

    fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidParameter(s.to_string()));
        match self {
            MultiplierSpec::Dyadic { lambda } | MultiplierSpec::LowPass { lambda } if !(*lambda > 0.0) => {
                bad("lambda must be positive")
            }
            MultiplierSpec::Cube { side, .. } if !(*side > 0.0) => bad("cube side must be positive"),
            MultiplierSpec::Modulation { d, sign, .. } | MultiplierSpec::ModulationLow { d, sign, .. }
                if !(*d > 0.0) || sign.abs() != 1.0 =>
            {
                bad("modulation needs d > 0 and sign = +-1")
            }
            _ => Ok(()),
        }
    }

    /// Spatial symbol as a closure; errors for modulation kinds.
    fn spatial_symbol(&self, dim: usize) -> Result<Box<dyn Fn(&[f64]) -> f64 + Sync + '_>> {
        self.validate()?;
        Ok(match self {
            MultiplierSpec::Dyadic { lambda } => {
                Box::new(move |xi: &[f64]| bump::rho(xi.iter().map(|v| v * v).sum::<f64>().sqrt() / lambda))
            }
            MultiplierSpec::LowPass { lambda } => {
                Box::new(move |xi: &[f64]| bump::chi(xi.iter().map(|v| v * v).sum::<f64>().sqrt() / lambda))
            }
            MultiplierSpec::Cube { center, side } => {
                if center.len() != dim {
                    return Err(Error::InvalidParameter("cube centre has the wrong dimension".into()));
                }
                Box::new(move |xi: &[f64]| {
                    xi.iter().zip(center).map(|(a, c)| bump::psi((a - c) / side, CUBE_OVERLAP)).product()
                })
            }
            MultiplierSpec::Cap { dim: d, alpha, index } => {
                if *d != dim {
                    return Err(Error::InvalidParameter("cap family has the wrong dimension".into()));
                }
                let centres = cap_centres(dim, *alpha)?;
                if *index >= centres.len() {
                    return Err(Error::InvalidParameter(format!("cap index {index} out of range")));
                }
                let (a, i) = (*alpha, *index);
                Box::new(move |xi: &[f64]| cap_symbol(xi, a, i, &centres))
            }
            MultiplierSpec::Sharp { region } => {
                if region.dim() != dim {
                    return Err(Error::InvalidParameter("region has the wrong dimension".into()));
                }
                Box::new(move |xi: &[f64]| if region.contains(xi) { 1.0 } else { 0.0 })
            }
            _ => return Err(Error::FieldType("modulation cutoffs need a space-time field".into())),
        })
    }
}

/// Applies a spatial multiplier to a field.
pub fn apply_multiplier(f: &GridField, m: &MultiplierSpec) -> Result<GridField> {
    let s = m.spatial_symbol(f.dim)?;
    Ok(f.map_fourier(|xi| C::new(s(xi), 0.0)))
}

/// Hann window `sin^2(pi (j + 1/2) / n)`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).sin().powi(2)).collect()
}

/// The field multiplied by the Hann window in time.
pub fn windowed(u: &SpaceTimeField) -> SpaceTimeField {
    let w = hann_window(u.time_samples);
    let n = u.space_len();
    let mut out = u.clone();
    out.samples.par_chunks_mut(n).zip(w.par_iter()).for_each(|(s, wj)| s.iter_mut().for_each(|v| *v *= wj));
    out
}

/// Applies a multiplier to a space-time field. Modulation cutoffs window the field in time
/// first, so they return `C_d (w u)` with `w` the Hann window.
pub fn apply_spacetime(u: &SpaceTimeField, m: &MultiplierSpec) -> Result<SpaceTimeField> {
    if !m.is_spacetime() {
        let lay = u.layout();
        let s = m.spatial_symbol(u.dim)?;
        let mut out = u.clone();
        let n = u.space_len();
        out.samples.par_chunks_mut(n).for_each(|slot| {
            let mut g = GridField { samples: slot.to_vec(), ..lay.clone() };
            g = g.map_fourier(|xi| C::new(s(xi), 0.0));
            slot.copy_from_slice(&g.samples);
        });
        return Ok(out);
    }
    m.validate()?;
    let (d, sign, mass, low) = match m {
        MultiplierSpec::Modulation { d, sign, mass } => (*d, *sign, *mass, false),
        MultiplierSpec::ModulationLow { d, sign, mass } => (*d, *sign, *mass, true),
        _ => unreachable!(),
    };
    let mut w = windowed(u);
    let mut shape = vec![u.time_samples];
    shape.extend(vec![u.points; u.dim]);
    fft::forward(&mut w.samples, &shape);
    let lay = u.layout();
    let n = u.space_len();
    let dtau = 2.0 * std::f64::consts::PI / (u.time_step * u.time_samples as f64);
    w.samples.par_chunks_mut(n).enumerate().for_each(|(j, slot)| {
        let tau = dtau * fft::signed_index(j, u.time_samples) as f64;
        for (i, v) in slot.iter_mut().enumerate() {
            let xi = lay.frequency(i);
            let q = (tau + sign * bracket(&xi[..u.dim], mass)) / d;
            *v *= if low { bump::chi(q.abs()) } else { bump::rho(q.abs()) };
        }
    });
    fft::inverse(&mut w.samples, &shape);
    Ok(w)
}

/// `P_{<= lambda_min}` followed by `P_lambda` for `lambda = 2 lambda_min, ..., lambda_max`.
pub fn dyadic_family(lambda_min: f64, lambda_max: f64) -> Result<Vec<MultiplierSpec>> {
    if !(lambda_min > 0.0 && lambda_max >= lambda_min) {
        return Err(Error::InvalidParameter("need 0 < lambda_min <= lambda_max".into()));
    }
    let mut v = vec![MultiplierSpec::LowPass { lambda: lambda_min }];
    let mut l = 2.0 * lambda_min;
    while l <= lambda_max * (1.0 + 1e-12) {
        v.push(MultiplierSpec::Dyadic { lambda: l });
        l *= 2.0;
    }
    Ok(v)
}
