//! `p`-variation and flow-adapted `V^p_Phi` norms, `U^p` atoms, the atomic transference
//! computation and the high-modulation bound.

use crate::dirac::bracket;
use crate::error::{Error, Result};
use crate::phases::PhaseModel;
use crate::spectral::{self, GridField, MultiplierSpec, SpaceTimeField};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Samples `rho(t_k)` of a path `R -> L^2_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    pub times: Vec<f64>,
    pub values: Vec<GridField>,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<GridField>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidParameter("times and values differ in length".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("sample times must be strictly increasing".into()));
        }
        if let Some(f) = values.first() {
            if values.iter().any(|v| !v.same_layout(f)) {
                return Err(Error::InvalidParameter("path values have different layouts".into()));
            }
        }
        Ok(SampledPath { times, values })
    }

    pub fn scaled(&self, c: f64) -> SampledPath {
        let values = self
            .values
            .iter()
            .map(|v| GridField { samples: v.samples.iter().map(|a| a * c).collect(), ..v.clone() })
            .collect();
        SampledPath { times: self.times.clone(), values }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationNorm {
    /// `|rho|_{V^p}` over the sample times.
    pub variation: f64,
    /// `sup_k ||rho(t_k)||`.
    pub sup_norm: f64,
    /// `sup + variation`.
    pub norm: f64,
    /// Set when fewer than two samples were given (variation 0 by convention).
    pub single_sample: bool,
}

fn distances(values: &[GridField]) -> Vec<Vec<f64>> {
    let k = values.len();
    (0..k)
        .into_par_iter()
        .map(|i| (0..k).map(|j| if j > i { values[j].sub(&values[i]).l2_norm() } else { 0.0 }).collect())
        .collect()
}

/// Exact supremum over sub-partitions of the sample times, by dynamic programming on the last
/// chosen index.
pub fn variation_from_distances(d: &[Vec<f64>], p: f64) -> f64 {
    let k = d.len();
    let mut best = vec![0.0f64; k];
    for j in 1..k {
        let mut b: f64 = 0.0;
        for i in 0..j {
            b = b.max(best[i] + d[i][j].powf(p));
        }
        best[j] = b;
    }
    best.into_iter().fold(0.0, f64::max).powf(1.0 / p)
}

pub fn p_variation_norm(path: &SampledPath, p: f64) -> Result<VariationNorm> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if path.values.is_empty() {
        return Err(Error::EmptySamples("path has no samples".into()));
    }
    let sup_norm = path.values.iter().map(|v| v.l2_norm()).fold(0.0, f64::max);
    if path.values.len() < 2 {
        return Ok(VariationNorm { variation: 0.0, sup_norm, norm: sup_norm, single_sample: true });
    }
    let variation = variation_from_distances(&distances(&path.values), p);
    Ok(VariationNorm { variation, sup_norm, norm: sup_norm + variation, single_sample: false })
}

/// Pulls each sample back along the free flow, then takes the `V^p` norm.
pub fn flow_adapted_variation(path: &SampledPath, model: &PhaseModel, p: f64) -> Result<VariationNorm> {
    let back: Vec<GridField> =
        path.times.iter().zip(&path.values).map(|(t, v)| spectral::propagate(v, model, -t)).collect::<Result<_>>()?;
    p_variation_norm(&SampledPath { times: path.times.clone(), values: back }, p)
}

/// `sum_k 1_{[b_k, b_{k+1})}(t) f_k` in the flow-adapted frame; zero outside `[b_0, b_K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPath {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<GridField>,
}

impl StepPath {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<GridField>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptySamples("empty partition".into()));
        }
        if breakpoints.len() != pieces.len() + 1 {
            return Err(Error::InvalidParameter("need one more breakpoint than pieces".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("breakpoints must be strictly increasing".into()));
        }
        if pieces.iter().any(|v| !v.same_layout(&pieces[0])) {
            return Err(Error::InvalidParameter("pieces have different layouts".into()));
        }
        Ok(StepPath { breakpoints, pieces })
    }

    /// Index of the piece active at `t`.
    pub fn piece_at(&self, t: f64) -> Option<usize> {
        if t < self.breakpoints[0] || t >= *self.breakpoints.last().unwrap() {
            return None;
        }
        Some(self.breakpoints.partition_point(|b| *b <= t) - 1)
    }

    /// `(sum ||f_k||^p)^{1/p}`.
    pub fn lp_size(&self, p: f64) -> f64 {
        self.pieces.iter().map(|f| f.l2_norm().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    /// Flow-adapted `V^p` norm: the sequence `0, f_1, ..., f_K, 0` of values.
    pub fn vp_norm(&self, p: f64) -> Result<VariationNorm> {
        let zero = GridField { samples: vec![C::new(0.0, 0.0); self.pieces[0].len()], ..self.pieces[0].clone() };
        let mut values = vec![zero.clone()];
        values.extend(self.pieces.iter().cloned());
        values.push(zero);
        let mut times = vec![self.breakpoints[0] - 1.0];
        times.extend(self.breakpoints.iter().cloned());
        p_variation_norm(&SampledPath::new(times, values)?, p)
    }

    /// Physical field `e^{it Phi} f_k` on `t0 + j dt`.
    pub fn evolve(&self, model: &PhaseModel, t0: f64, dt: f64, count: usize) -> Result<SpaceTimeField> {
        let runs: Vec<SpaceTimeField> =
            self.pieces.iter().map(|f| spectral::propagate_series(f, model, t0, dt, count)).collect::<Result<_>>()?;
        let n = self.pieces[0].len();
        let mut out = runs[0].clone();
        for j in 0..count {
            let slot = &mut out.samples[j * n..(j + 1) * n];
            match self.piece_at(t0 + dt * j as f64) {
                Some(k) => slot.copy_from_slice(&runs[k].samples[j * n..(j + 1) * n]),
                None => slot.iter_mut().for_each(|v| *v = C::new(0.0, 0.0)),
            }
        }
        Ok(out)
    }

    /// Samples of the physical path at the given times.
    pub fn sample(&self, model: &PhaseModel, times: &[f64]) -> Result<SampledPath> {
        let zero = GridField { samples: vec![C::new(0.0, 0.0); self.pieces[0].len()], ..self.pieces[0].clone() };
        let values = times
            .iter()
            .map(|&t| match self.piece_at(t) {
                Some(k) => spectral::propagate(&self.pieces[k], model, t),
                None => Ok(zero.clone()),
            })
            .collect::<Result<_>>()?;
        SampledPath::new(times.to_vec(), values)
    }
}

/// Normalized atom `sum 1_J f_J / c` with `c = (sum ||f_J||^p)^{1/p}`; returns `(atom, c)`.
pub fn build_atom(breakpoints: &[f64], data: &[GridField], p: f64) -> Result<(StepPath, f64)> {
    if data.is_empty() {
        return Err(Error::EmptySamples("empty partition".into()));
    }
    let raw = StepPath::new(breakpoints.to_vec(), data.to_vec())?;
    let c = raw.lp_size(p);
    if c == 0.0 {
        return Err(Error::ZeroDenominator("atom data vanish".into()));
    }
    let pieces = data
        .iter()
        .map(|f| GridField { samples: f.samples.iter().map(|a| a / c).collect(), ..f.clone() })
        .collect();
    Ok((StepPath { breakpoints: breakpoints.to_vec(), pieces }, c))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transference {
    /// `||uv||_{L^p} / (||f||_{l^p L^2} ||g||_{l^p L^2})`.
    pub ratio: f64,
    /// `(sum_{J,J'} ||e f_J e g_J'||_p^p)^{1/p}` over the same denominator.
    pub aggregate: f64,
    /// Largest per-pair constant `||e f_J e g_J'||_p / (||f_J|| ||g_J'||)`.
    pub max_pair_constant: f64,
}

/// The intro's atomic bilinear computation on a time grid covering both atoms.
pub fn atom_transference_ratio(
    u: &StepPath,
    v: &StepPath,
    models: (&PhaseModel, &PhaseModel),
    p: f64,
    grid: TimeGrid,
) -> Result<Transference> {
    let den = u.lp_size(p) * v.lp_size(p);
    if den == 0.0 {
        return Err(Error::ZeroDenominator("atom data vanish".into()));
    }
    let fu = u.evolve(models.0, grid.t0, grid.dt, grid.count)?;
    let fv = v.evolve(models.1, grid.t0, grid.dt, grid.count)?;
    let ratio = spectral::spacetime_norm(&fu.product(&fv)?, p, p)? / den;
    let free_u: Vec<SpaceTimeField> = u
        .pieces
        .iter()
        .map(|f| spectral::propagate_series(f, models.0, grid.t0, grid.dt, grid.count))
        .collect::<Result<_>>()?;
    let free_v: Vec<SpaceTimeField> = v
        .pieces
        .iter()
        .map(|g| spectral::propagate_series(g, models.1, grid.t0, grid.dt, grid.count))
        .collect::<Result<_>>()?;
    let mut agg = 0.0;
    let mut max_pair: f64 = 0.0;
    for (a, f) in free_u.iter().zip(&u.pieces) {
        for (b, g) in free_v.iter().zip(&v.pieces) {
            let nrm = spectral::spacetime_norm(&a.product(b)?, p, p)?;
            agg += nrm.powf(p);
            let d = f.l2_norm() * g.l2_norm();
            if d > 0.0 {
                max_pair = max_pair.max(nrm / d);
            }
        }
    }
    Ok(Transference { ratio, aggregate: agg.powf(1.0 / p) / den, max_pair_constant: max_pair })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighModulation {
    /// `||C_d (w u)||_{L^q_t L^2_x} d^{1/q} / ||u||_{V^2}`.
    pub ratio: f64,
    /// `||w u||_{L^2_{t,x}} / ||u||_{L^2_{t,x}}` for the Hann window `w`.
    pub window_loss: f64,
    pub v2_norm: f64,
}

/// Resolvable modulation band `[4 dtau, (tau_max - max <xi>) / 2]` of a time grid.
pub fn modulation_band(grid: TimeGrid, layout: &GridField, mass: f64) -> (f64, f64) {
    let dtau = 2.0 * std::f64::consts::PI / (grid.dt * grid.count as f64);
    let kmax = std::f64::consts::PI * layout.points as f64 / layout.box_length * (layout.dim as f64).sqrt();
    let tau_max = std::f64::consts::PI / grid.dt;
    (4.0 * dtau, (tau_max - bracket(&[kmax], mass)) / 2.0)
}

/// High-modulation bound for an atom of the `e^{-i sign t <nabla>_m}` flow.
pub fn high_modulation_ratio(u: &StepPath, mass: f64, sign: f64, d: f64, q: f64, grid: TimeGrid) -> Result<HighModulation> {
    let (lo, hi) = modulation_band(grid, &u.pieces[0], mass);
    if !(d >= lo && d <= hi) {
        return Err(Error::OutsideBand { d, lo, hi });
    }
    let model = PhaseModel::klein_gordon(mass).with_sign(-sign);
    let field = u.evolve(&model, grid.t0, grid.dt, grid.count)?;
    let cut = spectral::apply_spacetime(&field, &MultiplierSpec::Modulation { d, sign, mass })?;
    let v2 = u.vp_norm(2.0)?.norm;
    if v2 == 0.0 {
        return Err(Error::ZeroDenominator("atom has zero V^2 norm".into()));
    }
    let num = spectral::spacetime_norm(&cut, q, 2.0)?;
    let w = spectral::windowed(&field);
    let window_loss = spectral::spacetime_norm(&w, 2.0, 2.0)? / spectral::spacetime_norm(&field, 2.0, 2.0)?.max(1e-300);
    let weight = if q.is_infinite() { 1.0 } else { d.powf(1.0 / q) };
    Ok(HighModulation { ratio: num * weight / v2, window_loss, v2_norm: v2 })
}
