//! Sampled checks of the transversality, curvature and regularity conditions.

use super::model::PhaseModel;
use super::region::{dist, FreqRegion};
use crate::error::{Error, Result};
use crate::util::rng::rng;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Space-time shift `(a, h)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    pub a: f64,
    pub h: Vec<f64>,
}

impl Shift {
    pub fn new(a: f64, h: &[f64]) -> Self {
        Shift { a, h: h.to_vec() }
    }

    /// The shift describing the same surface seen from the second phase.
    pub fn reversed(&self) -> Self {
        Shift { a: -self.a, h: self.h.iter().map(|x| -x).collect() }
    }
}

/// Pair separation below this is skipped in curvature quotients.
pub const PAIR_TOL: f64 = 1e-4;
/// Default residual tolerance for points of the resonance surface.
pub const SIGMA_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value: f64,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `F(xi) = Phi_1(xi) - Phi_2(xi - h) - a`.
pub fn sigma_residual(m1: &PhaseModel, m2: &PhaseModel, s: &Shift, xi: &[f64]) -> f64 {
    m1.value(xi) - m2.value(&sub(xi, &s.h)) - s.a
}

fn sigma_gradient(m1: &PhaseModel, m2: &PhaseModel, s: &Shift, xi: &[f64]) -> Result<Vec<f64>> {
    let g1 = m1.gradient(xi)?;
    let g2 = m2.gradient(&sub(xi, &s.h))?;
    Ok(sub(&g1, &g2))
}

/// Minimum of `|grad Phi_1(xi) - grad Phi_2(eta)|` over sampled pairs, with the minimizing pair.
pub fn transversality_witness(
    m1: &PhaseModel,
    m2: &PhaseModel,
    r1: &FreqRegion,
    r2: &FreqRegion,
    n_samples: usize,
    seed: u64,
) -> Result<Witness> {
    let s1 = r1.sample(n_samples, seed)?;
    let s2 = r2.sample(n_samples, seed)?;
    let g1: Vec<Vec<f64>> = s1.iter().map(|x| m1.gradient(x)).collect::<Result<_>>()?;
    let g2: Vec<Vec<f64>> = s2.iter().map(|x| m2.gradient(x)).collect::<Result<_>>()?;
    let best = (0..s1.len())
        .into_par_iter()
        .map(|i| {
            let mut b = (f64::INFINITY, 0usize);
            for (j, gj) in g2.iter().enumerate() {
                let d = dist(&g1[i], gj);
                if d < b.0 {
                    b = (d, j);
                }
            }
            (b.0, i, b.1)
        })
        .reduce(|| (f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
    Ok(Witness { value: best.0, xi: s1[best.1].clone(), eta: s2[best.2].clone() })
}

pub fn transversality_margin(
    m1: &PhaseModel,
    m2: &PhaseModel,
    r1: &FreqRegion,
    r2: &FreqRegion,
    n_samples: usize,
) -> Result<f64> {
    Ok(transversality_witness(m1, m2, r1, r2, n_samples, 0)?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaSolution {
    pub xi: Vec<f64>,
    pub residual: f64,
    pub steps: usize,
    /// Path length travelled from the starting point.
    pub travel: f64,
}

/// Projects `xi0` onto `{F = 0}` by Newton steps along the normalized gradient direction of `F`.
pub fn sigma_solve(m1: &PhaseModel, m2: &PhaseModel, s: &Shift, xi0: &[f64], tol: f64) -> Result<SigmaSolution> {
    const MAX_STEPS: usize = 200;
    let mut xi = xi0.to_vec();
    let mut f = sigma_residual(m1, m2, s, &xi);
    let mut travel = 0.0;
    let max_step = 0.25 * (1.0 + norm(xi0));
    for step in 0..=MAX_STEPS {
        if f.abs() <= tol {
            return Ok(SigmaSolution { xi, residual: f, steps: step, travel });
        }
        if step == MAX_STEPS {
            break;
        }
        let g = sigma_gradient(m1, m2, s, &xi)?;
        let g2 = dot(&g, &g);
        if g2 == 0.0 {
            break;
        }
        let mut len = f.abs() / g2.sqrt();
        if len > max_step {
            len = max_step;
        }
        let dir = f.signum() / g2.sqrt();
        xi.iter_mut().zip(&g).for_each(|(x, gi)| *x -= len * dir * gi);
        travel += len;
        f = sigma_residual(m1, m2, s, &xi);
    }
    Err(Error::NonConvergence { steps: MAX_STEPS, residual: f })
}

/// Points of `Sigma_1(h)` inside `r1` with `xi - h` inside `r2`, obtained by projecting samples.
pub fn sigma_points(
    m1: &PhaseModel,
    m2: &PhaseModel,
    r1: &FreqRegion,
    r2: &FreqRegion,
    s: &Shift,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let starts = r1.sample(n_samples, seed)?;
    Ok(starts
        .par_iter()
        .filter_map(|x| sigma_solve(m1, m2, s, x, SIGMA_TOL).ok())
        .map(|sol| sol.xi)
        .filter(|x| {
            r1.contains(x) && r2.contains(&sub(x, &s.h)) && sigma_residual(m1, m2, s, x).abs() <= 10.0 * SIGMA_TOL
        })
        .collect())
}

/// Minimum curvature quotient over pairs of the given points; pairs closer than [`PAIR_TOL`] are skipped.
pub fn curvature_quotient_min(model: &PhaseModel, points: &[Vec<f64>]) -> Result<Witness> {
    let grads: Vec<Vec<f64>> = points.iter().map(|x| model.gradient(x)).collect::<Result<_>>()?;
    let best = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut b = (f64::INFINITY, i, i);
            for j in i + 1..points.len() {
                let d = sub(&points[i], &points[j]);
                let dd = dot(&d, &d);
                if dd.sqrt() < PAIR_TOL {
                    continue;
                }
                let q = dot(&sub(&grads[i], &grads[j]), &d).abs() / dd;
                if q < b.0 {
                    b = (q, i, j);
                }
            }
            b
        })
        .reduce(|| (f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a });
    if !best.0.is_finite() {
        return Err(Error::NoAdmissiblePairs);
    }
    Ok(Witness { value: best.0, xi: points[best.1].clone(), eta: points[best.2].clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureMargin {
    /// `+inf` when the sampled surface is empty.
    pub value: f64,
    pub empty_surface: bool,
    pub surface_points: usize,
    pub witness: Option<Witness>,
}

/// Curvature quotient of `Phi_1` on the sampled surface `Sigma_1(h)`.
pub fn curvature_margin_on_sigma(
    m1: &PhaseModel,
    m2: &PhaseModel,
    r1: &FreqRegion,
    r2: &FreqRegion,
    s: &Shift,
    n_samples: usize,
) -> Result<CurvatureMargin> {
    curvature_margin_seeded(m1, m2, r1, r2, s, n_samples, 0)
}

pub fn curvature_margin_seeded(
    m1: &PhaseModel,
    m2: &PhaseModel,
    r1: &FreqRegion,
    r2: &FreqRegion,
    s: &Shift,
    n_samples: usize,
    seed: u64,
) -> Result<CurvatureMargin> {
    let pts = sigma_points(m1, m2, r1, r2, s, n_samples, seed)?;
    if pts.is_empty() {
        return Ok(CurvatureMargin { value: f64::INFINITY, empty_surface: true, surface_points: 0, witness: None });
    }
    let w = curvature_quotient_min(m1, &pts)?;
    Ok(CurvatureMargin { value: w.value, empty_surface: false, surface_points: pts.len(), witness: Some(w) })
}

/// `|u ^ v|` via the Gram determinant.
pub fn wedge_norm(u: &[f64], v: &[f64]) -> f64 {
    (dot(u, u) * dot(v, v) - dot(u, v).powi(2)).max(0.0).sqrt()
}

/// Minimum of `|(p - q) ^ (1, -grad Phi_j(eta))| / |p - q|` over sampled cone points of
/// `C_k(h) = {(r, -r grad Phi_k(xi)) : xi in Sigma_k(h)}` and `eta` in `rj`.
pub fn cone_transversality_margin(
    mj: &PhaseModel,
    mk: &PhaseModel,
    rj: &FreqRegion,
    rk: &FreqRegion,
    s: &Shift,
    n_samples: usize,
) -> Result<f64> {
    let pts = sigma_points(mk, mj, rk, rj, s, n_samples, 11)?;
    let mut r = rng(17, 0);
    let cone: Vec<Vec<f64>> = pts
        .iter()
        .map(|xi| {
            let rad = 0.5 + 1.5 * r.gen::<f64>();
            let g = mk.gradient(xi)?;
            let mut p = vec![rad];
            p.extend(g.iter().map(|x| -rad * x));
            Ok(p)
        })
        .collect::<Result<_>>()?;
    if cone.len() < 2 {
        return Err(Error::EmptySamples("fewer than 2 distinct cone points".into()));
    }
    let etas = rj.sample(n_samples, 5)?;
    let normals: Vec<Vec<f64>> = etas
        .iter()
        .map(|e| {
            let g = mj.gradient(e)?;
            let mut v = vec![1.0];
            v.extend(g.iter().map(|x| -x));
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let best = (0..cone.len())
        .into_par_iter()
        .map(|i| {
            let mut b = f64::INFINITY;
            for j in i + 1..cone.len() {
                let d = sub(&cone[i], &cone[j]);
                let nd = norm(&d);
                if nd < PAIR_TOL {
                    continue;
                }
                for w in &normals {
                    b = b.min(wedge_norm(&d, w) / nd);
                }
            }
            b
        })
        .reduce(|| f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::EmptySamples("fewer than 2 distinct cone points".into()));
    }
    Ok(best)
}

/// Outcome of the sampled Assumption check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub a1_margin: f64,
    pub a2_margin: f64,
    pub d2_bound: f64,
    pub hessian_sup: f64,
    pub gradient_sup: f64,
    pub diam_sum: f64,
    pub diam_threshold: f64,
    pub diam_condition_ok: bool,
    pub d1_estimate: f64,
    pub n_der: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub surface_points: usize,
    pub a1_witness: Option<Witness>,
    pub a2_witness: Option<Witness>,
    pub assumption_ok: bool,
    pub failures: Vec<String>,
}

fn spectral_norm_sym(h: &nalgebra::DMatrix<f64>) -> f64 {
    h.clone().symmetric_eigenvalues().iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Transversality, curvature on each shifted surface, derivative bounds and the diameter condition.
#[allow(clippy::too_many_arguments)]
pub fn assumption_report(
    m1: &PhaseModel,
    m2: &PhaseModel,
    r1: &FreqRegion,
    r2: &FreqRegion,
    n_der: usize,
    shifts: &[Shift],
    n_samples: usize,
    seed: u64,
) -> Result<GeometryReport> {
    if n_der < 2 {
        return Err(Error::InvalidParameter("n_der must be at least 2".into()));
    }
    let mut failures = vec![];
    let a1 = match transversality_witness(m1, m2, r1, r2, n_samples, seed) {
        Ok(w) => Some(w),
        Err(e) => {
            failures.push(format!("transversality: {e}"));
            None
        }
    };
    let mut a2 = f64::INFINITY;
    let mut a2_w = None;
    let mut surface_points = 0;
    for (k, s) in shifts.iter().enumerate() {
        let sd = seed.wrapping_add(1 + k as u64);
        for (ma, mb, ra, rb, sh) in [(m1, m2, r1, r2, s.clone()), (m2, m1, r2, r1, s.reversed())] {
            match curvature_margin_seeded(ma, mb, ra, rb, &sh, n_samples, sd) {
                Ok(c) => {
                    surface_points += c.surface_points;
                    if c.value < a2 {
                        a2 = c.value;
                        a2_w = c.witness;
                    }
                }
                Err(e) => failures.push(format!("curvature (shift {k}): {e}")),
            }
        }
    }
    if surface_points == 0 {
        failures.push("curvature: no sampled surface points".into());
    }
    let mut d2: f64 = 0.0;
    let mut hess: [f64; 2] = [0.0; 2];
    let mut grad_sup: f64 = 0.0;
    for (idx, (m, r)) in [(m1, r1), (m2, r2)].into_iter().enumerate() {
        match r.sample(n_samples, seed) {
            Ok(pts) => {
                for p in &pts {
                    match (m.derivative_sup(p, n_der), m.hessian(p), m.gradient(p)) {
                        (Ok(d), Ok(h), Ok(g)) => {
                            d2 = d2.max(d);
                            hess[idx] = hess[idx].max(spectral_norm_sym(&h));
                            if idx == 1 {
                                grad_sup = grad_sup.max(norm(&g));
                            }
                        }
                        _ => {
                            failures.push("derivatives: singular sample".into());
                            break;
                        }
                    }
                }
            }
            Err(e) => failures.push(format!("derivatives: {e}")),
        }
    }
    let a1v = a1.as_ref().map(|w| w.value).unwrap_or(0.0);
    let a2v = if a2.is_finite() { a2 } else { 0.0 };
    let diam_sum = r1.diameter() + r2.diameter();
    let threshold = a1v * a2v / (2.0 * (hess[0] + hess[1]).powi(2));
    let diam_ok = diam_sum <= threshold;
    let d1 = 0.5 * a1v * a2v;
    if a1v <= 0.0 {
        failures.push("transversality margin is zero".into());
    }
    if a2v <= 0.0 {
        failures.push("curvature margin is zero".into());
    }
    Ok(GeometryReport {
        a1_margin: a1v,
        a2_margin: a2v,
        d2_bound: d2,
        hessian_sup: hess[0].max(hess[1]),
        gradient_sup: grad_sup,
        diam_sum,
        diam_threshold: threshold,
        diam_condition_ok: diam_ok,
        d1_estimate: d1,
        n_der,
        n_samples,
        seed,
        surface_points,
        a1_witness: a1,
        a2_witness: a2_w,
        assumption_ok: failures.is_empty() && d1 > 0.0,
        failures,
    })
}

/// Shifts `(Phi_1(xi) - Phi_2(eta), xi - eta)` for sampled `xi in r1`, `eta in r2`; each surface is nonempty.
pub fn sampled_shifts(
    m1: &PhaseModel,
    m2: &PhaseModel,
    r1: &FreqRegion,
    r2: &FreqRegion,
    count: usize,
    seed: u64,
) -> Result<Vec<Shift>> {
    let a = r1.sample(count, seed.wrapping_add(101))?;
    let b = r2.sample(count, seed.wrapping_add(202))?;
    let mut r = rng(seed, 3);
    Ok((0..count)
        .map(|i| {
            let j = r.gen_range(0..count);
            let (xi, eta) = (&a[i], &b[j]);
            Shift { a: m1.value(xi) - m2.value(eta), h: sub(xi, eta) }
        })
        .collect())
}
