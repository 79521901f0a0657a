//! Scaling sweeps over dyadic `(alpha, lambda)` grids.
//!
//! The small-scale laws are measured in the rescaled frame, where the data templates are
//! fixed and only the phases depend on `(alpha, lambda)`. The original-frame constant is
//! recovered through the exact change of variables `xi = D eta`, `t = s / (alpha^2 lambda)`:
//! with `J = det D`,
//! `||uv||_{L^a_t L^b_x} = J^{2 - 1/b} (alpha^2 lambda)^{-1/a} ||u~ v~||` and `||f|| = J^{1/2} ||f~||`.
//! [`frame_check`] evaluates one point directly in the original frame as a second route.

use super::{product_norm, Wave};
use crate::error::{Error, Result};
use crate::phases::{assumption_report, sampled_shifts, FreqRegion, PhaseModel, Rescale};
use crate::spectral::GridField;
use crate::util::bump::phi;
use crate::util::fit::plane_fit;
use crate::variation::TimeGrid;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum SweepLaw {
    /// Unscaled phases; `alpha` scales the data amplitude and `lambda` is the time half-window.
    Global { p: f64 },
    /// As `Global` with the mixed norm `L^a_t L^b_x`.
    Mixed { a: f64, b: f64 },
    /// Angular separation `alpha` at frequency `lambda`.
    Angular { p: f64 },
    /// Radial separation `alpha lambda^2` with angular width below `alpha`.
    Radial { p: f64 },
}

impl SweepLaw {
    /// Time and space exponents `(a, b)`.
    pub fn exponents(&self) -> (f64, f64) {
        match *self {
            SweepLaw::Global { p } | SweepLaw::Angular { p } | SweepLaw::Radial { p } => (p, p),
            SweepLaw::Mixed { a, b } => (a, b),
        }
    }

    /// Predicted slopes of the constant in `(log alpha, log lambda)`.
    pub fn predicted_slopes(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        match *self {
            SweepLaw::Global { .. } | SweepLaw::Mixed { .. } => (0.0, 0.0),
            SweepLaw::Angular { p } => (nf - 1.0 - (nf + 1.0) / p, nf - (nf + 1.0) / p),
            SweepLaw::Radial { p } => (nf - (nf + 2.0) / p, nf + 1.0 - (nf + 2.0) / p),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepLaw::Global { .. } => "global",
            SweepLaw::Mixed { .. } => "mixed",
            SweepLaw::Angular { .. } => "angular",
            SweepLaw::Radial { .. } => "radial",
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let (a, b) = self.exponents();
        let ok = match self {
            SweepLaw::Mixed { .. } => super::admissible_mixed_exponents(a, b, n, super::ExponentMode::Bilinear),
            _ => a > (n as f64 + 3.0) / (n as f64 + 1.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("exponents ({a}, {b}) are not admissible for {}", self.name())))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    /// `phi(|k| / r)` around each centre.
    Smooth,
    /// Indicator of the cube `|k_i| <= r`.
    Indicator,
}

impl Template {
    fn eval(&self, k: &[f64], r: f64) -> f64 {
        match self {
            Template::Smooth => phi(k.iter().map(|x| x * x).sum::<f64>().sqrt() / r),
            Template::Indicator => {
                if k.iter().all(|x| x.abs() <= r) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Grid of the rescaled frame; the time grid is symmetric, `2 round(half_window/dt) + 1` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub points: usize,
    pub box_length: f64,
    pub half_window: f64,
    pub dt: f64,
}

impl Resolution {
    pub(crate) fn time_grid(&self, half_window: f64, scale: f64) -> TimeGrid {
        let h = (half_window / self.dt).round() as usize;
        let dt = self.dt / scale;
        TimeGrid { t0: -(h as f64) * dt, dt, count: 2 * h + 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub law: SweepLaw,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub template: Template,
    /// Template radius in rescaled frequency units.
    pub radius: f64,
    pub masses: [f64; 2],
    /// `+1` or `-1` for each factor.
    pub signs: [f64; 2],
    pub resolution: Resolution,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_tolerance() -> f64 {
    0.15
}

fn default_dim() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub lambda: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub norm_uv: f64,
    pub norm_u: f64,
    pub norm_v: f64,
    pub ratio: f64,
    /// Ratio in the rescaled frame, before the change-of-variables factor.
    pub rescaled_ratio: f64,
    pub valid: bool,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub law: SweepLaw,
    pub points: Vec<SweepPoint>,
    pub slope_alpha: f64,
    pub slope_lambda: f64,
    pub residual: f64,
    pub predicted_alpha: f64,
    pub predicted_lambda: f64,
    pub tolerance: f64,
    pub pass_alpha: bool,
    pub pass_lambda: bool,
}

impl SweepResult {
    pub fn passed(&self) -> bool {
        self.pass_alpha && self.pass_lambda
    }
}

/// Phases, centres, and frame factors at one sweep point.
struct Setup {
    models: [PhaseModel; 2],
    originals: [PhaseModel; 2],
    offsets: [Vec<f64>; 2],
    /// Diagonal of `D`.
    stretch: Vec<f64>,
    time_scale: f64,
    amplitude: f64,
    half_window: f64,
}

fn unit(n: usize, i: usize, s: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = s;
    v
}

fn setup(spec: &SweepSpec, alpha: f64, lambda: f64) -> Result<Setup> {
    let n = spec.dim;
    let [m1, m2] = spec.masses;
    let [s1, s2] = spec.signs;
    let base = [PhaseModel::klein_gordon(m1).with_sign(s1), PhaseModel::klein_gordon(m2).with_sign(s2)];
    let mut second = unit(n, 0, s2);
    second[1] = 1.0;
    let res = spec.resolution;
    match spec.law {
        SweepLaw::Global { .. } | SweepLaw::Mixed { .. } => Ok(Setup {
            models: base,
            originals: base,
            offsets: [unit(n, 0, 1.0), second],
            stretch: vec![1.0; n],
            time_scale: 1.0,
            amplitude: alpha,
            half_window: lambda,
        }),
        SweepLaw::Angular { .. } => {
            if !(alpha <= 1.0 && alpha * lambda >= m1 + m2) {
                return Err(Error::Regime(format!("need (m1+m2)/lambda <= alpha <= 1, got alpha = {alpha}, lambda = {lambda}")));
            }
            let r = Rescale::CapI { alpha, lambda };
            let mut stretch = vec![alpha * lambda; n];
            stretch[0] = lambda;
            Ok(Setup {
                models: [base[0].with_rescale(r), base[1].with_rescale(r)],
                originals: base,
                offsets: [unit(n, 0, 1.0), second],
                stretch,
                time_scale: alpha * alpha * lambda,
                amplitude: 1.0,
                half_window: res.half_window,
            })
        }
        SweepLaw::Radial { .. } => {
            if !(m2 > 0.0) {
                return Err(Error::Regime("radial separation needs m2 > 0".into()));
            }
            if !(alpha * lambda <= (m1 + m2) / 8.0) {
                return Err(Error::Regime(format!("need alpha lambda <= (m1+m2)/8, got {}", alpha * lambda)));
            }
            let c1 = lambda;
            let c2 = (m1 * c1 + alpha * lambda * lambda) / m2;
            let r = Rescale::SlabII { alpha, lambda, c1, m1 };
            let a1 = alpha * lambda * lambda;
            let mut stretch = vec![alpha * lambda; n];
            stretch[0] = a1;
            Ok(Setup {
                models: [base[0].with_rescale(r), base[1].with_rescale(r)],
                originals: base,
                offsets: [unit(n, 0, c1 / a1), unit(n, 0, s2 * c2 / a1)],
                stretch,
                time_scale: alpha * alpha * lambda,
                amplitude: 1.0,
                half_window: res.half_window,
            })
        }
    }
}

fn template_field(spec: &SweepSpec, stretch: &[f64], box_length: f64, points: usize, amp: f64) -> Result<GridField> {
    let (t, r) = (spec.template, spec.radius);
    GridField::from_fourier_fn(spec.dim, box_length, points, |k| {
        let eta: Vec<f64> = k.iter().zip(stretch).map(|(a, s)| a / s).collect();
        C::new(amp * t.eval(&eta, r), 0.0)
    })
}

fn geometry_ok(spec: &SweepSpec, s: &Setup) -> Result<bool> {
    let regions = [FreqRegion::ball(&s.offsets[0], spec.radius), FreqRegion::ball(&s.offsets[1], spec.radius)];
    let shifts = sampled_shifts(&s.models[0], &s.models[1], &regions[0], &regions[1], 3, spec.seed)?;
    let rep = assumption_report(&s.models[0], &s.models[1], &regions[0], &regions[1], 3, &shifts, 48, spec.seed)?;
    Ok(rep.assumption_ok)
}

fn frame_factors(s: &Setup, a: f64, b: f64) -> (f64, f64) {
    let jac: f64 = s.stretch.iter().product();
    let uv = jac.powf(2.0 - 1.0 / b) * s.time_scale.powf(-1.0 / a);
    (uv, jac.sqrt())
}

fn evaluate(spec: &SweepSpec, alpha: f64, lambda: f64) -> SweepPoint {
    let (a, b) = spec.law.exponents();
    let mut pt = SweepPoint {
        alpha,
        lambda,
        p: if a == b { a } else { f64::NAN },
        a,
        b,
        norm_uv: f64::NAN,
        norm_u: f64::NAN,
        norm_v: f64::NAN,
        ratio: f64::NAN,
        rescaled_ratio: f64::NAN,
        valid: false,
        flags: vec![],
    };
    let s = match setup(spec, alpha, lambda) {
        Ok(s) => s,
        Err(e) => {
            pt.flags.push(e.to_string());
            return pt;
        }
    };
    match geometry_ok(spec, &s) {
        Ok(true) => {}
        Ok(false) => pt.flags.push("assumption check failed".into()),
        Err(e) => pt.flags.push(format!("assumption check: {e}")),
    }
    let res = spec.resolution;
    let ones = vec![1.0; spec.dim];
    let run = || -> Result<(f64, f64, f64)> {
        let f = template_field(spec, &ones, res.box_length, res.points, s.amplitude)?;
        let u = Wave::new(&f, &s.models[0], &s.offsets[0])?;
        let v = Wave::new(&f, &s.models[1], &s.offsets[1])?;
        let grid = res.time_grid(s.half_window, 1.0);
        let nuv = product_norm(&u, &v, &f, a, b, grid)?;
        Ok((nuv, f.l2_norm(), f.l2_norm()))
    };
    match run() {
        Ok((nuv, nu, nv)) => {
            let (fuv, fu) = frame_factors(&s, a, b);
            pt.norm_uv = nuv * fuv;
            pt.norm_u = nu * fu;
            pt.norm_v = nv * fu;
            pt.rescaled_ratio = nuv / (nu * nv);
            pt.ratio = pt.norm_uv / (pt.norm_u * pt.norm_v);
            pt.valid = pt.flags.is_empty() && pt.ratio.is_finite();
        }
        Err(e) => pt.flags.push(e.to_string()),
    }
    pt
}

/// Every `(alpha, lambda)` point, evaluated concurrently, in row-major order of the two axes.
pub fn sweep_points(spec: &SweepSpec) -> Vec<SweepPoint> {
    let coords: Vec<(f64, f64)> = spec.alphas.iter().flat_map(|a| spec.lambdas.iter().map(move |l| (*a, *l))).collect();
    coords.par_iter().map(|&(a, l)| evaluate(spec, a, l)).collect()
}

/// Measures every `(alpha, lambda)` point concurrently and fits the plane
/// `log ratio = s_a log alpha + s_l log lambda + c` over the valid ones.
pub fn exponent_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.law.validate(spec.dim)?;
    if spec.signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
        return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
    }
    if !(2..=3).contains(&spec.dim) {
        return Err(Error::InvalidParameter("sweeps need dimension 2 or 3".into()));
    }
    if spec.alphas.iter().chain(&spec.lambdas).any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidParameter("alpha and lambda must be positive".into()));
    }
    let points = sweep_points(spec);
    let valid: Vec<&SweepPoint> = points.iter().filter(|p| p.valid).collect();
    let distinct = |f: fn(&SweepPoint) -> f64| {
        let mut v: Vec<f64> = valid.iter().map(|p| f(p)).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        v.len()
    };
    if distinct(|p| p.alpha) < 4 || distinct(|p| p.lambda) < 4 {
        return Err(Error::TooFewPoints { needed: 4, what: "dyadic points".into() });
    }
    let la: Vec<f64> = valid.iter().map(|p| p.alpha.ln()).collect();
    let ll: Vec<f64> = valid.iter().map(|p| p.lambda.ln()).collect();
    let lr: Vec<f64> = valid.iter().map(|p| p.ratio.ln()).collect();
    let fit = plane_fit(&la, &ll, &lr)?;
    let (pa, pl) = spec.law.predicted_slopes(spec.dim);
    Ok(SweepResult {
        law: spec.law,
        slope_alpha: fit.slope_a,
        slope_lambda: fit.slope_b,
        residual: fit.residual,
        predicted_alpha: pa,
        predicted_lambda: pl,
        tolerance: spec.tolerance,
        pass_alpha: (fit.slope_a - pa).abs() <= spec.tolerance,
        pass_lambda: (fit.slope_b - pl).abs() <= spec.tolerance,
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameCheck {
    /// Constant from the rescaled frame times the change-of-variables factor.
    pub rescaled_route: f64,
    /// Constant from the unscaled phases on a grid `D` times finer in frequency.
    pub original_route: f64,
    pub relative_difference: f64,
}

/// Both routes to the original-frame constant at one small-scale point.
pub fn frame_check(spec: &SweepSpec, alpha: f64, lambda: f64) -> Result<FrameCheck> {
    if matches!(spec.law, SweepLaw::Global { .. } | SweepLaw::Mixed { .. }) {
        return Err(Error::InvalidParameter("frame check applies to the small-scale laws".into()));
    }
    let pt = evaluate(spec, alpha, lambda);
    if !pt.ratio.is_finite() {
        return Err(Error::InvalidParameter(format!("rescaled route failed: {:?}", pt.flags)));
    }
    let s = setup(spec, alpha, lambda)?;
    let (a, b) = spec.law.exponents();
    let res = spec.resolution;
    let cross = s.stretch[1];
    let box_o = res.box_length / cross;
    let points_o = ((res.points as f64) * s.stretch[0] / cross).ceil() as usize;
    let points_o = points_o.next_power_of_two().max(res.points);
    let f = template_field(spec, &s.stretch, box_o, points_o, 1.0)?;
    let off = |o: &[f64]| -> Vec<f64> { o.iter().zip(&s.stretch).map(|(x, d)| x * d).collect() };
    let u = Wave::new(&f, &s.originals[0], &off(&s.offsets[0]))?;
    let v = Wave::new(&f, &s.originals[1], &off(&s.offsets[1]))?;
    let grid = res.time_grid(s.half_window, s.time_scale);
    let nrm = product_norm(&u, &v, &f, a, b, grid)?;
    let original = nrm / (f.l2_norm() * f.l2_norm());
    Ok(FrameCheck {
        rescaled_route: pt.ratio,
        original_route: original,
        relative_difference: (pt.ratio - original).abs() / original,
    })
}

/// Writes the per-point table with columns `alpha, lambda, p, a, b, norm_uv, norm_u, norm_v, ratio`.
pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alpha", "lambda", "p", "a", "b", "norm_uv", "norm_u", "norm_v", "ratio"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for p in &result.points {
        let row = [p.alpha, p.lambda, p.p, p.a, p.b, p.norm_uv, p.norm_u, p.norm_v, p.ratio];
        w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    crate::util::write_atomic(path, &bytes)
}
