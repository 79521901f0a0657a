//! Localisation windows and wave packets on the periodic grid.
//!
//! The spatial window `eta` has `eta^(zeta) = phi(|zeta|)` supported in the unit ball, so on a
//! box with `L = M R^{1/2}` its periodic translates over the lattice sum to one exactly
//! (only the zero mode survives the lattice sum). The frequency window is the tensor product
//! `rho(z) = prod psi(z_i, w)`, supported in `|z| < 1`.

use super::{PhasePoint, Tube};
use crate::error::{Error, Result};
use crate::phases::{FreqRegion, PhaseModel};
use crate::spectral::{propagate, GridField};
use crate::util::bump::{phi, psi};
use crate::util::fit::loglog_fit;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// `(3 R0)^2` with `R0 = 1`.
pub const MIN_SCALE: f64 = 9.0;
/// Smoothness order `N` in the weight `w_gamma = (1 + |x - x0| / R^{1/2})^{N - 1 + (n+1)/2}`.
pub const WEIGHT_ORDER: f64 = 8.0;
/// Coefficients below this fraction of the peak are treated as outside the data support.
const SUPPORT_CUT: f64 = 1e-14;
/// Leaked mass fractions at rounding level are not reported.
const LEAK_TOL: f64 = 1e-20;

fn overlap(n: usize) -> f64 {
    // Keeps the cube support [-1/2 - w, 1/2 + w]^n inside the unit ball.
    if n <= 2 {
        0.2
    } else {
        0.07
    }
}

fn rho_window(z: &[f64]) -> f64 {
    let w = overlap(z.len());
    z.iter().map(|v| psi(*v, w)).product()
}

fn signed(x: f64, l: f64) -> f64 {
    let y = x.rem_euclid(l);
    if y >= 0.5 * l {
        y - l
    } else {
        y
    }
}

/// Number of lattice cells per axis, `L / R^{1/2}`, which must be an integer.
fn cells(layout: &GridField, r: f64) -> Result<usize> {
    if !(r >= MIN_SCALE) {
        return Err(Error::ScaleTooSmall { r, min: MIN_SCALE });
    }
    let m = layout.box_length / r.sqrt();
    if (m - m.round()).abs() > 1e-9 * m.max(1.0) || m.round() < 1.0 {
        return Err(Error::InvalidParameter(format!("box length / R^(1/2) = {m} is not an integer")));
    }
    Ok(m.round() as usize)
}

fn check_point(f: &GridField, g: &PhasePoint) -> Result<()> {
    if g.dim() != f.dim {
        return Err(Error::InvalidParameter("phase point dimension differs from the field".into()));
    }
    cells(f, g.scale()).map(|_| ())
}

/// Periodized `eta((x - x0) / R^{1/2})` from its Fourier series.
fn eta_field(layout: &GridField, r: f64, x0: &[f64]) -> GridField {
    let n = layout.dim;
    let s = r.sqrt();
    let scale = (layout.points as f64).powi(n as i32) * s.powi(n as i32) / layout.box_length.powi(n as i32);
    GridField::from_fourier_fn(n, layout.box_length, layout.points, |k| {
        let a = phi(s * k.iter().map(|v| v * v).sum::<f64>().sqrt());
        if a == 0.0 {
            return C::new(0.0, 0.0);
        }
        let ph: f64 = -k.iter().zip(x0).map(|(a, b)| a * b).sum::<f64>();
        C::from_polar(scale * a, ph)
    })
    .expect("layout already validated")
}

/// `rho((xi - xi0) R^{1/2}) f`.
fn frequency_filter(f: &GridField, r: f64, xi0: &[f64]) -> GridField {
    let s = r.sqrt();
    f.map_fourier(|k| {
        let z: Vec<f64> = k.iter().zip(xi0).map(|(a, b)| s * (a - b)).collect();
        C::new(rho_window(&z), 0.0)
    })
}

fn periodic_distance(layout: &GridField, i: usize, x0: &[f64]) -> f64 {
    let p = layout.position(i);
    (0..layout.dim).map(|d| signed(p[d] - x0[d], layout.box_length).powi(2)).sum::<f64>().sqrt()
}

/// `w_gamma` at every sample, with the periodic distance to `x0`.
fn weight(layout: &GridField, r: f64, x0: &[f64]) -> Vec<f64> {
    let e = WEIGHT_ORDER - 1.0 + 0.5 * (layout.dim as f64 + 1.0);
    let s = r.sqrt();
    (0..layout.len()).into_par_iter().map(|i| (1.0 + periodic_distance(layout, i, x0) / s).powf(e)).collect()
}

/// `L_gamma f = eta((x - x0) / R^{1/2}) [rho((-i nabla - xi0) / R^{-1/2}) f]`.
pub fn packet_localize(f: &GridField, gamma: &PhasePoint) -> Result<GridField> {
    check_point(f, gamma)?;
    let r = gamma.scale();
    let g = frequency_filter(f, r, &gamma.xi0());
    Ok(multiply(&eta_field(f, r, &gamma.x0()), &g))
}

fn multiply(a: &GridField, b: &GridField) -> GridField {
    let mut out = b.clone();
    out.samples.iter_mut().zip(&a.samples).for_each(|(v, w)| *v *= w);
    out
}

/// One packet: the localised data `L_gamma f` and the phase it is propagated with.
#[derive(Clone, Debug)]
pub struct Packet {
    pub gamma: PhasePoint,
    pub data: GridField,
    pub model: PhaseModel,
}

impl Packet {
    /// `P_gamma u (t) = e^{i t Phi} L_gamma f`.
    pub fn at(&self, t: f64) -> Result<GridField> {
        propagate(&self.data, &self.model, t)
    }

    /// `||w_gamma L_gamma f||_{L^2}`.
    pub fn sharp_norm(&self) -> f64 {
        let w = weight(&self.data, self.gamma.scale(), &self.gamma.x0());
        let s: f64 = self.data.samples.iter().zip(&w).map(|(v, w)| (v * w).norm_sqr()).sum();
        (s * self.data.cell_volume()).sqrt()
    }

    /// Fraction of `||L_gamma f||^2` at frequencies farther than `2 R^{-1/2}` from `xi0`.
    pub fn fourier_leak(&self) -> f64 {
        let c = self.data.fourier();
        let xi0 = self.gamma.xi0();
        let lim = 2.0 / self.gamma.scale().sqrt();
        let (mut out, mut tot) = (0.0, 0.0);
        for (i, v) in c.iter().enumerate() {
            let k = self.data.frequency(i);
            let d = (0..self.data.dim).map(|j| (k[j] - xi0[j]).powi(2)).sum::<f64>().sqrt();
            tot += v.norm_sqr();
            if d > lim {
                out += v.norm_sqr();
            }
        }
        if tot > 0.0 {
            out / tot
        } else {
            0.0
        }
    }
}

/// Lazily evaluated packets of one free wave; the frequency-filtered data are cached per `xi0`.
#[derive(Clone, Debug)]
pub struct PacketDecomposition {
    pub data: GridField,
    pub model: PhaseModel,
    pub scale: f64,
    /// Every lattice point whose packet can be nonzero.
    pub gammas: Vec<PhasePoint>,
    /// Fraction of `||f||^2` outside the declared frequency region.
    pub leaked_mass: f64,
    pub warning: Option<String>,
    filtered: BTreeMap<Vec<i64>, GridField>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub times: Vec<f64>,
    /// `||sum_gamma P_gamma u(t) - e^{it Phi} f|| / ||f||` per time.
    pub errors: Vec<f64>,
    pub max_error: f64,
}

/// Splits `u0` into packets at scale `R`; mass outside `region` is reported, not rejected.
pub fn packet_decompose(u0: &GridField, model: &PhaseModel, r: f64, region: &FreqRegion) -> Result<PacketDecomposition> {
    model.validate()?;
    let m = cells(u0, r)?;
    if region.dim() != u0.dim {
        return Err(Error::InvalidParameter("region dimension differs from the field".into()));
    }
    let n = u0.dim;
    let s = r.sqrt();
    let c = u0.fourier();
    let peak = c.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let mut active = BTreeSet::new();
    let (mut outside, mut total) = (0.0, 0.0);
    for (i, v) in c.iter().enumerate() {
        let k = &u0.frequency(i)[..n];
        total += v.norm_sqr();
        if !region.contains(k) {
            outside += v.norm_sqr();
        }
        if peak == 0.0 || v.norm() <= SUPPORT_CUT * peak {
            continue;
        }
        let base: Vec<i64> = k.iter().map(|x| (x * s).round() as i64).collect();
        let mut cand = vec![vec![]];
        for b in &base {
            cand = cand.into_iter().flat_map(|p: Vec<i64>| (-1..=1).map(move |o| [p.clone(), vec![b + o]].concat())).collect();
        }
        for idx in cand {
            let z: Vec<f64> = k.iter().zip(&idx).map(|(x, j)| x * s - *j as f64).collect();
            if rho_window(&z) > 0.0 {
                active.insert(idx);
            }
        }
    }
    let leaked_mass = if total > 0.0 { outside / total } else { 0.0 };
    let warning = (leaked_mass > LEAK_TOL).then(|| format!("data leave the frequency region: leaked mass fraction {leaked_mass:e}"));
    let half = (m / 2) as i64;
    let mut xs = vec![vec![]];
    for _ in 0..n {
        xs = xs.into_iter().flat_map(|p: Vec<i64>| (-half..m as i64 - half).map(move |j| [p.clone(), vec![j]].concat())).collect();
    }
    let mut gammas = Vec::with_capacity(active.len() * xs.len());
    let mut filtered = BTreeMap::new();
    for k in &active {
        let xi0: Vec<f64> = k.iter().map(|j| *j as f64 / s).collect();
        filtered.insert(k.clone(), frequency_filter(u0, r, &xi0));
        for x in &xs {
            gammas.push(PhasePoint::new(x.clone(), k.clone(), r)?);
        }
    }
    Ok(PacketDecomposition { data: u0.clone(), model: *model, scale: r, gammas, leaked_mass, warning, filtered })
}

impl PacketDecomposition {
    pub fn packet(&self, gamma: &PhasePoint) -> Result<Packet> {
        if gamma.scale() != self.scale {
            return Err(Error::InvalidParameter("phase point has a different scale".into()));
        }
        check_point(&self.data, gamma)?;
        let data = match self.filtered.get(&gamma.xi_index) {
            Some(g) => multiply(&eta_field(g, self.scale, &gamma.x0()), g),
            None => GridField::zeros(self.data.dim, self.data.box_length, self.data.points)?,
        };
        Ok(Packet { gamma: gamma.clone(), data, model: self.model })
    }

    /// `sum_{gamma in subset} P_gamma u (t)`, each packet propagated separately.
    pub fn sum_at(&self, subset: &[PhasePoint], t: f64) -> Result<GridField> {
        let zero = GridField::zeros(self.data.dim, self.data.box_length, self.data.points)?;
        subset
            .par_iter()
            .map(|g| self.packet(g)?.at(t))
            .try_reduce(|| zero.clone(), |a, b| Ok(a.add(&b)))
    }

    pub fn reconstruction(&self, times: &[f64]) -> Result<Reconstruction> {
        let f = self.data.l2_norm();
        let mut errors = Vec::with_capacity(times.len());
        for &t in times {
            let direct = propagate(&self.data, &self.model, t)?;
            let sum = self.sum_at(&self.gammas, t)?;
            errors.push(if f > 0.0 { sum.sub(&direct).l2_norm() / f } else { sum.l2_norm() });
        }
        let max_error = errors.iter().fold(0.0f64, |a, b| a.max(*b));
        Ok(Reconstruction { times: times.to_vec(), errors, max_error })
    }

    /// `sup_t ||sum_{gamma in subset} P_gamma u(t)|| / (sum ||L^sharp_gamma f||^2)^{1/2}` over the sampled times.
    pub fn orthogonality(&self, subset: &[PhasePoint], times: &[f64]) -> Result<f64> {
        let packets = subset.iter().map(|g| self.packet(g)).collect::<Result<Vec<_>>>()?;
        let rhs = packets.par_iter().map(|p| p.sharp_norm().powi(2)).sum::<f64>().sqrt();
        let zero = GridField::zeros(self.data.dim, self.data.box_length, self.data.points)?;
        let local = packets.iter().fold(zero, |a, p| a.add(&p.data));
        let mut lhs: f64 = 0.0;
        for &t in times {
            lhs = lhs.max(propagate(&local, &self.model, t)?.l2_norm());
        }
        if rhs == 0.0 {
            return Ok(0.0);
        }
        Ok(lhs / rhs)
    }
}

/// `sum_gamma ||w_gamma L_gamma f||^2 / ||f||^2` over every packet of the decomposition.
pub fn localization_orthogonality(d: &PacketDecomposition) -> Result<f64> {
    let f2 = d.data.l2_norm().powi(2);
    if f2 == 0.0 {
        return Ok(0.0);
    }
    let s = d.gammas.par_iter().map(|g| Ok(d.packet(g)?.sharp_norm().powi(2))).sum::<Result<f64>>()?;
    Ok(s / f2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub radii: Vec<f64>,
    /// Sup of `|P_gamma u|` over `{dist((t, x), T) in [r, 2r]} cap Q_R`, per radius.
    pub amplitudes: Vec<f64>,
    /// Fitted log-log slope; `None` when some amplitude vanishes.
    pub slope: Option<f64>,
    /// Sup of `|P_gamma u|` on the tube.
    pub on_tube: f64,
    /// `R^{-n/4} ||L^sharp_gamma f||`.
    pub on_tube_scale: f64,
    /// `R^{-n/4} ||L_gamma f||`.
    pub on_tube_plain: f64,
}

/// Decay of one packet away from its tube, sampled at `time_samples` times inside `(R/2, R)`.
pub fn concentration_slope(packet: &Packet, tube: &Tube, radii: &[f64], time_samples: usize) -> Result<Concentration> {
    let r = packet.gamma.scale();
    if tube.scale() != r {
        return Err(Error::InvalidParameter("tube and packet scales differ".into()));
    }
    let s = r.sqrt();
    if radii.is_empty() || radii.iter().any(|v| !(*v >= s * (1.0 - 1e-12))) {
        return Err(Error::InvalidParameter("radii must be at least R^(1/2)".into()));
    }
    if time_samples == 0 {
        return Err(Error::InvalidParameter("need at least one time sample".into()));
    }
    let lay = &packet.data;
    let half = 0.5 * lay.box_length;
    let (a, b) = tube.times();
    for t in [a, b] {
        if tube.center(t).iter().any(|c| c.abs() + s >= half) {
            return Err(Error::TubeExitsBox);
        }
    }
    let n = lay.dim;
    let r_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut amps = vec![0.0f64; radii.len()];
    let mut on_tube: f64 = 0.0;
    for j in 0..time_samples {
        let t = a + (b - a) * (j as f64 + 0.5) / time_samples as f64;
        let u = packet.at(t)?;
        let core = tube.center(t);
        let (local, tube_max) = (0..lay.len())
            .into_par_iter()
            .fold(
                || (vec![0.0f64; radii.len()], 0.0f64),
                |(mut acc, mut top), i| {
                    let p = lay.position(i);
                    let x: Vec<f64> = (0..n).map(|d| signed(p[d], lay.box_length)).collect();
                    if x.iter().map(|v| v * v).sum::<f64>() >= r * r {
                        return (acc, top);
                    }
                    let amp = u.samples[i].norm();
                    let slice = dist2(&x, &core).sqrt();
                    if slice <= s {
                        top = top.max(amp);
                    }
                    if slice - s >= r_min {
                        let d = tube.distance(t, &x);
                        for (k, rk) in radii.iter().enumerate() {
                            if d >= *rk && d <= 2.0 * rk {
                                acc[k] = acc[k].max(amp);
                            }
                        }
                    }
                    (acc, top)
                },
            )
            .reduce(
                || (vec![0.0; radii.len()], 0.0),
                |(a1, t1), (a2, t2)| (a1.iter().zip(&a2).map(|(x, y)| x.max(*y)).collect(), t1.max(t2)),
            );
        amps.iter_mut().zip(&local).for_each(|(x, y)| *x = x.max(*y));
        on_tube = on_tube.max(tube_max);
    }
    let slope = if amps.iter().all(|v| *v > 0.0) && radii.len() >= 2 { Some(loglog_fit(radii, &amps)?.slope) } else { None };
    let q = r.powf(-(n as f64) / 4.0);
    let (on_tube_scale, on_tube_plain) = (q * packet.sharp_norm(), q * packet.data.l2_norm());
    Ok(Concentration { radii: radii.to_vec(), amplitudes: amps, slope, on_tube, on_tube_scale, on_tube_plain })
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spatial_windows_sum_to_one() {
        let lay = GridField::zeros(2, 32.0, 32).unwrap();
        let r = 16.0;
        let mut tot = vec![C::new(0.0, 0.0); lay.len()];
        for i in -4..4 {
            for j in -4..4 {
                let e = eta_field(&lay, r, &[4.0 * i as f64, 4.0 * j as f64]);
                tot.iter_mut().zip(&e.samples).for_each(|(a, b)| *a += b);
            }
        }
        assert!(tot.iter().all(|v| (v - 1.0).norm() < 1e-12));
    }

    #[test]
    fn frequency_window_support() {
        assert_eq!(rho_window(&[0.71, 0.0]), 0.0);
        assert_eq!(rho_window(&[0.5, 0.5]), psi(0.5, 0.2).powi(2));
        assert!((0.7f64.hypot(0.7)) < 1.0);
    }
}
