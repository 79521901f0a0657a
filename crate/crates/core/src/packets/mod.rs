//! Wave packets at scale `R`: phase-space lattice points, tubes, the localisation operators,
//! and the tube/cube/ball incidence combinatorics.

mod bush;
mod incidence;
mod packet;

pub use bush::{bush_count, bush_count_exhaustive, bush_experiment, random_family, BushConfig, BushCount, BushReport, BushRow};
pub use incidence::{tube_incidence_table, Ball, BallChoice, Cube, CubeClass, IncidenceTable, TubeClass};
pub use packet::{
    concentration_slope, localization_orthogonality, packet_decompose, packet_localize, Concentration, Packet,
    PacketDecomposition, Reconstruction, MIN_SCALE, WEIGHT_ORDER,
};

use crate::error::{Error, Result};
use crate::phases::PhaseModel;
use serde::{Deserialize, Serialize};

/// `gamma = (x0, xi0)` on `R^{1/2} Z^n x R^{-1/2} Z^n`, stored as integer lattice indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct PhasePoint {
    pub x_index: Vec<i64>,
    pub xi_index: Vec<i64>,
    /// `R` as raw bits so that equality and hashing are exact.
    scale_bits: u64,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    x0: Vec<f64>,
    xi0: Vec<f64>,
    scale: f64,
}

impl From<PhasePoint> for PointRepr {
    fn from(p: PhasePoint) -> Self {
        PointRepr { x0: p.x0(), xi0: p.xi0(), scale: p.scale() }
    }
}

impl TryFrom<PointRepr> for PhasePoint {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        PhasePoint::from_coords(&r.x0, &r.xi0, r.scale)
    }
}

impl PhasePoint {
    pub fn new(x_index: Vec<i64>, xi_index: Vec<i64>, scale: f64) -> Result<Self> {
        if x_index.len() != xi_index.len() || x_index.is_empty() {
            return Err(Error::InvalidParameter("lattice indices must share a positive dimension".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        Ok(PhasePoint { x_index, xi_index, scale_bits: scale.to_bits() })
    }

    /// Rounds coordinates onto the lattices; fails when they are off the lattice by more than `1e-9` cells.
    pub fn from_coords(x0: &[f64], xi0: &[f64], scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        let s = scale.sqrt();
        let snap = |v: f64| -> Result<i64> {
            let k = v.round();
            if (v - k).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("coordinate off the lattice by {}", v - k)));
            }
            Ok(k as i64)
        };
        let xi = x0.iter().map(|v| snap(v / s)).collect::<Result<Vec<_>>>()?;
        let ki = xi0.iter().map(|v| snap(v * s)).collect::<Result<Vec<_>>>()?;
        PhasePoint::new(xi, ki, scale)
    }

    pub fn scale(&self) -> f64 {
        f64::from_bits(self.scale_bits)
    }

    pub fn dim(&self) -> usize {
        self.x_index.len()
    }

    pub fn x0(&self) -> Vec<f64> {
        let s = self.scale().sqrt();
        self.x_index.iter().map(|k| s * *k as f64).collect()
    }

    pub fn xi0(&self) -> Vec<f64> {
        let s = self.scale().sqrt();
        self.xi_index.iter().map(|k| *k as f64 / s).collect()
    }
}

/// `T = {R/2 <= t <= R, |x - x0 - t v| <= R^{1/2}}` with `v = -grad Phi(xi0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub gamma: PhasePoint,
    pub velocity: Vec<f64>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Tube {
    pub fn new(gamma: PhasePoint, model: &PhaseModel) -> Result<Tube> {
        let g = model.gradient(&gamma.xi0())?;
        Ok(Tube { gamma, velocity: g.iter().map(|v| -v).collect() })
    }

    pub fn scale(&self) -> f64 {
        self.gamma.scale()
    }

    pub fn radius(&self) -> f64 {
        self.scale().sqrt()
    }

    pub fn times(&self) -> (f64, f64) {
        (0.5 * self.scale(), self.scale())
    }

    /// Core position `x0 + t v`.
    pub fn center(&self, t: f64) -> Vec<f64> {
        self.gamma.x0().iter().zip(&self.velocity).map(|(x, v)| x + t * v).collect()
    }

    pub fn contains(&self, t: f64, x: &[f64]) -> bool {
        let (a, b) = self.times();
        t >= a && t <= b && dist2(x, &self.center(t)) <= self.scale()
    }

    /// Euclidean space-time distance from `(t, x)` to the tube.
    ///
    /// The squared distance to the slice at time `s` is convex in `s`, so a golden-section
    /// search over `[R/2, R]` finds the minimum.
    pub fn distance(&self, t: f64, x: &[f64]) -> f64 {
        let rad = self.radius();
        let f = |s: f64| {
            let d = (dist2(x, &self.center(s)).sqrt() - rad).max(0.0);
            (t - s) * (t - s) + d * d
        };
        let (mut a, mut b) = self.times();
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..90 {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        let (lo, hi) = self.times();
        f(0.5 * (a + b)).min(f(lo)).min(f(hi)).sqrt()
    }

    /// Whether the tube meets the closed box `[t_lo, t_hi] x prod [lo_d, hi_d]`.
    ///
    /// The squared distance from the core to the spatial box is convex and piecewise quadratic
    /// in `t`; each piece is minimized in closed form.
    pub fn meets_box(&self, t_lo: f64, t_hi: f64, lo: &[f64], hi: &[f64]) -> bool {
        let (a0, b0) = self.times();
        let (a, b) = (a0.max(t_lo), b0.min(t_hi));
        if a > b {
            return false;
        }
        let x0 = self.gamma.x0();
        let v = &self.velocity;
        let mut knots = vec![a, b];
        for d in 0..x0.len() {
            if v[d] != 0.0 {
                for edge in [lo[d], hi[d]] {
                    let s = (edge - x0[d]) / v[d];
                    if s > a && s < b {
                        knots.push(s);
                    }
                }
            }
        }
        knots.sort_by(|p, q| p.total_cmp(q));
        let gap2 = |t: f64| -> f64 {
            (0..x0.len())
                .map(|d| {
                    let c = x0[d] + t * v[d];
                    let e = (lo[d] - c).max(c - hi[d]).max(0.0);
                    e * e
                })
                .sum()
        };
        let r2 = self.scale();
        for w in knots.windows(2) {
            let (p, q) = (w[0], w[1]);
            let mid = 0.5 * (p + q);
            // On this piece each axis is below, inside or above its interval.
            let (mut num, mut den) = (0.0, 0.0);
            for d in 0..x0.len() {
                let c = x0[d] + mid * v[d];
                let bound = if c < lo[d] {
                    lo[d]
                } else if c > hi[d] {
                    hi[d]
                } else {
                    continue;
                };
                num += (x0[d] - bound) * v[d];
                den += v[d] * v[d];
            }
            let t = if den > 0.0 { (-num / den).clamp(p, q) } else { mid };
            if gap2(t) <= r2 {
                return true;
            }
        }
        gap2(a) <= r2 || gap2(b) <= r2
    }
}
