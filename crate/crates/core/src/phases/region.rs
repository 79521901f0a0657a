use crate::error::{Error, Result};
use crate::util::rng::rng;
use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Frequency regions; the sampler is a shifted Halton sequence filtered by membership.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FreqRegion {
    Ball { center: Vec<f64>, radius: f64 },
    /// Shell `r_in <= |xi - center| <= r_out`.
    Annulus { center: Vec<f64>, r_in: f64, r_out: f64 },
    /// `r_in <= |xi| <= r_out` with angle to `axis` at most `half_angle`.
    CapSector { axis: Vec<f64>, half_angle: f64, r_in: f64, r_out: f64 },
    AxisCube { center: Vec<f64>, half_sides: Vec<f64> },
    /// `center + sum_i t_i edges[i]` with `|t_i| <= 1`.
    Parallelepiped { center: Vec<f64>, edges: Vec<Vec<f64>> },
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

impl FreqRegion {
    pub fn dim(&self) -> usize {
        match self {
            FreqRegion::Ball { center, .. } | FreqRegion::Annulus { center, .. } => center.len(),
            FreqRegion::CapSector { axis, .. } => axis.len(),
            FreqRegion::AxisCube { center, .. } | FreqRegion::Parallelepiped { center, .. } => center.len(),
        }
    }

    pub fn ball(center: &[f64], radius: f64) -> Self {
        FreqRegion::Ball { center: center.to_vec(), radius }
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        match self {
            FreqRegion::Ball { center, radius } => dist(xi, center) <= *radius,
            FreqRegion::Annulus { center, r_in, r_out } => {
                let r = dist(xi, center);
                r >= *r_in && r <= *r_out
            }
            FreqRegion::CapSector { axis, half_angle, r_in, r_out } => {
                let r = norm(xi);
                if r < *r_in || r > *r_out || r == 0.0 {
                    return false;
                }
                let c = xi.iter().zip(axis).map(|(a, b)| a * b).sum::<f64>() / (r * norm(axis));
                c.clamp(-1.0, 1.0).acos() <= *half_angle
            }
            FreqRegion::AxisCube { center, half_sides } => {
                xi.iter().zip(center).zip(half_sides).all(|((x, c), h)| (x - c).abs() <= *h)
            }
            FreqRegion::Parallelepiped { center, edges } => match self.edge_coords(xi, center, edges) {
                Some(t) => t.iter().all(|v| v.abs() <= 1.0 + 1e-12),
                None => false,
            },
        }
    }

    fn edge_coords(&self, xi: &[f64], center: &[f64], edges: &[Vec<f64>]) -> Option<Vec<f64>> {
        let n = center.len();
        let m = DMatrix::from_fn(n, n, |i, j| edges[j][i]);
        let rhs = DVector::from_iterator(n, xi.iter().zip(center).map(|(a, b)| a - b));
        m.lu().solve(&rhs).map(|v| v.iter().copied().collect())
    }

    /// Exact diameter of the region.
    pub fn diameter(&self) -> f64 {
        match self {
            FreqRegion::Ball { radius, .. } => 2.0 * radius,
            FreqRegion::Annulus { r_out, .. } => 2.0 * r_out,
            FreqRegion::CapSector { half_angle, r_in, r_out, .. } => {
                let c = if 2.0 * half_angle >= std::f64::consts::PI { -1.0 } else { (2.0 * half_angle).cos() };
                let mut best = r_out - r_in;
                for &a in &[*r_in, *r_out] {
                    for &b in &[*r_in, *r_out] {
                        best = best.max((a * a + b * b - 2.0 * a * b * c).max(0.0).sqrt());
                    }
                }
                best
            }
            FreqRegion::AxisCube { half_sides, .. } => 2.0 * norm(half_sides),
            FreqRegion::Parallelepiped { edges, .. } => {
                let n = edges.len();
                let mut best: f64 = 0.0;
                for mask in 0..(1u32 << n) {
                    let mut v = vec![0.0; edges[0].len()];
                    for (i, e) in edges.iter().enumerate() {
                        let s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
                        v.iter_mut().zip(e).for_each(|(a, b)| *a += s * b);
                    }
                    best = best.max(2.0 * norm(&v));
                }
                best
            }
        }
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        match self {
            FreqRegion::Ball { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            FreqRegion::Annulus { center, r_out, .. } => {
                (center.iter().map(|c| c - r_out).collect(), center.iter().map(|c| c + r_out).collect())
            }
            FreqRegion::CapSector { r_out, .. } => (vec![-r_out; n], vec![*r_out; n]),
            FreqRegion::AxisCube { center, half_sides } => (
                center.iter().zip(half_sides).map(|(c, h)| c - h).collect(),
                center.iter().zip(half_sides).map(|(c, h)| c + h).collect(),
            ),
            FreqRegion::Parallelepiped { center, edges } => {
                let ext: Vec<f64> = (0..n).map(|i| edges.iter().map(|e| e[i].abs()).sum()).collect();
                (
                    center.iter().zip(&ext).map(|(c, e)| c - e).collect(),
                    center.iter().zip(&ext).map(|(c, e)| c + e).collect(),
                )
            }
        }
    }

    /// `count` quasi-uniform points inside the region, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        if count == 0 {
            return Err(Error::EmptySamples("requested zero samples".into()));
        }
        if n > PRIMES.len() {
            return Err(Error::InvalidParameter("dimension too large for the sampler".into()));
        }
        let mut r = rng(seed, 0x5a_4d_50);
        let shift: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
        let mut out = Vec::with_capacity(count);
        if let FreqRegion::Parallelepiped { center, edges } = self {
            for i in 1..=count as u64 {
                let mut p = center.clone();
                for (d, e) in edges.iter().enumerate() {
                    let u = (radical_inverse(i, PRIMES[d]) + shift[d]).fract();
                    let t = 2.0 * u - 1.0;
                    p.iter_mut().zip(e).for_each(|(a, b)| *a += t * b);
                }
                out.push(p);
            }
            return Ok(out);
        }
        let (lo, hi) = self.bounding_box();
        let max_tries = 10_000_000u64.max(count as u64 * 10_000);
        let mut i = 0u64;
        while out.len() < count {
            i += 1;
            if i > max_tries {
                return Err(Error::EmptySamples("region too thin for the sampler".into()));
            }
            let p: Vec<f64> = (0..n)
                .map(|d| lo[d] + (hi[d] - lo[d]) * (radical_inverse(i, PRIMES[d]) + shift[d]).fract())
                .collect();
            if self.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
