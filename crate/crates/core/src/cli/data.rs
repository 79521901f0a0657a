//! Seeded random data for the experiments.

use crate::error::Result;
use crate::spectral::GridField;
use crate::util::bump::phi;
use crate::util::rng::rng;
use num_complex::Complex64 as C;
use rand::Rng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Uniform random samples, then the Fourier multiplier `phi(|xi - c| / r)`.
pub fn band_data(dim: usize, l: f64, n: usize, c: &[f64], r: f64, seed: u64) -> Result<GridField> {
    let mut g = rng(seed, 0);
    let s: Vec<C> = (0..n.pow(dim as u32)).map(|_| C::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).collect();
    let c = c.to_vec();
    Ok(GridField::new(dim, l, n, s)?.map_fourier(move |xi| C::new(phi(dist(xi, &c) / r), 0.0)))
}

/// Three packets at random positions in `[-4, 4)^n` with Fourier support in `|xi - c| < r`.
pub fn packet_data(l: f64, n: usize, c: &[f64], r: f64, seed: u64) -> Result<GridField> {
    let mut g = rng(seed, 1);
    let terms: Vec<(C, Vec<f64>)> = (0..3)
        .map(|_| {
            let a = C::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
            let x: Vec<f64> = c.iter().map(|_| g.gen_range(-4.0..4.0)).collect();
            (a, x)
        })
        .collect();
    let c = c.to_vec();
    GridField::from_fourier_fn(c.len(), l, n, move |xi| {
        let env = phi(dist(xi, &c) / r);
        if env == 0.0 {
            return C::new(0.0, 0.0);
        }
        let s: C = terms.iter().map(|(a, x)| a * C::from_polar(1.0, -x.iter().zip(xi).map(|(p, q)| p * q).sum::<f64>())).sum();
        s * env
    })
}
