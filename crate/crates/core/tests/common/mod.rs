#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::Rng;
use rlab::spectral::GridField;
use rlab::util::rng::rng;

/// Supremum over every subset of at least two sample indices, summed left to right.
pub fn brute_force_variation(d: &[Vec<f64>], p: f64) -> f64 {
    let k = d.len();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << k) {
        if mask.count_ones() < 2 {
            continue;
        }
        let idx: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let mut s = 0.0;
        for w in idx.windows(2) {
            s += d[w[0]][w[1]].powf(p);
        }
        best = best.max(s);
    }
    best.powf(1.0 / p)
}

pub fn random_field(dim: usize, l: f64, n: usize, seed: u64) -> GridField {
    let mut r = rng(seed, 0);
    let s: Vec<C> = (0..n.pow(dim as u32)).map(|_| C::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    GridField::new(dim, l, n, s).unwrap()
}

/// Random smooth data with Fourier support in the ball `|xi - c| < r`.
pub fn random_band_field(dim: usize, l: f64, n: usize, c: &[f64], r: f64, seed: u64) -> GridField {
    let f = random_field(dim, l, n, seed);
    let c = c.to_vec();
    f.map_fourier(move |xi| {
        let d: f64 = xi.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        C::new(rlab::util::bump::phi(d / r), 0.0)
    })
}

/// A few spatially localized packets with Fourier support in the ball `|xi - c| < r`.
pub fn packet_field(l: f64, n: usize, c: &[f64], r: f64, seed: u64) -> GridField {
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
        let d: f64 = xi.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let env = rlab::util::bump::phi(d / r);
        if env == 0.0 {
            return C::new(0.0, 0.0);
        }
        let s: C = terms.iter().map(|(a, x)| a * C::from_polar(1.0, -x.iter().zip(xi).map(|(p, q)| p * q).sum::<f64>())).sum();
        s * env
    })
    .unwrap()
}
