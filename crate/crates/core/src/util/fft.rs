//! Multi-dimensional complex FFT over row-major arrays (last axis fastest).

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static P: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    P.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().expect("fft planner poisoned");
    if inverse {
        p.plan_fft_inverse(len)
    } else {
        p.plan_fft_forward(len)
    }
}

fn transform_axis(data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
    let len = shape[axis];
    if len <= 1 {
        return;
    }
    let fft = plan(len, inverse);
    let stride: usize = shape[axis + 1..].iter().product();
    if stride == 1 {
        data.par_chunks_mut(len).for_each(|line| fft.process(line));
        return;
    }
    let block = len * stride;
    for chunk in data.chunks_mut(block) {
        let lines: Vec<Vec<Complex64>> = (0..stride)
            .into_par_iter()
            .map(|j| {
                let mut line: Vec<Complex64> = (0..len).map(|i| chunk[i * stride + j]).collect();
                fft.process(&mut line);
                line
            })
            .collect();
        for (j, line) in lines.into_iter().enumerate() {
            for (i, v) in line.into_iter().enumerate() {
                chunk[i * stride + j] = v;
            }
        }
    }
}

/// Unnormalized forward transform, `F_k = sum_x f_x e^{-2 pi i k x / N}`.
pub fn forward(data: &mut [Complex64], shape: &[usize]) {
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    for axis in 0..shape.len() {
        transform_axis(data, shape, axis, false);
    }
}

/// Inverse transform including the `1/N` normalization.
pub fn inverse(data: &mut [Complex64], shape: &[usize]) {
    for axis in 0..shape.len() {
        transform_axis(data, shape, axis, true);
    }
    let scale = 1.0 / data.len() as f64;
    data.par_iter_mut().for_each(|v| *v *= scale);
}

/// Signed integer frequency index of DFT bin `i` on an axis of length `n`.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let shape = [8, 4];
        let orig: Vec<Complex64> = (0..32)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut d = orig.clone();
        forward(&mut d, &shape);
        inverse(&mut d, &shape);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn matches_direct_dft() {
        let shape = [4, 3];
        let f: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut d = f.clone();
        forward(&mut d, &shape);
        for k0 in 0..4 {
            for k1 in 0..3 {
                let mut s = Complex64::new(0.0, 0.0);
                for x0 in 0..4 {
                    for x1 in 0..3 {
                        let ph = -2.0 * std::f64::consts::PI
                            * ((k0 * x0) as f64 / 4.0 + (k1 * x1) as f64 / 3.0);
                        s += f[x0 * 3 + x1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - d[k0 * 3 + k1]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn signed_indices() {
        assert_eq!(signed_index(0, 8), 0);
        assert_eq!(signed_index(3, 8), 3);
        assert_eq!(signed_index(4, 8), -4);
        assert_eq!(signed_index(7, 8), -1);
        assert_eq!(signed_index(2, 5), 2);
        assert_eq!(signed_index(3, 5), -2);
    }
}
