//! Angular Littlewood-Paley projections `H_N` on the lattice.
//!
//! Frequencies are binned into shells `|xi| in [(b - 1/2) dk, (b + 1/2) dk)`. On each shell the
//! DFT coefficients are fitted by least squares in the basis `Y(omega) (r - r_b)^j`, with `Y`
//! circular (n = 2) or real spherical (n = 3) harmonics of degree `<= L_b` and `j <= 2`; the
//! degree-`l` part is then reweighted by `rho(l / N)` (`chi(l)` for `N = 1`). `L_b` is the
//! largest degree not above `l_max` with at least four shell points per basis function.

use super::field::GridField;
use crate::error::{Error, Result};
use crate::util::bump;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rayon::prelude::*;

pub const HARMONIC_RADIAL_DEGREE: usize = 2;
const OVERSAMPLING: usize = 4;

/// Weight of degree `l` in `H_N`.
pub fn angular_weight(l: usize, n: f64) -> f64 {
    if n <= 1.0 {
        bump::chi(l as f64)
    } else {
        bump::rho(l as f64 / n)
    }
}

/// Real orthonormal spherical harmonic of degree `l`, order `m` (`|m| <= l`) at a unit vector.
pub fn real_spherical_harmonic(l: usize, m: i64, omega: &[f64; 3]) -> f64 {
    let all = spherical_all(l, omega);
    let idx = l * l + (m + l as i64) as usize;
    all[idx].1
}

/// All real spherical harmonics up to degree `lmax`, ordered by `(l, m)` with `m = -l..=l`.
fn spherical_all(lmax: usize, omega: &[f64; 3]) -> Vec<(usize, f64)> {
    let ct = omega[2].clamp(-1.0, 1.0);
    let st = (1.0 - ct * ct).max(0.0).sqrt();
    let phi = omega[1].atan2(omega[0]);
    // normalized associated Legendre p[l][m]
    let mut p = vec![vec![0.0; lmax + 1]; lmax + 1];
    p[0][0] = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    for m in 1..=lmax {
        p[m][m] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * ct * p[m][m];
    }
    for m in 0..=lmax {
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[l][m] = a * (ct * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    let mut out = Vec::with_capacity((lmax + 1) * (lmax + 1));
    let s2 = std::f64::consts::SQRT_2;
    for l in 0..=lmax {
        for m in -(l as i64)..=(l as i64) {
            let k = m.unsigned_abs() as usize;
            let v = match m.cmp(&0) {
                std::cmp::Ordering::Equal => p[l][0],
                std::cmp::Ordering::Greater => s2 * p[l][k] * (k as f64 * phi).cos(),
                std::cmp::Ordering::Less => s2 * p[l][k] * (k as f64 * phi).sin(),
            };
            out.push((l, v));
        }
    }
    out
}

fn circular_all(lmax: usize, omega: &[f64; 3]) -> Vec<(usize, f64)> {
    let a = omega[1].atan2(omega[0]);
    let mut out = vec![(0, 1.0)];
    for l in 1..=lmax {
        out.push((l, (l as f64 * a).cos()));
        out.push((l, (l as f64 * a).sin()));
    }
    out
}

fn harmonic_count(dim: usize, l: usize) -> usize {
    if dim == 2 {
        2 * l + 1
    } else {
        (l + 1) * (l + 1)
    }
}

/// `H_N f` through shell-wise harmonic least squares. Requires `l_max >= 2N`.
pub fn angular_project(f: &GridField, n: f64, l_max: usize) -> Result<GridField> {
    if f.dim < 2 {
        return Err(Error::InvalidParameter("angular projections need dimension 2 or 3".into()));
    }
    if !(n >= 1.0) || (n.log2().fract() != 0.0) {
        return Err(Error::InvalidParameter(format!("N must be a dyadic number >= 1, got {n}")));
    }
    let needed = (2.0 * n).ceil() as usize;
    if l_max < needed {
        return Err(Error::Truncation { l_max, needed });
    }
    let coeffs = f.fourier();
    let dk = f.dk();
    let mut bins: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..coeffs.len() {
        let xi = f.frequency(i);
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        bins.entry((r / dk).round() as usize).or_default().push(i);
    }
    let bins: Vec<(usize, Vec<usize>)> = bins.into_iter().collect();
    let results: Vec<Vec<(usize, C)>> = bins
        .par_iter()
        .map(|(b, idx)| project_shell(f, &coeffs, *b as f64 * dk, idx, n, l_max))
        .collect();
    let mut out = vec![C::new(0.0, 0.0); coeffs.len()];
    for shell in results {
        for (i, v) in shell {
            out[i] = v;
        }
    }
    Ok(f.from_coefficients(out))
}

fn project_shell(f: &GridField, coeffs: &[C], rb: f64, idx: &[usize], n: f64, l_max: usize) -> Vec<(usize, C)> {
    let p = idx.len();
    let dk = f.dk();
    let mut jdeg = HARMONIC_RADIAL_DEGREE;
    while jdeg > 0 && (jdeg + 1) * OVERSAMPLING > p {
        jdeg -= 1;
    }
    let mut l_eff = 0;
    while l_eff < l_max && harmonic_count(f.dim, l_eff + 1) * (jdeg + 1) * OVERSAMPLING <= p {
        l_eff += 1;
    }
    let kb = harmonic_count(f.dim, l_eff) * (jdeg + 1);
    let mut a = DMatrix::<f64>::zeros(p, kb);
    let mut degree = vec![0usize; kb];
    for (row, &i) in idx.iter().enumerate() {
        let xi = f.frequency(i);
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        let omega = if r > 0.0 { [xi[0] / r, xi[1] / r, xi[2] / r] } else { [0.0, 0.0, 1.0] };
        let h = if f.dim == 2 { circular_all(l_eff, &omega) } else { spherical_all(l_eff, &omega) };
        let s = (r - rb) / dk;
        let mut col = 0;
        for (l, y) in h {
            let mut rp = 1.0;
            for _ in 0..=jdeg {
                a[(row, col)] = y * rp;
                degree[col] = l;
                rp *= s;
                col += 1;
            }
        }
    }
    let yr = DVector::from_iterator(p, idx.iter().map(|&i| coeffs[i].re));
    let yi = DVector::from_iterator(p, idx.iter().map(|&i| coeffs[i].im));
    let at = a.transpose();
    let gram = &at * &a;
    let solve = |y: &DVector<f64>| -> DVector<f64> {
        let rhs = &at * y;
        match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => a.clone().svd(true, true).solve(y, 1e-13).unwrap_or_else(|_| DVector::zeros(kb)),
        }
    };
    let w = DVector::from_iterator(kb, degree.iter().map(|&l| angular_weight(l, n)));
    let xr = solve(&yr).component_mul(&w);
    let xim = solve(&yi).component_mul(&w);
    let or = &a * xr;
    let oi = &a * xim;
    idx.iter().enumerate().map(|(row, &i)| (i, C::new(or[row], oi[row]))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spherical_harmonics_orthonormal() {
        // Gauss-Legendre-free check: dense midpoint quadrature in (cos theta, phi)
        let (nt, np) = (200, 400);
        let lmax = 4;
        let k = (lmax + 1) * (lmax + 1);
        let mut gram = vec![0.0; k * k];
        for a in 0..nt {
            let z = -1.0 + 2.0 * (a as f64 + 0.5) / nt as f64;
            for b in 0..np {
                let ph = 2.0 * std::f64::consts::PI * (b as f64 + 0.5) / np as f64;
                let s = (1.0 - z * z).sqrt();
                let y = spherical_all(lmax, &[s * ph.cos(), s * ph.sin(), z]);
                let w = 2.0 / nt as f64 * 2.0 * std::f64::consts::PI / np as f64;
                for i in 0..k {
                    for j in 0..k {
                        gram[i * k + j] += w * y[i].1 * y[j].1;
                    }
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * k + j] - e).abs() < 1e-3, "{i} {j} {}", gram[i * k + j]);
            }
        }
    }

    #[test]
    fn weights() {
        assert_eq!(angular_weight(0, 1.0), 1.0);
        assert_eq!(angular_weight(2, 1.0), 0.0);
        assert_eq!(angular_weight(8, 8.0), 1.0);
        assert_eq!(angular_weight(0, 4.0), 0.0);
    }
}
