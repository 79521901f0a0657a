//! Dirac matrices and projectors, the null-form symbol bound, and the modulation function.

use crate::error::{Error, Result};
use crate::util::bump;
use crate::util::rng::rng;
use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type M4 = Matrix4<C>;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Gamma matrices in the Dirac representation, metric signature `(+,-,-,-)`.
#[derive(Clone, Debug)]
pub struct DiracAlgebra {
    pub gamma: [M4; 4],
    pub pauli: [Matrix2<C>; 3],
}

impl Default for DiracAlgebra {
    fn default() -> Self {
        Self::new()
    }
}

impl DiracAlgebra {
    pub fn new() -> Self {
        let i = C::new(0.0, 1.0);
        let z = C::new(0.0, 0.0);
        let pauli = [
            Matrix2::new(z, c(1.0), c(1.0), z),
            Matrix2::new(z, -i, i, z),
            Matrix2::new(c(1.0), z, z, c(-1.0)),
        ];
        let g0 = M4::from_diagonal(&Vector4::new(c(1.0), c(1.0), c(-1.0), c(-1.0)));
        let block = |s: &Matrix2<C>| {
            let mut m = M4::zeros();
            for r in 0..2 {
                for q in 0..2 {
                    m[(r, q + 2)] = s[(r, q)];
                    m[(r + 2, q)] = -s[(r, q)];
                }
            }
            m
        };
        DiracAlgebra { gamma: [g0, block(&pauli[0]), block(&pauli[1]), block(&pauli[2])], pauli }
    }

    /// `g^{mu nu}`.
    pub fn metric(mu: usize, nu: usize) -> f64 {
        match (mu, nu) {
            (0, 0) => 1.0,
            (a, b) if a == b => -1.0,
            _ => 0.0,
        }
    }

    /// Max entry deviation of `{gamma^mu, gamma^nu} - 2 g^{mu nu} I` over all index pairs.
    pub fn anticommutator_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let a = self.gamma[mu] * self.gamma[nu] + self.gamma[nu] * self.gamma[mu];
                let d = a - M4::identity() * c(2.0 * Self::metric(mu, nu));
                worst = worst.max(d.iter().map(|v| v.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// `xi_j gamma^0 gamma^j + M gamma^0`.
    pub fn alpha_symbol(&self, xi: &[f64; 3], mass: f64) -> M4 {
        let mut a = self.gamma[0] * c(mass);
        for j in 0..3 {
            a += self.gamma[0] * self.gamma[j + 1] * c(xi[j]);
        }
        a
    }

    /// `Pi_sign(xi) = (I + sign (xi_j gamma^0 gamma^j + M gamma^0) / <xi>_M) / 2`.
    pub fn projector(&self, xi: &[f64; 3], mass: f64, sign: f64) -> Result<M4> {
        let br = bracket(xi, mass);
        if br == 0.0 {
            return Err(Error::UndefinedProjector);
        }
        Ok((M4::identity() + self.alpha_symbol(xi, mass) * c(sign / br)) * c(0.5))
    }

    /// Residual of `(gamma^0 tau + gamma^j xi_j + M) Pi psi = gamma^0 (tau + sign <xi>_M) psi` for
    /// the plane wave `psi = exp(i (t tau + x.xi)) Pi psi0`, i.e. `psi` in the range of `Pi`.
    pub fn reduction_residual(&self, xi: &[f64; 3], tau: f64, mass: f64, sign: f64, psi0: &Vector4<C>) -> Result<f64> {
        let p = self.projector(xi, mass, sign)?;
        let psi = p * psi0;
        Ok(self.reduction_defect(xi, tau, mass, sign, &psi)?)
    }

    /// Same identity with an arbitrary spinor `psi` on the right-hand side.
    pub fn reduction_defect(&self, xi: &[f64; 3], tau: f64, mass: f64, sign: f64, psi: &Vector4<C>) -> Result<f64> {
        let p = self.projector(xi, mass, sign)?;
        let mut dirac = self.gamma[0] * c(tau) + M4::identity() * c(mass);
        for j in 0..3 {
            dirac += self.gamma[j + 1] * c(xi[j]);
        }
        let lhs = dirac * (p * psi);
        let rhs = self.gamma[0] * psi * c(tau + sign * bracket(xi, mass));
        let scale = (tau.abs() + bracket(xi, mass) + mass).max(1.0) * psi.norm().max(1e-300);
        Ok((lhs - rhs).norm() / scale)
    }
}

/// `<xi>_m = (m^2 + |xi|^2)^{1/2}`.
pub fn bracket(xi: &[f64], m: f64) -> f64 {
    (m * m + xi.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Angle between two vectors, `arccos` of the clamped normalized inner product.
pub fn angle(x: &[f64], y: &[f64]) -> f64 {
    let (a, b) = (norm(x), norm(y));
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let d: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
    (d / (a * b)).clamp(-1.0, 1.0).acos()
}

/// Largest singular value of a 4x4 complex matrix.
pub fn spectral_norm(m: &M4) -> f64 {
    let h = m.adjoint() * m;
    let h = (h + h.adjoint()) * c(0.5);
    h.symmetric_eigenvalues().iter().fold(0.0f64, |a, v| a.max(*v)).max(0.0).sqrt()
}

/// `(lhs, rhs)` of the null-form symbol bound with signs `(s1, s2)`.
pub fn null_symbol_ratio(alg: &DiracAlgebra, x: &[f64; 3], y: &[f64; 3], s1: f64, s2: f64, mass: f64) -> Result<(f64, f64)> {
    let p1 = alg.projector(x, mass, s1)?;
    let p2 = alg.projector(y, mass, s2)?;
    let lhs = spectral_norm(&(p1 * alg.gamma[0] * p2));
    let sx: Vec<f64> = x.iter().map(|v| s1 * v).collect();
    let sy: Vec<f64> = y.iter().map(|v| s2 * v).collect();
    let rhs = angle(&sx, &sy) + (s1 * norm(x) + s2 * norm(y)).abs() / (bracket(x, mass) * bracket(y, mass));
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullConstant {
    pub constant: f64,
    pub samples: usize,
    pub worst_x: [f64; 3],
    pub worst_y: [f64; 3],
    pub worst_signs: (f64, f64),
}

/// Smallest `C` with `lhs <= C rhs` over random pairs with `r_min <= |x|, |y| <= r_max` and
/// random signs. For `M > 0` the ratio is unbounded as `x, y -> 0` (`lhs -> 1`, `rhs -> 0`), so
/// `r_min` should be of unit size.
///
/// The sample maximum is refined by Nelder-Mead from the best samples and from the best nodes
/// of a coarse grid in the rotation-invariant coordinates.
pub fn null_constant(mass: f64, r_min: f64, r_max: f64, samples: usize, seed: u64) -> Result<NullConstant> {
    if !(0.0 <= r_min && r_min < r_max) || samples == 0 {
        return Err(Error::InvalidParameter("need 0 <= r_min < r_max and samples >= 1".into()));
    }
    let alg = DiracAlgebra::new();
    let chunk = 1000usize;
    type Cand = (f64, [f64; 3], [f64; 3], (f64, f64));
    let parts: Vec<Result<Vec<Cand>>> = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .map(|b| {
            let mut r = rng(seed, b as u64);
            let mut out = Vec::new();
            for _ in 0..chunk.min(samples - b * chunk) {
                let x = random_shell(&mut r, r_min, r_max);
                let y = random_shell(&mut r, r_min, r_max);
                let s1 = if r.gen::<bool>() { 1.0 } else { -1.0 };
                let s2 = if r.gen::<bool>() { 1.0 } else { -1.0 };
                let (l, h) = null_symbol_ratio(&alg, &x, &y, s1, s2, mass)?;
                if h > 0.0 {
                    out.push((l / h, x, y, (s1, s2)));
                }
            }
            out.sort_by(|a, b| b.0.total_cmp(&a.0));
            out.truncate(8);
            Ok(out)
        })
        .collect();
    let mut cands: Vec<Cand> = Vec::new();
    for p in parts {
        cands.extend(p?);
    }
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    cands.truncate(16);
    // deterministic starts from a coarse grid in (|x|, |y|, angle)
    const G: usize = 24;
    let mut grid: Vec<Cand> = (0..4 * G * G * G)
        .into_par_iter()
        .filter_map(|idx| {
            let (sg, i, j, k) = (idx / (G * G * G), (idx / (G * G)) % G, (idx / G) % G, idx % G);
            let signs = ([1.0, -1.0][sg / 2], [1.0, -1.0][sg % 2]);
            let r1 = r_min + (r_max - r_min) * i as f64 / (G - 1) as f64;
            let r2 = r_min + (r_max - r_min) * j as f64 / (G - 1) as f64;
            let th = std::f64::consts::PI * k as f64 / (G - 1) as f64;
            let x = [r1, 0.0, 0.0];
            let y = [r2 * th.cos(), r2 * th.sin(), 0.0];
            match null_symbol_ratio(&alg, &x, &y, signs.0, signs.1, mass) {
                Ok((l, h)) if h > 0.0 => Some((l / h, x, y, signs)),
                _ => None,
            }
        })
        .collect();
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    cands.extend(grid.into_iter().take(8));
    let refined: Vec<Cand> = cands
        .par_iter()
        .map(|c0| {
            // the ratio is invariant under joint rotations, so refine in (|x|, |y|, angle)
            let to_pair = |v: &[f64; 3]| {
                let (r1, r2) = (v[0].clamp(r_min, r_max), v[1].clamp(r_min, r_max));
                let th = v[2].clamp(0.0, std::f64::consts::PI);
                ([r1, 0.0, 0.0], [r2 * th.cos(), r2 * th.sin(), 0.0])
            };
            let f = |v: &[f64; 3]| {
                let (x, y) = to_pair(v);
                match null_symbol_ratio(&alg, &x, &y, c0.3 .0, c0.3 .1, mass) {
                    Ok((l, h)) if h > 0.0 => -l / h,
                    _ => 0.0,
                }
            };
            let x0 = [norm(&c0.1), norm(&c0.2), angle(&c0.1, &c0.2)];
            let (v, p) = nelder_mead(f, x0, [0.05 * r_max, 0.05 * r_max, 0.1], 600);
            let (x, y) = to_pair(&p);
            if -v > c0.0 {
                (-v, x, y, c0.3)
            } else {
                *c0
            }
        })
        .collect();
    let best = refined.into_iter().fold((0.0, [0.0; 3], [0.0; 3], (1.0, 1.0)), |a, b| if b.0 > a.0 { b } else { a });
    Ok(NullConstant { constant: best.0, samples, worst_x: best.1, worst_y: best.2, worst_signs: best.3 })
}

fn random_shell(r: &mut impl rand::Rng, rmin: f64, rmax: f64) -> [f64; 3] {
    loop {
        let v = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let n2: f64 = v.iter().map(|a| a * a).sum();
        if n2 <= 1.0 && n2 * rmax * rmax >= rmin * rmin && n2 > 1e-12 {
            return [v[0] * rmax, v[1] * rmax, v[2] * rmax];
        }
    }
}

/// `|<xi - eta>_m - s1 <xi>_M + s2 <eta>_M|`, evaluated so the two symmetries hold bit-exactly.
pub fn modulation_value(xi: &[f64], eta: &[f64], s1: f64, s2: f64, big_m: f64, m: f64) -> f64 {
    modulation_signed(xi, eta, s1, s2, big_m, m).abs()
}

fn modulation_signed(xi: &[f64], eta: &[f64], s1: f64, s2: f64, big_m: f64, m: f64) -> f64 {
    let d: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
    let a = bracket(&d, m);
    let b = bracket(xi, big_m);
    let cc = bracket(eta, big_m);
    a + ((s2 * cc) - (s1 * b))
}

/// Both sides of the general modulation identity for masses `(m1, m2, m3)` and sign `pm`.
pub fn modulation_identity_sides(x: &[f64], y: &[f64], m1: f64, m2: f64, m3: f64, pm: f64) -> (f64, f64) {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let (bx, by) = (bracket(x, m1), bracket(y, m2));
    let lhs = (bracket(&d, m3).powi(2) - (bx + pm * by).powi(2)).abs();
    let (nx, ny) = (norm(x), norm(y));
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let frac = (m1 * ny - m2 * nx).powi(2) / (bx * by + nx * ny + m1 * m2);
    let rhs = 2.0 * (frac + nx * ny + pm * dot + pm * ((m1 + pm * m2).powi(2) - m3 * m3) / 2.0).abs();
    (lhs, rhs)
}

/// Ratios `M / bound` for the resonance lower bounds at one pair (larger is better).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationCheck {
    pub identity_residual: f64,
    pub minus_plus: f64,
    pub same_sign: f64,
    pub minus_minus: f64,
    pub plus_plus: f64,
    pub resonant_upper: f64,
    pub resonant_lower: f64,
}

/// Identity residual plus the bound ratios for spinor mass `M` and field mass 1.
pub fn modulation_identity_residual(xi: &[f64], eta: &[f64], big_m: f64, masses: (f64, f64, f64), pm: f64) -> ModulationCheck {
    let (l, r) = modulation_identity_sides(xi, eta, masses.0, masses.1, masses.2, pm);
    let identity_residual = (l - r).abs() / l.abs().max(1.0);
    let br = |v: &[f64]| bracket(v, 1.0);
    let d: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
    let (nx, ny) = (norm(xi), norm(eta));
    let th = angle(xi, eta);
    let mneg: Vec<f64> = xi.iter().map(|v| -v).collect();
    let mpp = modulation_value(xi, eta, 1.0, 1.0, big_m, 1.0);
    let mmm = modulation_value(xi, eta, -1.0, -1.0, big_m, 1.0);
    let mpm = modulation_value(xi, eta, 1.0, -1.0, big_m, 1.0);
    let mmp = modulation_value(xi, eta, -1.0, 1.0, big_m, 1.0);
    let same = (1.0 / br(&d)) * ((nx - ny).powi(2) / (br(xi) * br(eta)) + nx * ny * th * th + 1.0);
    let dot: f64 = xi.iter().zip(eta).map(|(a, b)| a * b).sum();
    let bxm = bracket(xi, big_m);
    let bym = bracket(eta, big_m);
    let res = (big_m * big_m * (nx - ny).powi(2) / (bxm * bym + nx * ny + big_m * big_m) + nx * ny + dot
        + (4.0 * big_m * big_m - 1.0) / 2.0)
        .abs()
        / (br(xi) + br(eta));
    let nd = norm(&d);
    let dx: f64 = xi.iter().zip(&d).map(|(a, b)| a * b).sum();
    let res2 = ((nx - big_m * nd).powi(2) / (bxm * br(&d) + nx * nd + big_m) + nx * nd - dx + (2.0 * big_m - 1.0) / 2.0)
        .abs()
        / br(eta);
    let q = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    ModulationCheck {
        identity_residual,
        minus_plus: q(mmp, br(xi) + br(eta)),
        same_sign: q(mpp.min(mmm), same),
        minus_minus: q(mmm, nd * nx / (br(xi) + br(eta)) * angle(&d, &mneg).powi(2)),
        plus_plus: q(mpp, nd * ny / (br(xi) + br(eta)) * angle(&d, eta).powi(2)),
        resonant_upper: q(res, mpm),
        resonant_lower: q(mpm, res2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `M_{+,-}` changes sign, so its zero set is a hypersurface.
    Resonant,
    /// Zeros without a sign change (touching), the case `m = 2M`.
    WeaklyResonant,
    NonResonant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceResult {
    pub min_value: f64,
    pub argmin: ([f64; 3], [f64; 3]),
    pub classification: Regime,
    /// Regime predicted from the masses alone.
    pub expected: Regime,
}

pub fn expected_regime(big_m: f64, m: f64) -> Regime {
    if m > 2.0 * big_m {
        Regime::Resonant
    } else if m == 2.0 * big_m {
        Regime::WeaklyResonant
    } else {
        Regime::NonResonant
    }
}

/// Global minimum of the `(+,-)` modulation function over `|xi|, |eta| <= r_max`.
///
/// By rotation invariance the function depends on `(|xi|, |eta|, angle)`; a 64^3 grid in these
/// variables is refined by Nelder-Mead from the 50 best nodes, and sign changes between grid
/// neighbours are bisected to locate zeros.
pub fn resonance_minimum(big_m: f64, m: f64, r_max: f64, tol: f64) -> Result<ResonanceResult> {
    if !(r_max > 0.0) {
        return Err(Error::EmptySamples("empty shells".into()));
    }
    const G: usize = 64;
    let pt = |r1: f64, r2: f64, th: f64| ([r1, 0.0, 0.0], [r2 * th.cos(), r2 * th.sin(), 0.0]);
    let g = |v: &[f64; 3]| {
        let (x, y) = pt(v[0].clamp(0.0, r_max), v[1].clamp(0.0, r_max), v[2].clamp(0.0, std::f64::consts::PI));
        modulation_signed(&x, &y, 1.0, -1.0, big_m, m)
    };
    let node = |i: usize, j: usize, k: usize| {
        [
            r_max * i as f64 / (G - 1) as f64,
            r_max * j as f64 / (G - 1) as f64,
            std::f64::consts::PI * k as f64 / (G - 1) as f64,
        ]
    };
    let vals: Vec<f64> = (0..G * G * G)
        .into_par_iter()
        .map(|idx| g(&node(idx / (G * G), (idx / G) % G, idx % G)))
        .collect();
    let mut best: Vec<(f64, [f64; 3])> = Vec::new();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|a, b| vals[*a].abs().partial_cmp(&vals[*b].abs()).unwrap().then(a.cmp(b)));
    for &idx in order.iter().take(50) {
        let start = node(idx / (G * G), (idx / G) % G, idx % G);
        let (v, x) = nelder_mead(|p| g(p).abs(), start, [r_max / G as f64, r_max / G as f64, 0.05], 400);
        best.push((v, x));
        best.push((vals[idx].abs(), start));
    }
    // bisect the first sign change found along the grid
    'outer: for i in 0..G {
        for j in 0..G {
            for k in 0..G - 1 {
                let a = vals[(i * G + j) * G + k];
                let b = vals[(i * G + j) * G + k + 1];
                if a == 0.0 || a.signum() != b.signum() {
                    let (mut lo, mut hi) = (node(i, j, k), node(i, j, k + 1));
                    let sa = a.signum();
                    for _ in 0..200 {
                        let mid = [lo[0], lo[1], 0.5 * (lo[2] + hi[2])];
                        if g(&mid).signum() == sa {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    best.push((g(&lo).abs(), lo));
                    best.push((g(&hi).abs(), hi));
                    break 'outer;
                }
            }
        }
    }
    let (v, x) = best.into_iter().fold((f64::INFINITY, [0.0; 3]), |a, b| if b.0 < a.0 { b } else { a });
    let (xi, eta) = pt(x[0].clamp(0.0, r_max), x[1].clamp(0.0, r_max), x[2].clamp(0.0, std::f64::consts::PI));
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let crossing = lo < -1e-9 && hi > 1e-9;
    let classification = match (v <= tol, crossing) {
        (true, true) => Regime::Resonant,
        (true, false) => Regime::WeaklyResonant,
        _ => Regime::NonResonant,
    };
    Ok(ResonanceResult {
        min_value: v,
        argmin: (xi, eta),
        classification,
        expected: expected_regime(big_m, m),
    })
}

fn nelder_mead<const D: usize>(f: impl Fn(&[f64; D]) -> f64, x0: [f64; D], step: [f64; D], iters: usize) -> (f64, [f64; D]) {
    let mut simplex: Vec<([f64; D], f64)> = vec![(x0, f(&x0))];
    for d in 0..D {
        let mut p = x0;
        p[d] += step[d];
        simplex.push((p, f(&p)));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut cen = [0.0; D];
        for s in &simplex[..D] {
            for d in 0..D {
                cen[d] += s.0[d] / D as f64;
            }
        }
        let worst = simplex[D];
        let lerp = |t: f64| {
            let mut p = [0.0; D];
            for d in 0..D {
                p[d] = cen[d] + t * (worst.0[d] - cen[d]);
            }
            p
        };
        let r = lerp(-1.0);
        let fr = f(&r);
        if fr < simplex[0].1 {
            let e = lerp(-2.0);
            let fe = f(&e);
            simplex[D] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[D - 1].1 {
            simplex[D] = (r, fr);
        } else {
            let k = lerp(0.5);
            let fk = f(&k);
            if fk < worst.1 {
                simplex[D] = (k, fk);
            } else {
                let b = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    for d in 0..D {
                        s.0[d] = b[d] + 0.5 * (s.0[d] - b[d]);
                    }
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].1, simplex[0].0)
}

/// Null-form multiplier regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullMode {
    /// Cap localisation `R_kappa P_lambda`, `alpha >~ 1/lambda`.
    Cap,
    /// Cap and cube `R_kappa P_q P_lambda`, `alpha <~ 1/lambda`, cube side `lambda^2 alpha`.
    CapCube,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullMultiplierResult {
    /// Largest `||(Pi - Pi(ref)) f|| / (alpha ||f||)` over trials.
    pub max_ratio: f64,
    /// Mean of `||(Pi - Pi(ref)) f|| / ||f||` over trials.
    pub mean_relative_numerator: f64,
}

/// Multiplier experiment for the projector difference on cap (and cube) localised spinors.
/// Only `r = 2` is supported.
///
/// Fields are random spinor coefficient arrays on a frequency lattice resolving the support; the
/// localisation symbol is `rho(|xi|/lambda) * b(angle/alpha) * cube bump`, so by Plancherel the
/// `L^2_x` ratio is computed on the Fourier side.
pub fn nullform_multiplier_ratio(
    lambda: f64,
    alpha: f64,
    mode: NullMode,
    r: f64,
    big_m: f64,
    sign: f64,
    trials: usize,
    seed: u64,
) -> Result<NullMultiplierResult> {
    if r != 2.0 {
        return Err(Error::InvalidParameter(format!("only r = 2 is supported, got {r}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) || trials == 0 {
        return Err(Error::InvalidParameter("need 0 < alpha <= 1 and trials >= 1".into()));
    }
    match mode {
        NullMode::Cap if alpha * lambda < 0.999 => return Err(Error::Regime("cap mode needs alpha >= 1/lambda".into())),
        NullMode::CapCube if alpha * lambda > 1.001 => {
            return Err(Error::Regime("cap-cube mode needs alpha <= 1/lambda".into()))
        }
        _ => {}
    }
    let alg = DiracAlgebra::new();
    let omega = [1.0, 0.0, 0.0];
    // support box: radial extent and transverse extent
    let (r_lo, r_hi, xi0) = match mode {
        NullMode::Cap => (lambda / 2.0, 2.0 * lambda, [lambda, 0.0, 0.0]),
        NullMode::CapCube => {
            let side = lambda * lambda * alpha;
            (lambda - side / 2.0, lambda + side / 2.0, [lambda, 0.0, 0.0])
        }
    };
    let trans = r_hi * alpha.sin().abs().max(alpha.min(1.0));
    let nr = 24usize;
    let nt = 24usize;
    let mut pts: Vec<([f64; 3], f64)> = vec![];
    for a in 0..nr {
        let x = r_lo + (r_hi - r_lo) * (a as f64 + 0.5) / nr as f64;
        for b in 0..nt {
            for cc in 0..nt {
                let y = -trans + 2.0 * trans * (b as f64 + 0.5) / nt as f64;
                let z = -trans + 2.0 * trans * (cc as f64 + 0.5) / nt as f64;
                let p = [x, y, z];
                let r = norm(&p);
                let th = angle(&p, &omega);
                let mut w = bump::phi(th / alpha);
                w *= match mode {
                    NullMode::Cap => bump::rho(r / lambda),
                    NullMode::CapCube => {
                        let side = lambda * lambda * alpha;
                        bump::phi(2.0 * (x - xi0[0]) / side) * bump::phi(2.0 * y / side) * bump::phi(2.0 * z / side)
                    }
                };
                if w > 0.0 {
                    pts.push((p, w));
                }
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::EmptySamples("empty localisation support".into()));
    }
    let p_ref = alg.projector(&xi0, big_m, sign)?;
    let diffs: Vec<M4> = pts.iter().map(|(p, _)| Ok(alg.projector(p, big_m, sign)? - p_ref)).collect::<Result<_>>()?;
    let mut max_ratio: f64 = 0.0;
    let mut mean = 0.0;
    for t in 0..trials {
        let mut r = rng(seed, t as u64);
        let (mut num, mut den) = (0.0, 0.0);
        for ((_, w), d) in pts.iter().zip(&diffs) {
            let v = Vector4::from_fn(|_, _| C::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))) * c(*w);
            num += (d * v).norm_squared();
            den += v.norm_squared();
        }
        let rel = (num / den).sqrt();
        mean += rel / trials as f64;
        max_ratio = max_ratio.max(rel / alpha);
    }
    Ok(NullMultiplierResult { max_ratio, mean_relative_numerator: mean })
}
