use crate::error::{Error, Result};
use crate::phases::PhaseModel;
use crate::util::fft;
use num_complex::Complex64 as C;
use rayon::prelude::*;

/// Samples of a function on the torus `[0, L)^n`, `points` per axis, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub dim: usize,
    pub box_length: f64,
    pub points: usize,
    pub samples: Vec<C>,
}

fn check_layout(dim: usize, box_length: f64, points: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    if !points.is_power_of_two() || points < 2 {
        return Err(Error::InvalidParameter(format!("points per axis must be a power of two, got {points}")));
    }
    if !(box_length > 0.0 && box_length.is_finite()) {
        return Err(Error::InvalidParameter(format!("box length must be positive, got {box_length}")));
    }
    Ok(())
}

impl GridField {
    pub fn new(dim: usize, box_length: f64, points: usize, samples: Vec<C>) -> Result<Self> {
        check_layout(dim, box_length, points)?;
        if samples.len() != points.pow(dim as u32) {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                points.pow(dim as u32),
                samples.len()
            )));
        }
        Ok(GridField { dim, box_length, points, samples })
    }

    pub fn zeros(dim: usize, box_length: f64, points: usize) -> Result<Self> {
        check_layout(dim, box_length, points)?;
        Ok(GridField { dim, box_length, points, samples: vec![C::new(0.0, 0.0); points.pow(dim as u32)] })
    }

    /// Samples `f` at the nodes `x_j = j L / points`.
    pub fn from_fn(dim: usize, box_length: f64, points: usize, f: impl Fn(&[f64]) -> C + Sync) -> Result<Self> {
        let mut g = Self::zeros(dim, box_length, points)?;
        let h = box_length / points as f64;
        g.samples.par_iter_mut().enumerate().for_each(|(i, v)| {
            let mut x = [0.0; 3];
            for (d, xd) in x.iter_mut().enumerate().take(dim) {
                *xd = h * ((i / points.pow((dim - 1 - d) as u32)) % points) as f64;
            }
            *v = f(&x[..dim]);
        });
        Ok(g)
    }

    /// Field whose DFT coefficients are `g(xi_k)`, `xi_k = 2 pi k / L`.
    pub fn from_fourier_fn(dim: usize, box_length: f64, points: usize, g: impl Fn(&[f64]) -> C + Sync) -> Result<Self> {
        let mut f = Self::zeros(dim, box_length, points)?;
        let shape = f.shape();
        let lay = f.clone_layout();
        f.samples.par_iter_mut().enumerate().for_each(|(i, v)| {
            let xi = lay.frequency(i);
            *v = g(&xi[..dim]);
        });
        fft::inverse(&mut f.samples, &shape);
        Ok(f)
    }

    fn clone_layout(&self) -> GridField {
        GridField { dim: self.dim, box_length: self.box_length, points: self.points, samples: Vec::new() }
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.dim]
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lattice frequency spacing `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    /// Frequency of DFT bin `i`; entries beyond `dim` are zero.
    pub fn frequency(&self, i: usize) -> [f64; 3] {
        let mut xi = [0.0; 3];
        let dk = self.dk();
        for (d, v) in xi.iter_mut().enumerate().take(self.dim) {
            let k = (i / self.points.pow((self.dim - 1 - d) as u32)) % self.points;
            *v = dk * fft::signed_index(k, self.points) as f64;
        }
        xi
    }

    pub fn position(&self, i: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        let h = self.spacing();
        for (d, v) in x.iter_mut().enumerate().take(self.dim) {
            *v = h * ((i / self.points.pow((self.dim - 1 - d) as u32)) % self.points) as f64;
        }
        x
    }

    /// `(sum |f|^2 cell)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.par_iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.par_iter().map(|v| v.norm()).reduce(|| 0.0, f64::max)
    }

    /// Unnormalized DFT coefficients.
    pub fn fourier(&self) -> Vec<C> {
        let mut c = self.samples.clone();
        fft::forward(&mut c, &self.shape());
        c
    }

    /// Physical `L^2` norm computed from DFT coefficients (Parseval).
    pub fn fourier_l2_norm(&self, coeffs: &[C]) -> f64 {
        let n = self.len() as f64;
        (coeffs.par_iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume() / n).sqrt()
    }

    pub fn from_coefficients(&self, mut coeffs: Vec<C>) -> GridField {
        fft::inverse(&mut coeffs, &self.shape());
        GridField { samples: coeffs, ..self.clone_layout() }
    }

    /// Multiplies the DFT coefficients by `m(xi)`.
    pub fn map_fourier(&self, m: impl Fn(&[f64]) -> C + Sync) -> GridField {
        let mut c = self.fourier();
        c.par_iter_mut().enumerate().for_each(|(i, v)| {
            let xi = self.frequency(i);
            *v *= m(&xi[..self.dim]);
        });
        self.from_coefficients(c)
    }

    pub fn same_layout(&self, o: &GridField) -> bool {
        self.dim == o.dim && self.points == o.points && self.box_length == o.box_length
    }

    pub fn sub(&self, o: &GridField) -> GridField {
        let samples = self.samples.iter().zip(&o.samples).map(|(a, b)| a - b).collect();
        GridField { samples, ..self.clone_layout() }
    }

    pub fn add(&self, o: &GridField) -> GridField {
        let samples = self.samples.iter().zip(&o.samples).map(|(a, b)| a + b).collect();
        GridField { samples, ..self.clone_layout() }
    }
}

/// `e^{i t Phi(-i nabla)} f`.
pub fn propagate(f: &GridField, model: &PhaseModel, t: f64) -> Result<GridField> {
    model.validate()?;
    if f.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("field has non-finite samples".into()));
    }
    Ok(f.map_fourier(|xi| C::from_polar(1.0, t * model.value(xi))))
}

/// Free evolution sampled at `t0 + j dt`, `j < count`.
pub fn propagate_series(f: &GridField, model: &PhaseModel, t0: f64, dt: f64, count: usize) -> Result<SpaceTimeField> {
    model.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter("need at least one time sample".into()));
    }
    let c = f.fourier();
    let phases: Vec<f64> = (0..c.len()).map(|i| model.value(&f.frequency(i)[..f.dim])).collect();
    let n = f.len();
    let mut samples = vec![C::new(0.0, 0.0); n * count];
    samples.par_chunks_mut(n).enumerate().for_each(|(j, slot)| {
        let t = t0 + dt * j as f64;
        for ((s, a), p) in slot.iter_mut().zip(&c).zip(&phases) {
            *s = a * C::from_polar(1.0, t * p);
        }
        fft::inverse(slot, &f.shape());
    });
    Ok(SpaceTimeField {
        dim: f.dim,
        box_length: f.box_length,
        points: f.points,
        t0,
        time_step: dt,
        time_samples: count,
        samples,
    })
}

/// Samples `u(t0 + j dt, x)`, time-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    pub dim: usize,
    pub box_length: f64,
    pub points: usize,
    pub t0: f64,
    pub time_step: f64,
    pub time_samples: usize,
    pub samples: Vec<C>,
}

impl SpaceTimeField {
    pub fn from_slices(slices: &[GridField], t0: f64, dt: f64) -> Result<Self> {
        let first = slices.first().ok_or_else(|| Error::InvalidParameter("no time slices".into()))?;
        if slices.iter().any(|s| !s.same_layout(first)) {
            return Err(Error::InvalidParameter("time slices have different layouts".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter("time step must be positive".into()));
        }
        Ok(SpaceTimeField {
            dim: first.dim,
            box_length: first.box_length,
            points: first.points,
            t0,
            time_step: dt,
            time_samples: slices.len(),
            samples: slices.iter().flat_map(|s| s.samples.iter().cloned()).collect(),
        })
    }

    pub fn space_len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn slice(&self, j: usize) -> GridField {
        let n = self.space_len();
        GridField {
            dim: self.dim,
            box_length: self.box_length,
            points: self.points,
            samples: self.samples[j * n..(j + 1) * n].to_vec(),
        }
    }

    pub fn layout(&self) -> GridField {
        GridField { dim: self.dim, box_length: self.box_length, points: self.points, samples: Vec::new() }
    }

    pub fn cell_volume(&self) -> f64 {
        (self.box_length / self.points as f64).powi(self.dim as i32)
    }

    /// Pointwise product, used for bilinear norms.
    pub fn product(&self, o: &SpaceTimeField) -> Result<SpaceTimeField> {
        if self.samples.len() != o.samples.len() || self.points != o.points || self.dim != o.dim {
            return Err(Error::InvalidParameter("space-time layouts differ".into()));
        }
        let samples = self.samples.par_iter().zip(&o.samples).map(|(a, b)| a * b).collect();
        Ok(SpaceTimeField { samples, ..self.clone() })
    }
}

fn lp(vals: impl Iterator<Item = f64>, p: f64, w: f64) -> f64 {
    if p.is_infinite() {
        vals.fold(0.0, f64::max)
    } else {
        (vals.map(|v| v.powf(p)).sum::<f64>() * w).powf(1.0 / p)
    }
}

/// Riemann-sum `L^a_t L^b_x` norm; `f64::INFINITY` selects the max.
pub fn spacetime_norm(u: &SpaceTimeField, a: f64, b: f64) -> Result<f64> {
    if !(a >= 1.0 && b >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponents must be >= 1, got ({a}, {b})")));
    }
    let n = u.space_len();
    let cell = u.cell_volume();
    let inner: Vec<f64> = u
        .samples
        .par_chunks(n)
        .map(|s| lp(s.iter().map(|v| v.norm()), b, cell))
        .collect();
    Ok(lp(inner.into_iter(), a, u.time_step))
}
