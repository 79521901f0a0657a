use super::jet::{Basis, Jet};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Schroedinger,
    KleinGordon,
}

/// Anisotropic rescalings of the Klein-Gordon phase used for the small-scale estimates.
///
/// Both forms evaluate `pref * (sign * sqrt(m^2 + (a1 xi_1)^2 + b^2 |xi'|^2) - v xi_1)` with
/// `pref = -1 / (alpha^2 lambda)`:
/// * `CapI`: `a1 = lambda`, `b = alpha lambda`, `v = lambda`;
/// * `SlabII`: `a1 = alpha lambda^2`, `b = alpha lambda`, `v = alpha lambda^2 c1 / <c1>_{m1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Rescale {
    CapI { alpha: f64, lambda: f64 },
    SlabII { alpha: f64, lambda: f64, c1: f64, m1: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseModel {
    pub kind: PhaseKind,
    #[serde(default)]
    pub mass: f64,
    #[serde(default = "one")]
    pub sign: f64,
    #[serde(default)]
    pub rescale: Option<Rescale>,
}

fn one() -> f64 {
    1.0
}

/// Value, gradient and Hessian at one frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

/// Coefficients of the square-root form `p * sqrt(m^2 + d1 xi_1^2 + d2 |xi'|^2) - v xi_1`.
#[derive(Clone, Copy, Debug)]
struct RootForm {
    m2: f64,
    d1: f64,
    d2: f64,
    p: f64,
    v: f64,
}

impl PhaseModel {
    pub fn schroedinger() -> Self {
        PhaseModel { kind: PhaseKind::Schroedinger, mass: 0.0, sign: 1.0, rescale: None }
    }

    pub fn klein_gordon(mass: f64) -> Self {
        PhaseModel { kind: PhaseKind::KleinGordon, mass, sign: 1.0, rescale: None }
    }

    pub fn wave() -> Self {
        Self::klein_gordon(0.0)
    }

    pub fn with_sign(mut self, sign: f64) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_rescale(mut self, r: Rescale) -> Self {
        self.rescale = Some(r);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be non-negative, got {}", self.mass)));
        }
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {}", self.sign)));
        }
        if let Some(r) = self.rescale {
            if self.kind != PhaseKind::KleinGordon {
                return Err(Error::InvalidParameter("rescaling applies to klein_gordon only".into()));
            }
            let (a, l) = match r {
                Rescale::CapI { alpha, lambda } => (alpha, lambda),
                Rescale::SlabII { alpha, lambda, .. } => (alpha, lambda),
            };
            if !(a > 0.0 && l > 0.0) {
                return Err(Error::InvalidParameter("rescale needs alpha, lambda > 0".into()));
            }
        }
        Ok(())
    }

    fn root_form(&self) -> Option<RootForm> {
        if self.kind == PhaseKind::Schroedinger {
            return None;
        }
        let m2 = self.mass * self.mass;
        Some(match self.rescale {
            None => RootForm { m2, d1: 1.0, d2: 1.0, p: self.sign, v: 0.0 },
            Some(Rescale::CapI { alpha, lambda }) => {
                let pref = -1.0 / (alpha * alpha * lambda);
                let b = alpha * lambda;
                RootForm { m2, d1: lambda * lambda, d2: b * b, p: self.sign * pref, v: pref * lambda }
            }
            Some(Rescale::SlabII { alpha, lambda, c1, m1 }) => {
                let pref = -1.0 / (alpha * alpha * lambda);
                let a1 = alpha * lambda * lambda;
                let b = alpha * lambda;
                let drift = a1 * c1 / (m1 * m1 + c1 * c1).sqrt();
                RootForm { m2, d1: a1 * a1, d2: b * b, p: self.sign * pref, v: pref * drift }
            }
        })
    }

    /// `Phi(xi)`. Always defined (the wave phase is `|xi|`, which is 0 at the origin).
    #[inline]
    pub fn value(&self, xi: &[f64]) -> f64 {
        match self.root_form() {
            None => 0.5 * self.sign * xi.iter().map(|x| x * x).sum::<f64>(),
            Some(f) => {
                let q = f.m2 + f.d1 * xi[0] * xi[0] + f.d2 * xi[1..].iter().map(|x| x * x).sum::<f64>();
                f.p * q.sqrt() - f.v * xi[0]
            }
        }
    }

    fn root_q(&self, f: &RootForm, xi: &[f64]) -> Result<f64> {
        let q = f.m2 + f.d1 * xi[0] * xi[0] + f.d2 * xi[1..].iter().map(|x| x * x).sum::<f64>();
        if q <= 0.0 {
            return Err(Error::Singularity);
        }
        Ok(q)
    }

    pub fn gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        match self.root_form() {
            None => Ok(xi.iter().map(|x| self.sign * x).collect()),
            Some(f) => {
                let s = self.root_q(&f, xi)?.sqrt();
                let mut g: Vec<f64> = xi
                    .iter()
                    .enumerate()
                    .map(|(i, x)| f.p * if i == 0 { f.d1 } else { f.d2 } * x / s)
                    .collect();
                g[0] -= f.v;
                Ok(g)
            }
        }
    }

    pub fn hessian(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        let n = xi.len();
        match self.root_form() {
            None => Ok(DMatrix::identity(n, n) * self.sign),
            Some(f) => {
                let s = self.root_q(&f, xi)?.sqrt();
                let d = |i: usize| if i == 0 { f.d1 } else { f.d2 };
                Ok(DMatrix::from_fn(n, n, |i, j| {
                    let diag = if i == j { d(i) / s } else { 0.0 };
                    f.p * (diag - d(i) * xi[i] * d(j) * xi[j] / (s * s * s))
                }))
            }
        }
    }

    /// Largest `|d^kappa Phi(xi)|` over multi-indices `1 <= |kappa| <= order`.
    pub fn derivative_sup(&self, xi: &[f64], order: usize) -> Result<f64> {
        let b = Basis::new(xi.len(), order);
        let vars: Vec<Jet> = xi.iter().enumerate().map(|(i, &x)| Jet::variable(&b, i, x)).collect();
        let jet = match self.root_form() {
            None => {
                let mut acc = Jet::constant(&b, 0.0);
                for v in &vars {
                    acc = acc.add(&v.mul(v));
                }
                acc.scale(0.5 * self.sign)
            }
            Some(f) => {
                self.root_q(&f, xi)?;
                let mut q = Jet::constant(&b, f.m2);
                for (i, v) in vars.iter().enumerate() {
                    q = q.add(&v.mul(v).scale(if i == 0 { f.d1 } else { f.d2 }));
                }
                q.sqrt().scale(f.p).add(&vars[0].scale(-f.v))
            }
        };
        Ok((1..b.len()).map(|i| jet.derivative(i).abs()).fold(0.0, f64::max))
    }
}

/// Value, gradient and Hessian in one call.
pub fn eval_phase_suite(model: &PhaseModel, xi: &[f64]) -> Result<PhaseEval> {
    model.validate()?;
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite frequency".into()));
    }
    Ok(PhaseEval { value: model.value(xi), gradient: model.gradient(xi)?, hessian: model.hessian(xi)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let w = eval_phase_suite(&PhaseModel::wave(), &[3.0, 4.0]).unwrap();
        assert_eq!(w.value, 5.0);
        assert!((w.gradient[0] - 0.6).abs() < 1e-15 && (w.gradient[1] - 0.8).abs() < 1e-15);

        let s = eval_phase_suite(&PhaseModel::schroedinger(), &[1.0, 0.0]).unwrap();
        assert_eq!(s.value, 0.5);
        assert_eq!(s.gradient, vec![1.0, 0.0]);
        assert_eq!(s.hessian, DMatrix::identity(2, 2));

        let k = eval_phase_suite(&PhaseModel::klein_gordon(1.0), &[0.0, 0.0]).unwrap();
        assert_eq!(k.value, 1.0);
        assert_eq!(k.gradient, vec![0.0, 0.0]);
    }

    #[test]
    fn wave_origin_is_singular() {
        assert_eq!(eval_phase_suite(&PhaseModel::wave(), &[0.0, 0.0]), Err(Error::Singularity));
        assert_eq!(PhaseModel::wave().value(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn rescaled_cap_matches_direct_substitution() {
        let (alpha, lambda, m) = (0.25, 32.0, 1.0);
        let p = PhaseModel::klein_gordon(m).with_rescale(Rescale::CapI { alpha, lambda });
        let xi = [1.1, 0.3];
        let direct = -1.0 / (alpha * alpha * lambda)
            * ((m * m + (lambda * xi[0]).powi(2) + (alpha * lambda * xi[1]).powi(2)).sqrt() - lambda * xi[0]);
        assert!((p.value(&xi) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        let minus = p.with_sign(-1.0);
        let direct_minus = 1.0 / (alpha * alpha * lambda)
            * ((m * m + (lambda * xi[0]).powi(2) + (alpha * lambda * xi[1]).powi(2)).sqrt() + lambda * xi[0]);
        assert!((minus.value(&xi) - direct_minus).abs() < 1e-12 * direct_minus.abs());
    }

    #[test]
    fn derivative_sup_schroedinger() {
        // 1/2 |xi|^2: first derivatives xi_i, second derivatives 1, nothing higher.
        let d = PhaseModel::schroedinger().derivative_sup(&[3.0, -0.5], 4).unwrap();
        assert!((d - 3.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_sup_kg_one_dimensional() {
        // <xi> in one dimension at xi = 0: derivatives 0, 1, 0, -3 -> sup 3.
        let d = PhaseModel::klein_gordon(1.0).derivative_sup(&[0.0], 4).unwrap();
        assert!((d - 3.0).abs() < 1e-13);
    }
}
