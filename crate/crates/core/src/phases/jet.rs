//! Truncated multivariate Taylor jets, used for exact partial derivatives of the phases.

use std::collections::HashMap;
use std::sync::Arc;

/// Monomial basis of total degree `<= degree` in `dim` variables with a product table.
#[derive(Debug)]
pub struct Basis {
    pub dim: usize,
    pub degree: usize,
    pub exps: Vec<Vec<u32>>,
    mul: Vec<Vec<Option<usize>>>,
}

impl Basis {
    pub fn new(dim: usize, degree: usize) -> Arc<Self> {
        let mut exps: Vec<Vec<u32>> = vec![];
        fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if cur.len() == dim {
                out.push(cur.clone());
                return;
            }
            for e in 0..=left {
                cur.push(e);
                rec(dim, left - e, cur, out);
                cur.pop();
            }
        }
        rec(dim, degree as u32, &mut vec![], &mut exps);
        exps.sort_by_key(|e| e.iter().sum::<u32>());
        let index: HashMap<Vec<u32>, usize> = exps.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let mul = exps
            .iter()
            .map(|a| {
                exps.iter()
                    .map(|b| {
                        let c: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        index.get(&c).copied()
                    })
                    .collect()
            })
            .collect();
        Arc::new(Basis { dim, degree, exps, mul })
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.exps.iter().position(|x| x == e)
    }

    /// `kappa!` for monomial `i`.
    pub fn factorial(&self, i: usize) -> f64 {
        self.exps[i].iter().map(|&e| (1..=e).map(|k| k as f64).product::<f64>()).product()
    }
}

#[derive(Clone, Debug)]
pub struct Jet {
    pub basis: Arc<Basis>,
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(basis: &Arc<Basis>, v: f64) -> Self {
        let mut c = vec![0.0; basis.len()];
        c[0] = v;
        Jet { basis: basis.clone(), c }
    }

    /// The jet of `x_i` about the point `x0_i`.
    pub fn variable(basis: &Arc<Basis>, i: usize, x0: f64) -> Self {
        let mut j = Self::constant(basis, x0);
        if basis.degree >= 1 {
            let mut e = vec![0; basis.dim];
            e[i] = 1;
            let k = basis.index_of(&e).expect("degree-1 monomial");
            j.c[k] = 1.0;
        }
        j
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { basis: self.basis.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { basis: self.basis.clone(), c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.basis.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if let Some(k) = self.basis.mul[i][j] {
                    c[k] += self.c[i] * o.c[j];
                }
            }
        }
        Jet { basis: self.basis.clone(), c }
    }

    /// Square root via the binomial series; requires a positive constant term.
    pub fn sqrt(&self) -> Jet {
        let q0 = self.c[0];
        assert!(q0 > 0.0, "sqrt of a jet with non-positive constant term");
        let mut u = self.scale(1.0 / q0);
        u.c[0] = 0.0;
        let mut out = Jet::constant(&self.basis, 1.0);
        let mut pow = Jet::constant(&self.basis, 1.0);
        let mut binom = 1.0;
        for k in 1..=self.basis.degree {
            binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
            pow = pow.mul(&u);
            out = out.add(&pow.scale(binom));
        }
        out.scale(q0.sqrt())
    }

    /// `d^kappa` at the expansion point for monomial index `i`.
    pub fn derivative(&self, i: usize) -> f64 {
        self.c[i] * self.basis.factorial(i)
    }
}
