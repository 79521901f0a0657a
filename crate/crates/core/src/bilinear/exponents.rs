use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMode {
    /// The mixed-norm region that follows from the bilinear estimate.
    Bilinear,
    /// The weaker region obtained from homogeneous estimates alone.
    Homogeneous,
}

/// Each strict inequality of a mixed-exponent region, evaluated separately.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentConditions {
    pub a_above_one: bool,
    /// `1/a + (n+1)/(2b) < (n+1)/2`.
    pub strichartz_line: bool,
    /// The mode-specific condition.
    pub branch: bool,
}

impl ExponentConditions {
    pub fn all(&self) -> bool {
        self.a_above_one && self.strichartz_line && self.branch
    }
}

pub fn exponent_conditions(a: f64, b: f64, n: usize, mode: ExponentMode) -> ExponentConditions {
    let nf = n as f64;
    let (ia, ib) = (1.0 / a, 1.0 / b);
    let branch = match (mode, n) {
        (ExponentMode::Bilinear, 2) => ia + 0.25 * ib < 0.5 + 5.0 / 12.0 * ib,
        (ExponentMode::Bilinear, _) => ia + (nf - 1.0) / 4.0 * ib < (nf + 1.0) / 4.0,
        (ExponentMode::Homogeneous, 2) => ia < 0.5,
        (ExponentMode::Homogeneous, _) => ia < (nf - 1.0) / (nf + 3.0) * (nf / 2.0 - (nf + 1.0) / 2.0 * ib) + 0.5,
    };
    ExponentConditions {
        a_above_one: a > 1.0,
        strichartz_line: ia + (nf + 1.0) / 2.0 * ib < (nf + 1.0) / 2.0,
        branch,
    }
}

/// Whether `(a, b)` lies in the open region of the selected mode (requires `n >= 2`).
pub fn admissible_mixed_exponents(a: f64, b: f64, n: usize, mode: ExponentMode) -> bool {
    n >= 2 && b >= 1.0 && exponent_conditions(a, b, n, mode).all()
}
