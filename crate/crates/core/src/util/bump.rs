//! Smooth compactly supported profiles shared by the multipliers and window functions.
//!
//! The base profile is `phi(s) = exp(1 - 1/(1 - s^2))` on `|s| < 1`, zero elsewhere.
//! `step(x) = B(x) / (B(x) + B(1 - x))` with `B(x) = phi(1 - x)` on `(0, 1]` is a smooth
//! monotone step from 0 to 1 on `[0, 1]`, and `step(x) + step(1 - x) = 1`.

/// `exp(1 - 1/(1 - s^2))` for `|s| < 1`, else 0. Equals 1 at `s = 0`.
pub fn phi(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

fn b(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        phi(1.0 - x)
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let (l, r) = (b(x), b(1.0 - x));
        l / (l + r)
    }
}

/// Low-pass profile: 1 on `[0, 1]`, `step(2 - t)` on `[1, 2]`, 0 beyond 2.
pub fn chi(t: f64) -> f64 {
    step(2.0 - t)
}

/// Dyadic profile `chi(t) - chi(2t)`, supported in `(1/2, 2)`; `sum_k rho(t / 2^k) = 1` for `t > 0`.
pub fn rho(t: f64) -> f64 {
    chi(t) - chi(2.0 * t)
}

/// One-dimensional partition profile with unit spacing and overlap `w`:
/// supported in `[-1/2 - w, 1/2 + w]` and `sum_k psi(s - k, w) = 1`.
pub fn psi(s: f64, w: f64) -> f64 {
    step((s + 0.5 + w) / (2.0 * w)) * step((0.5 + w - s) / (2.0 * w))
}
