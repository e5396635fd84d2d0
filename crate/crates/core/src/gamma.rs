//! Gamma and log-Gamma on the real line.
//!
//! `ln_gamma` returns `ln|Γ(x)|` together with the sign of `Γ(x)` so that
//! ratios of Gamma values can be formed without overflow.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Absolute tolerance used to decide that a real number is an integer.
pub const INTEGER_TOL: f64 = 1e-12;

/// Returns `Some(m)` when `x` lies within [`INTEGER_TOL`] of the nonpositive integer `-m`.
pub fn nonpositive_integer(x: f64) -> Option<u64> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() <= INTEGER_TOL {
        Some((-r) as u64)
    } else {
        None
    }
}

/// `sin(πx)` with argument reduction, exact zero at integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

fn ln_gamma_positive(x: f64) -> f64 {
    // Lanczos approximation, valid for x >= 0.5.
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `(ln|Γ(x)|, sign Γ(x))`. Fails at the poles `x = 0, -1, -2, ...`.
pub fn ln_gamma(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(domain(format!("ln_gamma of non-finite argument {x}")));
    }
    if nonpositive_integer(x).is_some() {
        return Err(domain(format!("Gamma pole at {x}")));
    }
    if x >= 0.5 {
        return Ok((ln_gamma_positive(x), 1.0));
    }
    // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
    let s = sin_pi(x);
    let lg = PI.ln() - s.abs().ln() - ln_gamma_positive(1.0 - x);
    Ok((lg, s.signum()))
}

/// Γ(x) on the real line.
pub fn gamma(x: f64) -> Result<f64> {
    let (lg, sign) = ln_gamma(x)?;
    Ok(sign * lg.exp())
}
