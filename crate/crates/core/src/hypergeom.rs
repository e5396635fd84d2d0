//! Gauss hypergeometric function ₂F₁(a, b; c; x) on the real segment `[-1, 1]`.
//!
//! Four evaluation routes are provided:
//!
//! - [`gauss_2f1_series`]: the defining power series, summed exactly when it
//!   terminates and otherwise until the term falls below `1e-16 |sum|`.
//!   Close to `x = 1` the tail decays only algebraically; if the term cap is
//!   reached the partial sums are extrapolated (Richardson in the known
//!   exponent `c - a - b` at `x = 1`, a Levin u-transform elsewhere).
//! - [`gauss_2f1_integral`]: Euler's integral, by Gauss–Jacobi quadrature in
//!   the Beta weight `t^{b-1} (1-t)^{c-b-1}`.
//! - [`gauss_2f1_derivative`]: `(ab/c) ₂F₁(a+1, b+1; c+1; x)`.
//! - [`gauss_2f1_at_one`]: Gauss summation in log-Gamma space.

use crate::error::{domain, Error, Result};
use crate::gamma::{ln_gamma, nonpositive_integer, INTEGER_TOL};
use crate::quadrature::gauss_jacobi;

/// Hard cap on the number of series terms.
pub const MAX_SERIES_TERMS: usize = 100_000;
/// Relative size of the last term at which summation stops.
pub const SERIES_RTOL: f64 = 1e-16;
/// Node count for the Euler-integral route.
pub const INTEGRAL_NODES: usize = 200;

/// Parameters `(a, b, c)` of ₂F₁. Values within [`INTEGER_TOL`] of a
/// nonpositive integer are snapped onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeomParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

fn snap(v: f64) -> f64 {
    match nonpositive_integer(v) {
        Some(m) => -(m as f64),
        None => v,
    }
}

impl HypergeomParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(domain(format!("non-finite parameters ({a}, {b}; {c})")));
        }
        if nonpositive_integer(c).is_some() {
            return Err(domain(format!("c = {c} is zero or a negative integer")));
        }
        Ok(Self {
            a: snap(a),
            b: snap(b),
            c,
        })
    }

    /// Degree of the polynomial when the series terminates.
    pub fn terminating_degree(&self) -> Option<u64> {
        match (nonpositive_integer(self.a), nonpositive_integer(self.b)) {
            (Some(m), Some(k)) => Some(m.min(k)),
            (Some(m), None) | (None, Some(m)) => Some(m),
            (None, None) => None,
        }
    }

    pub fn is_terminating(&self) -> bool {
        self.terminating_degree().is_some()
    }

    /// `c - a - b`, the exponent governing behaviour at `x = 1`.
    pub fn excess(&self) -> f64 {
        self.c - self.a - self.b
    }

    /// Parameters of the derivative, `(a+1, b+1; c+1)`.
    pub fn shifted(&self) -> Result<Self> {
        Self::new(self.a + 1.0, self.b + 1.0, self.c + 1.0)
    }
}

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prod = 1.0;
    for j in 0..k {
        prod *= a + j as f64;
        if prod == 0.0 {
            return 0.0;
        }
        if !prod.is_finite() || prod.abs() > 1e290 {
            let (ln_abs, sign) = ln_pochhammer(a, k);
            return sign * ln_abs.exp();
        }
    }
    prod
}

/// `(ln|(a)_k|, sign (a)_k)`; the sign is `0` when a factor vanishes.
pub fn ln_pochhammer(a: f64, k: u64) -> (f64, f64) {
    let mut ln_abs = 0.0;
    let mut sign = 1.0;
    for j in 0..k {
        let f = a + j as f64;
        if f == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        ln_abs += f.abs().ln();
        if f < 0.0 {
            sign = -sign;
        }
    }
    (ln_abs, sign)
}

fn check_series_domain(p: &HypergeomParams, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(domain(format!("non-finite argument {x}")));
    }
    if x.abs() < 1.0 {
        return Ok(());
    }
    if x.abs() == 1.0 && p.excess() > 0.0 {
        return Ok(());
    }
    Err(domain(format!(
        "series for ({}, {}; {}) diverges at x = {x}",
        p.a, p.b, p.c
    )))
}

/// Sum of the hypergeometric series.
pub fn gauss_2f1_series(p: HypergeomParams, x: f64) -> Result<f64> {
    check_series_domain(&p, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if let Some(m) = p.terminating_degree() {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..m {
            let kf = k as f64;
            term *= (p.a + kf) * (p.b + kf) / ((p.c + kf) * (kf + 1.0)) * x;
            sum += term;
        }
        return Ok(sum);
    }

    let mut term = 1.0;
    let mut sum = 1.0;
    // Leading partial sums for the Levin transform.
    let mut partial = vec![sum];
    let mut terms = vec![term];
    const KEEP: usize = 64;
    // Partial sums at N = 500 · 2^j for Richardson extrapolation at x = 1.
    let mut checkpoints = Vec::new();
    let mut next_checkpoint = 500;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        let ratio = (p.a + kf) * (p.b + kf) / ((p.c + kf) * (kf + 1.0)) * x;
        term *= ratio;
        sum += term;
        if partial.len() < KEEP {
            partial.push(sum);
            terms.push(term);
        }
        if k + 1 == next_checkpoint {
            checkpoints.push(sum);
            next_checkpoint *= 2;
        }
        let next_ratio =
            ((p.a + kf + 1.0) * (p.b + kf + 1.0) / ((p.c + kf + 1.0) * (kf + 2.0)) * x).abs();
        if term.abs() < SERIES_RTOL * sum.abs() && next_ratio < 1.0 {
            return Ok(sum);
        }
        if !sum.is_finite() {
            break;
        }
    }
    let accelerated = if x == 1.0 {
        richardson_power_tail(&checkpoints, p.excess())
    } else if x > 0.5 && !is_near_integer(p.excess()) {
        connection_one_minus_x(p, x).ok()
    } else {
        levin_u(&partial, &terms)
    };
    accelerated.ok_or(Error::NoConvergence {
        terms: MAX_SERIES_TERMS,
        x,
    })
}

/// `1/Γ(v)`-weighted log-Gamma combination; a pole in the denominator gives 0.
fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &v in den {
        if nonpositive_integer(v).is_some() {
            return Ok(0.0);
        }
        let (l, sg) = ln_gamma(v)?;
        ln -= l;
        sign *= sg;
    }
    for &v in num {
        let (l, sg) = ln_gamma(v)?;
        ln += l;
        sign *= sg;
    }
    Ok(sign * ln.exp())
}

/// Connection formula between `x` and `1 - x`, for non-integer `c - a - b`.
fn connection_one_minus_x(p: HypergeomParams, x: f64) -> Result<f64> {
    let s = p.excess();
    let y = 1.0 - x;
    let first = gamma_ratio(&[p.c, s], &[p.c - p.a, p.c - p.b])?;
    let second = gamma_ratio(&[p.c, -s], &[p.a, p.b])?;
    let mut value = 0.0;
    if first != 0.0 {
        value += first * gauss_2f1_series(HypergeomParams::new(p.a, p.b, 1.0 - s)?, y)?;
    }
    if second != 0.0 {
        value += second
            * y.powf(s)
            * gauss_2f1_series(HypergeomParams::new(p.c - p.a, p.c - p.b, s + 1.0)?, y)?;
    }
    Ok(value)
}

/// Richardson extrapolation of partial sums `S_N`, `N` doubling, whose
/// error is `N^{-s} (e_0 + e_1/N + ...)` as it is for ₂F₁ at `x = 1`.
fn richardson_power_tail(sums: &[f64], s: f64) -> Option<f64> {
    if sums.len() < 3 {
        return None;
    }
    let mut table = sums.to_vec();
    let mut last_diag = *table.last()?;
    let mut best: Option<(f64, f64)> = None;
    for level in 0..sums.len() - 1 {
        let factor = 2f64.powf(s + level as f64);
        table = table
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        let diag = *table.last()?;
        let diff = (diag - last_diag).abs();
        if best.is_none_or(|(d, _)| diff < d) {
            best = Some((diff, diag));
        }
        last_diag = diag;
    }
    match best {
        Some((diff, est)) if diff <= 1e-10 * est.abs().max(1e-300) => Some(est),
        _ => None,
    }
}

/// Levin u-transform of the partial sums `s_m = Σ_{i<=m} a_i`.
///
/// Returns the estimate whose change from the previous order is smallest,
/// provided that change is below `1e-9` relative.
fn levin_u(partial: &[f64], terms: &[f64]) -> Option<f64> {
    const BETA: f64 = 1.0;
    let n_max = partial.len().min(terms.len());
    let mut best: Option<(f64, f64)> = None;
    let mut prev: Option<f64> = None;
    for k in 1..n_max {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut binom = 1.0;
        let last = BETA + k as f64;
        for j in 0..=k {
            let omega = (BETA + j as f64) * terms[j];
            if omega == 0.0 {
                return None;
            }
            let scale = ((BETA + j as f64) / last).powi(k as i32 - 1);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let coef = sign * binom * scale / omega;
            num += coef * partial[j];
            den += coef;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        let est = num / den;
        if !est.is_finite() {
            continue;
        }
        if let Some(pv) = prev {
            let diff = (est - pv).abs();
            if best.is_none_or(|(d, _)| diff < d) {
                best = Some((diff, est));
            }
        }
        prev = Some(est);
    }
    match best {
        Some((diff, est)) if diff <= 1e-9 * est.abs().max(1e-300) => Some(est),
        _ => None,
    }
}

/// Euler's integral representation, valid for `c > b > 0` and `|x| < 1`.
pub fn gauss_2f1_integral(p: HypergeomParams, x: f64) -> Result<f64> {
    if !(p.c > p.b && p.b > 0.0) {
        return Err(domain(format!(
            "integral representation needs c > b > 0 (b = {}, c = {})",
            p.b, p.c
        )));
    }
    if !(x.abs() < 1.0) {
        return Err(domain(format!(
            "integral representation needs |x| < 1, got {x}"
        )));
    }
    // t = (1+u)/2 maps the Beta weight onto the Jacobi weight (1-u)^α (1+u)^β.
    let rule = gauss_jacobi(INTEGRAL_NODES, p.c - p.b - 1.0, p.b - 1.0)?;
    Ok(rule.integrate(|u| {
        let t = 0.5 * (1.0 + u);
        (1.0 - t * x).powf(-p.a)
    }))
}

/// `d/dx ₂F₁(a, b; c; x) = (ab/c) ₂F₁(a+1, b+1; c+1; x)`.
pub fn gauss_2f1_derivative(p: HypergeomParams, x: f64) -> Result<f64> {
    check_series_domain(&p, x)?;
    if p.a == 0.0 || p.b == 0.0 {
        return Ok(0.0);
    }
    let shifted = p.shifted()?;
    Ok(p.a * p.b / p.c * gauss_2f1_series(shifted, x)?)
}

/// ₂F₁(a, b; c; 1) = Γ(c)Γ(c-a-b) / (Γ(c-a)Γ(c-b)) for `c - a - b > 0`.
pub fn gauss_2f1_at_one(p: HypergeomParams) -> Result<f64> {
    let s = p.excess();
    if !(s > 0.0) {
        return Err(domain(format!(
            "Gauss summation needs c - a - b > 0, got {s}"
        )));
    }
    for (name, v) in [("c - a", p.c - p.a), ("c - b", p.c - p.b)] {
        if nonpositive_integer(v).is_some() {
            return Err(domain(format!("Gamma pole: {name} = {v}")));
        }
    }
    if let Some(m) = p.terminating_degree() {
        // Chu–Vandermonde: (c - b)_m / (c)_m, with b the non-terminating partner.
        let other = if nonpositive_integer(p.a) == Some(m) {
            p.b
        } else {
            p.a
        };
        let (ln_num, s_num) = ln_pochhammer(p.c - other, m);
        let (ln_den, s_den) = ln_pochhammer(p.c, m);
        if s_num == 0.0 {
            return Ok(0.0);
        }
        return Ok(s_num * s_den * (ln_num - ln_den).exp());
    }
    let (l1, s1) = ln_gamma(p.c)?;
    let (l2, s2) = ln_gamma(s)?;
    let (l3, s3) = ln_gamma(p.c - p.a)?;
    let (l4, s4) = ln_gamma(p.c - p.b)?;
    Ok(s1 * s2 * s3 * s4 * (l1 + l2 - l3 - l4).exp())
}

/// Guard used by callers that build parameters from floating exponents.
pub fn is_near_integer(v: f64) -> bool {
    (v - v.round()).abs() <= INTEGER_TOL
}
