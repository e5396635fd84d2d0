//! Sharp pointwise constants for invariant Poisson integrals of L^p data.
//!
//! For conjugate exponents `1/p + 1/q = 1` and `u = P_h[φ]`,
//!
//! ```text
//! |u(x)| <= C_q(x)^{1/q} / (1-|x|²)^{(n-1)/p} · ‖φ‖_p
//! C_q(x) = ∫ |x-η|^{2(n-1)(q-1)} dσ(η) = ₂F₁(-(n-1)(q-1), n/2+q-nq; n/2; |x|²)
//! ```
//!
//! and `C_q(x)` increases to `C_q(e_n) = ₂F₁(...; 1)` as `|x| → 1`.
//! Equality holds for `φ* = P_h(x, ·)^{q-1}`.

use serde::{Serialize, Serializer};

use crate::error::{domain, Result};
use crate::hypergeom::{
    gauss_2f1_at_one, gauss_2f1_series, is_near_integer, pochhammer, HypergeomParams,
};
use crate::kernel::{poisson_integral, poisson_szego, BoundaryFunction, GRADED_RADIUS};
use crate::sphere::{
    check_dim, graded_zonal_nodes, monte_carlo_vector, uniform_sphere_sample, zonal_integral,
    zonal_nodes, BallPoint, Estimate, Method, QuadratureSpec, UnitVector,
};

/// Points used to estimate `‖φ‖_∞`.
pub const SUP_SAMPLES: usize = 100_001;
/// Floor on the estimated relative quadrature error of a deterministic rule.
pub const QUADRATURE_ERROR_FLOOR: f64 = 1e-13;

fn serialize_exponent<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// Conjugate exponents `(p, q)`, `p ∈ (1, ∞]`, `q = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPair {
    #[serde(serialize_with = "serialize_exponent")]
    pub p: f64,
    pub q: f64,
}

impl ExponentPair {
    pub fn from_p(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 1.0 {
            return Err(domain(format!("p must lie in (1, inf], got {p}")));
        }
        let q = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
        Ok(Self { p, q })
    }

    pub fn from_q(q: f64) -> Result<Self> {
        if !q.is_finite() || q < 1.0 {
            return Err(domain(format!("q must lie in [1, inf), got {q}")));
        }
        let p = if q == 1.0 {
            f64::INFINITY
        } else {
            q / (q - 1.0)
        };
        Ok(Self { p, q })
    }

    /// `p = ∞`, `q = 1`: all constants are one.
    pub fn is_sup_endpoint(&self) -> bool {
        self.p.is_infinite()
    }
}

/// Outcome of comparing `|P_h[φ](x)|` with the pointwise bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub x: Vec<f64>,
    pub exponents: ExponentPair,
    /// `|P_h[φ](x)|`
    pub lhs: f64,
    /// pointwise bound times `‖φ‖_p`
    pub rhs: f64,
    pub ratio: f64,
    /// Estimated relative error of `lhs` and `rhs` combined.
    pub quadrature_error: f64,
}

impl SharpnessReport {
    pub fn tolerance(&self) -> f64 {
        10.0 * self.quadrature_error
    }

    /// The inequality holds up to quadrature error.
    pub fn bound_holds(&self) -> bool {
        self.ratio > 0.0 && self.ratio <= 1.0 + self.tolerance()
    }

    /// The inequality is an equality up to quadrature error.
    pub fn is_sharp(&self) -> bool {
        self.bound_holds() && self.ratio >= 1.0 - self.tolerance()
    }
}

/// Snaps `q` so that `(n-1)(q-1)` is an integer when it is within `1e-12` of one.
pub fn snap_q(q: f64, n: usize) -> f64 {
    let k = (n as f64 - 1.0) * (q - 1.0);
    if is_near_integer(k) {
        1.0 + k.round() / (n as f64 - 1.0)
    } else {
        q
    }
}

/// `(a, b; c) = (-(n-1)(q-1), n/2 + q - nq; n/2)`.
pub fn cq_params(q: f64, n: usize) -> Result<HypergeomParams> {
    let q = snap_q(q, n);
    let nf = n as f64;
    HypergeomParams::new(-(nf - 1.0) * (q - 1.0), nf / 2.0 + q - nf * q, nf / 2.0)
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(domain(format!("q must exceed 1, got {q}")));
    }
    Ok(())
}

/// `|x-η|²` written to avoid cancellation near the peak: `(1-ρ)² + 2ρ(1-t)`.
fn dist_sq_zonal(rho: f64, t: f64) -> f64 {
    (1.0 - rho) * (1.0 - rho) + 2.0 * rho * (1.0 - t)
}

/// `C_q(x) = ∫ |x-η|^{2(n-1)(q-1)} dσ(η)` by quadrature.
pub fn cq_integral(q: f64, x: &BallPoint, spec: &QuadratureSpec) -> Result<Estimate> {
    check_q(q)?;
    spec.validate()?;
    let n = x.dim();
    let exponent = (n as f64 - 1.0) * (snap_q(q, n) - 1.0);
    match spec.method {
        Method::ZonalGaussLegendre => {
            let rho = x.norm();
            let v = zonal_integral(n, |t| dist_sq_zonal(rho, t).powf(exponent), spec.nodes)?;
            Ok(Estimate::exact(v))
        }
        Method::MonteCarlo => {
            let est = monte_carlo_vector(
                |eta| vec![x.dist_sq(eta).powf(exponent)],
                1,
                n,
                spec.nodes,
                spec.seed,
            )?;
            Ok(Estimate {
                value: est.value[0],
                stderr: est.stderr[0],
            })
        }
    }
}

/// `C_q(x) = ₂F₁(-(n-1)(q-1), n/2+q-nq; n/2; |x|²)`.
pub fn cq_closed_form(q: f64, x: &BallPoint) -> Result<f64> {
    check_q(q)?;
    let params = cq_params(q, x.dim())?;
    gauss_2f1_series(params, x.norm_sq())
}

/// `sup_x C_q(x) = C_q(e_n) = ₂F₁(-(n-1)(q-1), n/2+q-nq; n/2; 1)`; one at `q = 1`.
pub fn cq_sup(q: f64, n: usize) -> Result<f64> {
    check_dim(n)?;
    if !q.is_finite() || q < 1.0 {
        return Err(domain(format!("q must be at least 1, got {q}")));
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    gauss_2f1_at_one(cq_params(q, n)?)
}

/// Coefficients of `C_q` as a polynomial in `|x|²` when `(n-1)(q-1)` is an integer.
pub fn cq_polynomial_coefficients(q: f64, n: usize) -> Result<Option<Vec<f64>>> {
    check_q(q)?;
    let p = cq_params(q, n)?;
    if crate::gamma::nonpositive_integer(p.a).is_none() {
        return Ok(None);
    }
    let m = p.terminating_degree().unwrap();
    Ok(Some(
        (0..=m)
            .map(|k| {
                pochhammer(p.a, k) * pochhammer(p.b, k) / (pochhammer(p.c, k) * pochhammer(1.0, k))
            })
            .collect(),
    ))
}

/// Explicit three-dimensional constant
/// `C_q(ρ e_3) = ((1+ρ)^{4q-2} - (1-ρ)^{4q-2}) / (4(2q-1)ρ)`, one at `ρ = 0`.
pub fn cq_n3_closed_form(q: f64, rho: f64) -> Result<f64> {
    check_q(q)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    let m = 4.0 * q - 2.0;
    if rho < 1e-4 {
        // 1 + Σ_j C(m, 2j+1)/m ρ^{2j}
        let mut sum = 1.0;
        let mut coef = 1.0; // C(m, 2j+1)/m for j = 0
        let mut power = 1.0;
        for j in 1..6 {
            let k = (2 * j) as f64;
            coef *= (m - k) * (m - k + 1.0) / ((k + 1.0) * k);
            power *= rho * rho;
            sum += coef * power;
        }
        return Ok(sum);
    }
    let up = (m * rho.ln_1p()).exp();
    let down = if rho == 1.0 {
        0.0
    } else {
        (m * (-rho).ln_1p()).exp()
    };
    Ok((up - down) / (2.0 * m * rho))
}

/// `C_q(x)^{1/q} / (1-|x|²)^{(n-1)/p}`; one for `p = ∞`.
pub fn pointwise_bound(exponents: &ExponentPair, x: &BallPoint) -> Result<f64> {
    if exponents.is_sup_endpoint() {
        return Ok(1.0);
    }
    let c = cq_closed_form(exponents.q, x)?;
    Ok(bound_from_constant(c, exponents, x))
}

/// `C_q^{1/q} / (1-|x|²)^{(n-1)/p}` with the supremum constant; one for `p = ∞`.
pub fn uniform_bound(exponents: &ExponentPair, x: &BallPoint) -> Result<f64> {
    if exponents.is_sup_endpoint() {
        return Ok(1.0);
    }
    let c = cq_sup(exponents.q, x.dim())?;
    Ok(bound_from_constant(c, exponents, x))
}

fn bound_from_constant(c: f64, exponents: &ExponentPair, x: &BallPoint) -> f64 {
    let n = x.dim() as f64;
    let log = c.ln() / exponents.q - (n - 1.0) / exponents.p * x.one_minus_norm_sq().ln();
    log.exp()
}

/// `φ*(ζ) = P_h(x, ζ)^{q-1}`, zonal about `x/|x|`.
pub fn extremal_boundary(x: &BallPoint, q: f64) -> Result<BoundaryFunction> {
    check_q(q)?;
    let n = x.dim();
    let rho = x.norm();
    let axis = match x.direction() {
        Some(d) => d,
        None => UnitVector::north(n)?,
    };
    let one_minus = x.one_minus_norm_sq();
    let power = (n as f64 - 1.0) * (q - 1.0);
    let label = format!("extremal P_h(x, .)^(q-1), q = {q}, |x| = {rho}");
    let phi = BoundaryFunction::zonal(axis, 1, label, move |t| {
        // P_h^{q-1} = ((1-ρ²)/|x-ζ|²)^{(n-1)(q-1)}
        vec![(power * (one_minus.ln() - dist_sq_zonal(rho, t).ln())).exp()]
    });
    Ok(if rho > GRADED_RADIUS {
        phi.with_peak_width((1.0 - rho).powi(2) / (2.0 * rho))
    } else {
        phi
    })
}

fn euclidean(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `‖φ‖_p = (∫ |φ|^p dσ)^{1/p}`; for `p = ∞` the maximum over a dense sample.
pub fn lp_norm(phi: &BoundaryFunction, p: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if p.is_nan() || p < 1.0 {
        return Err(domain(format!("p must lie in [1, inf], got {p}")));
    }
    spec.validate()?;
    let n = phi.n();
    if p.is_infinite() {
        return Ok(Estimate::exact(sup_norm(phi, spec)?));
    }
    match spec.method {
        Method::ZonalGaussLegendre => {
            let z = phi.zonal_profile().ok_or_else(|| {
                crate::Error::MethodMismatch(format!(
                    "zonal quadrature requested for non-zonal boundary data '{}'",
                    phi.label()
                ))
            })?;
            let (lo, hi) = z.support;
            let rule = match z.peak_width {
                Some(w) => graded_zonal_nodes(n, lo, hi, spec.nodes, w, true)?,
                None => zonal_nodes(n, lo, hi, spec.nodes)?,
            };
            let integral: f64 = rule
                .into_iter()
                .map(|(t, w)| w * euclidean(&z.eval(t)).powf(p))
                .sum();
            Ok(Estimate::exact(integral.powf(1.0 / p)))
        }
        Method::MonteCarlo => {
            let est = monte_carlo_vector(
                |zeta| vec![euclidean(&phi.evaluate(zeta)).powf(p)],
                1,
                n,
                spec.nodes,
                spec.seed,
            )?;
            let mean = est.value[0];
            let value = mean.powf(1.0 / p);
            // delta method: d(m^{1/p}) = m^{1/p - 1}/p dm
            let stderr = if mean > 0.0 {
                value / (p * mean) * est.stderr[0]
            } else {
                0.0
            };
            Ok(Estimate { value, stderr })
        }
    }
}

fn sup_norm(phi: &BoundaryFunction, spec: &QuadratureSpec) -> Result<f64> {
    if let Some(z) = phi.zonal_profile() {
        let (lo, hi) = z.support;
        let steps = SUP_SAMPLES - 1;
        return Ok((0..=steps)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / steps as f64;
                euclidean(&z.eval(t))
            })
            .fold(0.0, f64::max));
    }
    let count = spec.nodes.max(SUP_SAMPLES);
    Ok(uniform_sphere_sample(phi.n(), count, spec.seed)?
        .iter()
        .map(|zeta| euclidean(&phi.evaluate(zeta)))
        .fold(0.0, f64::max))
}

/// `u_i(x₀) = P_h[χ_{Ω_i} / σ(Ω_i)](x₀)` for the cap `Ω_i = {|ζ - η₀| <= 1/i}`;
/// tends to `P_h(x₀, η₀)` as `i → ∞`.
pub fn l1_extremal_sequence(
    x0: &BallPoint,
    eta0: &UnitVector,
    i: u32,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if i == 0 {
        return Err(domain("cap index must be positive"));
    }
    let phi = BoundaryFunction::cap_indicator(eta0.clone(), 1.0 / i as f64, true)?;
    let est = poisson_integral(&phi, x0, spec)?;
    Ok(Estimate {
        value: est.value[0],
        stderr: est.stderr[0],
    })
}

/// Limit of [`l1_extremal_sequence`]: `P_h(x₀, η₀)`.
pub fn l1_extremal_limit(x0: &BallPoint, eta0: &UnitVector) -> f64 {
    poisson_szego(x0, eta0)
}

/// Evaluates both sides of the pointwise inequality for boundary data `φ`.
pub fn check_bound(
    phi: &BoundaryFunction,
    exponents: &ExponentPair,
    x: &BallPoint,
    spec: &QuadratureSpec,
) -> Result<SharpnessReport> {
    let (lhs, lhs_err) = lhs_with_error(phi, x, spec)?;
    let bound = pointwise_bound(exponents, x)?;
    let (norm, norm_err) = norm_with_error(phi, exponents.p, spec)?;
    let rhs = bound * norm;
    Ok(SharpnessReport {
        x: x.coords().to_vec(),
        exponents: *exponents,
        lhs,
        rhs,
        ratio: lhs / rhs,
        quadrature_error: lhs_err + norm_err,
    })
}

/// Runs [`check_bound`] on the extremal data `φ* = P_h(x, ·)^{q-1}`.
pub fn verify_sharpness(
    exponents: &ExponentPair,
    x: &BallPoint,
    spec: &QuadratureSpec,
) -> Result<SharpnessReport> {
    if exponents.is_sup_endpoint() {
        return Err(domain("sharpness check needs p < inf"));
    }
    let phi = extremal_boundary(x, exponents.q)?;
    check_bound(&phi, exponents, x, spec)
}

/// Relative error estimate: stderr for Monte Carlo, the change against a
/// rule with half the nodes for zonal quadrature.
fn lhs_with_error(
    phi: &BoundaryFunction,
    x: &BallPoint,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let est = poisson_integral(phi, x, spec)?.norm();
    let err = match spec.method {
        Method::MonteCarlo => est.stderr / est.value,
        Method::ZonalGaussLegendre => {
            let coarse = poisson_integral(phi, x, &halved(spec))?.norm();
            ((est.value - coarse.value) / est.value)
                .abs()
                .max(QUADRATURE_ERROR_FLOOR)
        }
    };
    Ok((est.value, err))
}

fn norm_with_error(phi: &BoundaryFunction, p: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let est = lp_norm(phi, p, spec)?;
    let err = match spec.method {
        Method::MonteCarlo => est.stderr / est.value,
        Method::ZonalGaussLegendre if p.is_finite() => {
            let coarse = lp_norm(phi, p, &halved(spec))?;
            ((est.value - coarse.value) / est.value)
                .abs()
                .max(QUADRATURE_ERROR_FLOOR)
        }
        Method::ZonalGaussLegendre => QUADRATURE_ERROR_FLOOR,
    };
    Ok((est.value, err))
}

fn halved(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        nodes: (spec.nodes / 2).max(2),
        ..*spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e3(rho: f64) -> BallPoint {
        BallPoint::on_axis(3, rho, 2).unwrap()
    }

    const C2_HALF_E3: f64 = 1.895_833_333_333_333_3;

    #[test]
    fn exponent_pairs() {
        let e = ExponentPair::from_p(2.0).unwrap();
        assert_eq!(e.q, 2.0);
        let e = ExponentPair::from_p(4.0).unwrap();
        assert!((1.0 / e.p + 1.0 / e.q - 1.0).abs() < 1e-12);
        let e = ExponentPair::from_q(1.0).unwrap();
        assert!(e.p.is_infinite() && e.is_sup_endpoint());
        assert_eq!(ExponentPair::from_p(f64::INFINITY).unwrap().q, 1.0);
        assert!(ExponentPair::from_p(1.0).is_err());
        assert!(ExponentPair::from_q(0.5).is_err());
    }

    #[test]
    fn exponent_pair_serializes_infinity() {
        let e = ExponentPair::from_q(1.0).unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"p":"inf","q":1.0}"#);
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_q(1.5 + 1e-13, 3), 1.5);
        assert_eq!(snap_q(1.3, 3), 1.3);
        let p = cq_params(2.0, 3).unwrap();
        assert_eq!((p.a, p.b, p.c), (-2.0, -2.5, 1.5));
    }

    #[test]
    fn closed_form_examples() {
        for q in [1.1, 2.0, 7.0] {
            assert_eq!(
                cq_closed_form(q, &BallPoint::origin(4).unwrap()).unwrap(),
                1.0
            );
        }
        assert!((cq_closed_form(2.0, &e3(0.5)).unwrap() - C2_HALF_E3).abs() < 1e-14);
        // q → 1⁺
        let v = cq_closed_form(1.0 + 1e-10, &e3(0.7)).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        assert!(cq_closed_form(1.0, &e3(0.5)).is_err());
    }

    #[test]
    fn integral_examples() {
        let spec = QuadratureSpec::zonal(200);
        let v = cq_integral(3.0, &BallPoint::origin(5).unwrap(), &spec).unwrap();
        assert!((v.value - 1.0).abs() < 1e-14);
        let v = cq_integral(2.0, &e3(0.5), &spec).unwrap();
        assert!((v.value - C2_HALF_E3).abs() < 1e-13);
        assert!(cq_integral(0.9, &e3(0.5), &spec).is_err());
    }

    #[test]
    fn sup_examples() {
        assert_eq!(cq_sup(1.0, 4).unwrap(), 1.0);
        assert!((cq_sup(2.0, 3).unwrap() - 16.0 / 3.0).abs() < 1e-13);
        assert!(cq_sup(0.5, 3).is_err());
        assert!(cq_sup(2.0, 2).is_err());
    }

    #[test]
    fn n3_formula_examples() {
        assert_eq!(cq_n3_closed_form(2.5, 0.0).unwrap(), 1.0);
        assert!((cq_n3_closed_form(2.0, 1.0).unwrap() - 16.0 / 3.0).abs() < 1e-14);
        assert!((cq_n3_closed_form(2.0, 0.5).unwrap() - C2_HALF_E3).abs() < 1e-14);
        assert!(cq_n3_closed_form(2.0, 1.1).is_err());
        assert!(cq_n3_closed_form(1.0, 0.5).is_err());
    }

    #[test]
    fn n3_formula_continuous_across_series_switch() {
        for q in [1.25, 2.0, 4.5] {
            let below = cq_n3_closed_form(q, 1e-4 - 1e-12).unwrap();
            let above = cq_n3_closed_form(q, 1e-4).unwrap();
            assert!((below - above).abs() < 1e-12, "q = {q}");
            // series branch agrees with the hypergeometric form
            let hyp = cq_closed_form(q, &e3(5e-5)).unwrap();
            assert!((cq_n3_closed_form(q, 5e-5).unwrap() - hyp).abs() < 1e-15);
        }
    }

    #[test]
    fn polynomial_coefficients_n3_q2() {
        // ∫(1+ρ²-2ρt)² dσ = (1+ρ²)² + 4ρ²/3 = 1 + (10/3)ρ² + ρ⁴
        let c = cq_polynomial_coefficients(2.0, 3).unwrap().unwrap();
        assert_eq!(c.len(), 3);
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!((c[1] - 10.0 / 3.0).abs() < 1e-15);
        assert!((c[2] - 1.0).abs() < 1e-15);
        assert!(cq_polynomial_coefficients(1.3, 3).unwrap().is_none());
    }

    #[test]
    fn bound_examples() {
        let inf = ExponentPair::from_p(f64::INFINITY).unwrap();
        let two = ExponentPair::from_p(2.0).unwrap();
        assert_eq!(pointwise_bound(&inf, &e3(0.7)).unwrap(), 1.0);
        assert_eq!(uniform_bound(&inf, &e3(0.7)).unwrap(), 1.0);
        assert!(
            (pointwise_bound(&two, &BallPoint::origin(3).unwrap()).unwrap() - 1.0).abs() < 1e-15
        );
        let pb = pointwise_bound(&two, &e3(0.5)).unwrap();
        assert!((pb - C2_HALF_E3.sqrt() / 0.75).abs() < 1e-14);
        let ub = uniform_bound(&two, &e3(0.5)).unwrap();
        assert!((ub - (16.0f64 / 3.0).sqrt() / 0.75).abs() < 1e-13);
    }

    #[test]
    fn extremal_at_origin_is_one() {
        let phi = extremal_boundary(&BallPoint::origin(4).unwrap(), 3.0).unwrap();
        for z in uniform_sphere_sample(4, 20, 0).unwrap() {
            assert!((phi.evaluate(&z)[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn extremal_norm_closed_form() {
        // ‖φ*‖_p^p = ∫ P^q = C_q(x) / (1-|x|²)^{(n-1)(q-1)}
        for &(n, p, rho) in &[(3, 2.0, 0.5), (4, 1.5, 0.8), (5, 4.0, 0.3)] {
            let e = ExponentPair::from_p(p).unwrap();
            let x = BallPoint::on_axis(n, rho, 0).unwrap();
            let phi = extremal_boundary(&x, e.q).unwrap();
            let norm = lp_norm(&phi, p, &QuadratureSpec::zonal(200)).unwrap().value;
            let want = cq_closed_form(e.q, &x).unwrap()
                / x.one_minus_norm_sq().powf((n as f64 - 1.0) * (e.q - 1.0));
            assert!((norm.powf(p) / want - 1.0).abs() < 1e-8, "n={n} p={p}");
        }
    }

    #[test]
    fn lp_norm_of_constants() {
        let phi = BoundaryFunction::constant(3, vec![-2.0]).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            let v = lp_norm(&phi, p, &QuadratureSpec::zonal(20)).unwrap().value;
            assert!((v - 2.0).abs() < 1e-13, "p = {p}");
        }
        let mc = lp_norm(&phi, 3.0, &QuadratureSpec::monte_carlo(100, 1)).unwrap();
        assert!((mc.value - 2.0).abs() < 1e-13);
        assert!(lp_norm(&phi, 0.5, &QuadratureSpec::zonal(20)).is_err());
    }

    #[test]
    fn normalized_cap_has_unit_l1_norm() {
        for n in [3, 4, 5] {
            let c = UnitVector::north(n).unwrap();
            for i in [1, 5, 50] {
                let phi = BoundaryFunction::cap_indicator(c.clone(), 1.0 / i as f64, true).unwrap();
                let v = lp_norm(&phi, 1.0, &QuadratureSpec::zonal(40))
                    .unwrap()
                    .value;
                assert!((v - 1.0).abs() < 1e-12, "n={n} i={i}: {v}");
            }
        }
    }

    #[test]
    fn l1_sequence_examples() {
        let spec = QuadratureSpec::zonal(64);
        let north = UnitVector::north(3).unwrap();
        let v = l1_extremal_sequence(&BallPoint::origin(3).unwrap(), &north, 7, &spec).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        let x0 = e3(0.5);
        assert!((l1_extremal_limit(&x0, &north) - 9.0).abs() < 1e-13);
        let mut prev = 0.0;
        for i in [1, 2, 5, 20, 200, 2000] {
            let v = l1_extremal_sequence(&x0, &north, i, &spec).unwrap().value;
            assert!(v > prev && v < 9.0);
            prev = v;
        }
        assert!((prev - 9.0).abs() < 1e-3);
        assert!(l1_extremal_sequence(&x0, &north, 0, &spec).is_err());
    }

    #[test]
    fn sharpness_at_origin() {
        let e = ExponentPair::from_p(3.0).unwrap();
        let r = verify_sharpness(
            &e,
            &BallPoint::origin(4).unwrap(),
            &QuadratureSpec::zonal(50),
        )
        .unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-14);
        assert!(r.is_sharp());
    }

    #[test]
    fn sharpness_q2_half_radius() {
        let e = ExponentPair::from_p(2.0).unwrap();
        let r = verify_sharpness(&e, &e3(0.5), &QuadratureSpec::zonal(200)).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-8, "{r:?}");
        assert!(r.is_sharp());
        assert!(verify_sharpness(
            &ExponentPair::from_q(1.0).unwrap(),
            &e3(0.5),
            &QuadratureSpec::zonal(20)
        )
        .is_err());
    }

    #[test]
    fn non_extremal_data_below_bound() {
        let x = BallPoint::new(vec![0.2, -0.4, 0.1]).unwrap();
        let phi = BoundaryFunction::new(3, 3, "mixed", |z| {
            let c = z.coords();
            vec![c[0].exp(), (2.0 * c[1]).sin(), c[2] * c[2] - 0.2]
        });
        let e = ExponentPair::from_p(2.0).unwrap();
        let r = check_bound(&phi, &e, &x, &QuadratureSpec::monte_carlo(50_000, 4)).unwrap();
        assert!(r.bound_holds() && r.ratio < 0.99, "{r:?}");
    }
}
