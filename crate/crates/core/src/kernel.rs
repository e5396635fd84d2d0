//! The Poisson–Szegő kernel of the hyperbolic Laplacian on B^n and the
//! invariant Poisson integral of boundary data.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::sphere::{
    biaxial_nodes, graded_zonal_nodes, monte_carlo_vector, zonal_integral_over, zonal_nodes,
    BallPoint, Estimate, Method, QuadratureSpec, UnitVector, VectorEstimate,
};

/// Beyond this radius the kernel is evaluated as `exp((n-1) ln(...))`.
pub const LOG_SPACE_RADIUS: f64 = 0.99;
/// Beyond this radius kernel-weighted zonal integrals use graded panels.
pub const GRADED_RADIUS: f64 = 0.5;

type SphereFn = Arc<dyn Fn(&UnitVector) -> Vec<f64> + Send + Sync>;
type ProfileFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// A boundary function that depends only on `t = ⟨axis, ζ⟩` and vanishes
/// outside the band `support.0 <= t <= support.1`.
#[derive(Clone)]
pub struct ZonalProfile {
    pub axis: UnitVector,
    pub support: (f64, f64),
    /// Width in `t` of a peak at `t = 1`, if the profile has one.
    pub peak_width: Option<f64>,
    profile: ProfileFn,
}

impl ZonalProfile {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        (self.profile)(t)
    }
}

/// Boundary data `φ: S^{n-1} → R^d`.
#[derive(Clone)]
pub struct BoundaryFunction {
    n: usize,
    dim: usize,
    label: String,
    eval: SphereFn,
    zonal: Option<ZonalProfile>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("n", &self.n)
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("zonal", &self.zonal.is_some())
            .finish()
    }
}

impl BoundaryFunction {
    /// General (non-zonal) boundary data.
    pub fn new<F>(n: usize, dim: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&UnitVector) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            n,
            dim,
            label: label.into(),
            eval: Arc::new(f),
            zonal: None,
        }
    }

    /// `ζ ↦ profile(⟨axis, ζ⟩)`.
    pub fn zonal<P>(axis: UnitVector, dim: usize, label: impl Into<String>, profile: P) -> Self
    where
        P: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::zonal_on(axis, dim, label, profile, -1.0, 1.0)
    }

    /// `ζ ↦ profile(⟨axis, ζ⟩)` on the band `lo <= t <= hi`, zero elsewhere.
    pub fn zonal_on<P>(
        axis: UnitVector,
        dim: usize,
        label: impl Into<String>,
        profile: P,
        lo: f64,
        hi: f64,
    ) -> Self
    where
        P: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        let profile: ProfileFn = Arc::new(profile);
        let n = axis.dim();
        let eval_axis = axis.clone();
        let eval_profile = Arc::clone(&profile);
        let eval: SphereFn = Arc::new(move |zeta: &UnitVector| {
            let t = eval_axis.dot(zeta.coords());
            if (lo..=hi).contains(&t) {
                eval_profile(t)
            } else {
                vec![0.0; dim]
            }
        });
        Self {
            n,
            dim,
            label: label.into(),
            eval,
            zonal: Some(ZonalProfile {
                axis,
                support: (lo, hi),
                peak_width: None,
                profile,
            }),
        }
    }

    /// `φ ≡ value`.
    pub fn constant(n: usize, value: Vec<f64>) -> Result<Self> {
        let axis = UnitVector::north(n)?;
        let dim = value.len();
        let label = format!("constant {value:?}");
        Ok(Self::zonal(axis, dim, label, move |_| value.clone()))
    }

    /// Indicator of the cap `{ζ : |ζ - center| <= chord}`, optionally divided
    /// by its σ-measure so that its L¹ norm is one.
    pub fn cap_indicator(center: UnitVector, chord: f64, normalized: bool) -> Result<Self> {
        if !(chord > 0.0) {
            return Err(domain(format!("cap chord must be positive, got {chord}")));
        }
        let n = center.dim();
        // |ζ - c|² = 2 - 2t
        let lo = (1.0 - 0.5 * chord * chord).max(-1.0);
        let height = if normalized {
            1.0 / cap_measure(n, lo)?
        } else {
            1.0
        };
        let label = format!(
            "{}cap indicator, chord {chord}",
            if normalized { "normalized " } else { "" }
        );
        Ok(Self::zonal_on(
            center,
            1,
            label,
            move |_| vec![height],
            lo,
            1.0,
        ))
    }

    /// Multiplies scalar data by a fixed vector: `ζ ↦ φ(ζ) v`.
    pub fn times_vector(self, v: Vec<f64>) -> Result<Self> {
        if self.dim != 1 {
            return Err(domain("times_vector needs scalar boundary data"));
        }
        let dim = v.len();
        let label = format!("{} times {v:?}", self.label);
        let scale = move |s: Vec<f64>| v.iter().map(|c| c * s[0]).collect::<Vec<f64>>();
        Ok(match self.zonal {
            Some(z) => {
                let profile = z.profile;
                let (lo, hi) = z.support;
                let mut out =
                    Self::zonal_on(z.axis, dim, label, move |t| scale(profile(t)), lo, hi);
                if let Some(w) = z.peak_width {
                    out = out.with_peak_width(w);
                }
                out
            }
            None => {
                let eval = self.eval;
                Self::new(self.n, dim, label, move |z| scale(eval(z)))
            }
        })
    }

    /// Declares a peak of width `width` at `t = 1` so zonal rules grade toward it.
    pub fn with_peak_width(mut self, width: f64) -> Self {
        if let Some(z) = self.zonal.as_mut() {
            z.peak_width = Some(width);
        }
        self
    }

    pub fn evaluate(&self, zeta: &UnitVector) -> Vec<f64> {
        (self.eval)(zeta)
    }

    /// Ambient dimension `n` of the sphere S^{n-1}.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of components of the values.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn zonal_profile(&self) -> Option<&ZonalProfile> {
        self.zonal.as_ref()
    }
}

/// σ-measure of the band `lo <= ⟨a, ζ⟩ <= 1`.
pub fn cap_measure(n: usize, lo: f64) -> Result<f64> {
    if lo <= -1.0 {
        return Ok(1.0);
    }
    zonal_integral_over(n, |_| 1.0, lo, 1.0, 32)
}

/// `((1-|x|²)/dist²)^{n-1}` from its two ingredients.
fn kernel_from_parts(one_minus_norm_sq: f64, dist_sq: f64, n: usize, log_space: bool) -> f64 {
    let k = (n - 1) as i32;
    if log_space {
        (k as f64 * (one_minus_norm_sq.ln() - dist_sq.ln())).exp()
    } else {
        (one_minus_norm_sq / dist_sq).powi(k)
    }
}

/// Poisson–Szegő kernel `P_h(x, ζ) = ((1-|x|²)/|x-ζ|²)^{n-1}`.
pub fn poisson_szego(x: &BallPoint, zeta: &UnitVector) -> f64 {
    kernel_from_parts(
        x.one_minus_norm_sq(),
        x.dist_sq(zeta),
        x.dim(),
        x.norm() > LOG_SPACE_RADIUS,
    )
}

/// `max_ζ P_h(x, ζ) = ((1+|x|)/(1-|x|))^{n-1}`, attained at `ζ = x/|x|`.
pub fn poisson_szego_max(x: &BallPoint) -> f64 {
    let r = x.norm();
    ((1.0 + r) / (1.0 - r)).powi(x.dim() as i32 - 1)
}

/// Nodes `(|x-ζ|², weight, t)` of a zonal rule for `∫ P_h(x,ζ) φ(ζ) dσ`
/// where `φ` is zonal about `axis` with support `[lo, hi]` in `t = ⟨axis, ζ⟩`.
pub(crate) fn kernel_zonal_nodes(
    x: &BallPoint,
    axis: &UnitVector,
    support: (f64, f64),
    nodes: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let n = x.dim();
    let rho = x.norm();
    let c = axis.dot(x.coords());
    let perp: f64 = x
        .coords()
        .iter()
        .zip(axis.coords())
        .map(|(xi, ai)| (xi - c * ai).powi(2))
        .sum::<f64>()
        .sqrt();
    let base = (1.0 - rho) * (1.0 - rho);
    // |x - ζ|² = (1-ρ)² + 2(ρ - ⟨x, ζ⟩)
    let dist = |inner: f64| base + 2.0 * (rho - inner).max(0.0);
    if perp <= 1e-14 * rho.max(1e-300) || rho == 0.0 {
        // Kernel peak at t = sign(c) with width (1-ρ)²/(2ρ) in t.
        let rule = if rho > GRADED_RADIUS {
            let width = (1.0 - rho).powi(2) / (2.0 * rho);
            graded_zonal_nodes(n, support.0, support.1, nodes, width, c > 0.0)?
        } else {
            zonal_nodes(n, support.0, support.1, nodes)?
        };
        Ok(rule.into_iter().map(|(t, w)| (dist(c * t), w, t)).collect())
    } else {
        Ok(biaxial_nodes(n, support.0, support.1, nodes)?
            .into_iter()
            .map(|(t, u, w)| (dist(c * t + perp * u), w, t))
            .collect())
    }
}

/// Invariant Poisson integral `P_h[φ](x) = ∫ P_h(x, ζ) φ(ζ) dσ(ζ)`, componentwise.
///
/// The zonal method requires `φ` to be zonal about some axis; the kernel
/// is zonal about `x/|x|`, and the two-axis product rule handles the case
/// where these axes differ.
pub fn poisson_integral(
    phi: &BoundaryFunction,
    x: &BallPoint,
    spec: &QuadratureSpec,
) -> Result<VectorEstimate> {
    spec.validate()?;
    let n = x.dim();
    if phi.n() != n {
        return Err(domain(format!(
            "boundary data lives on S^{} but x is in B^{n}",
            phi.n() - 1
        )));
    }
    match spec.method {
        Method::ZonalGaussLegendre => {
            let zonal = phi.zonal_profile().ok_or_else(|| {
                Error::MethodMismatch(format!(
                    "zonal quadrature requested for non-zonal boundary data '{}'",
                    phi.label()
                ))
            })?;
            let one_minus = x.one_minus_norm_sq();
            let log_space = x.norm() > LOG_SPACE_RADIUS;
            let mut acc = vec![0.0; phi.dim()];
            for (d2, w, t) in kernel_zonal_nodes(x, &zonal.axis, zonal.support, spec.nodes)? {
                let k = w * kernel_from_parts(one_minus, d2, n, log_space);
                for (a, v) in acc.iter_mut().zip(zonal.eval(t)) {
                    *a += k * v;
                }
            }
            Ok(VectorEstimate::exact(acc))
        }
        Method::MonteCarlo => monte_carlo_vector(
            |zeta| {
                let k = poisson_szego(x, zeta);
                phi.evaluate(zeta).into_iter().map(|v| k * v).collect()
            },
            phi.dim(),
            n,
            spec.nodes,
            spec.seed,
        ),
    }
}

/// `∫ P_h(x, ζ) dσ(ζ)`, which equals one.
pub fn kernel_normalization(x: &BallPoint, spec: &QuadratureSpec) -> Result<Estimate> {
    let axis = match x.direction() {
        Some(d) => d,
        None => UnitVector::north(x.dim())?,
    };
    let one = BoundaryFunction::zonal(axis, 1, "one", |_| vec![1.0]);
    let est = poisson_integral(&one, x, spec)?;
    Ok(Estimate {
        value: est.value[0],
        stderr: est.stderr[0],
    })
}

/// Central-difference estimate of
/// `Δ_h u(x) = (1-|x|²)² Δu(x) + 2(n-2)(1-|x|²) Σ x_i ∂_i u(x)`.
///
/// Second order in `h`; the stencil must stay at least `2h` inside the ball.
pub fn hyperbolic_laplacian_residual<U>(u: U, x: &BallPoint, h: f64) -> Result<f64>
where
    U: Fn(&BallPoint) -> f64,
{
    if !(h > 0.0) {
        return Err(domain(format!("step must be positive, got {h}")));
    }
    if 1.0 - x.norm() <= 2.0 * h {
        return Err(domain(format!(
            "stencil of step {h} around |x| = {} leaves the ball",
            x.norm()
        )));
    }
    let n = x.dim();
    let u0 = u(x);
    let mut laplacian = 0.0;
    let mut radial = 0.0;
    let mut shifted = x.coords().to_vec();
    for i in 0..n {
        let xi = shifted[i];
        shifted[i] = xi + h;
        let up = u(&BallPoint::new(shifted.clone())?);
        shifted[i] = xi - h;
        let um = u(&BallPoint::new(shifted.clone())?);
        shifted[i] = xi;
        laplacian += (up - 2.0 * u0 + um) / (h * h);
        radial += xi * (up - um) / (2.0 * h);
    }
    let w = x.one_minus_norm_sq();
    Ok(w * w * laplacian + 2.0 * (n as f64 - 2.0) * w * radial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::uniform_sphere_sample;

    #[test]
    fn kernel_at_origin_is_one() {
        let x = BallPoint::origin(4).unwrap();
        for z in uniform_sphere_sample(4, 50, 1).unwrap() {
            assert!((poisson_szego(&x, &z) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_on_axis_value() {
        let x = BallPoint::on_axis(3, 0.5, 2).unwrap();
        let north = UnitVector::north(3).unwrap();
        assert!((poisson_szego(&x, &north) - 9.0).abs() < 1e-14);
        assert!((poisson_szego_max(&x) - 9.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_max_attained_along_direction() {
        let x = BallPoint::new(vec![0.1, -0.3, 0.4, 0.2]).unwrap();
        let dir = x.direction().unwrap();
        let max = poisson_szego_max(&x);
        assert!((poisson_szego(&x, &dir) - max).abs() < 1e-12 * max);
        for z in uniform_sphere_sample(4, 2000, 5).unwrap() {
            assert!(poisson_szego(&x, &z) <= max * (1.0 + 1e-12));
        }
    }

    #[test]
    fn log_space_matches_direct() {
        let x = BallPoint::on_axis(5, 0.995, 0).unwrap();
        for z in uniform_sphere_sample(5, 100, 2).unwrap() {
            let direct = (x.one_minus_norm_sq() / x.dist_sq(&z)).powi(4);
            let k = poisson_szego(&x, &z);
            assert!((k - direct).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn constant_data_reproduced() {
        let phi = BoundaryFunction::constant(4, vec![1.5, -2.0, 0.25, 3.0]).unwrap();
        let x = BallPoint::new(vec![0.3, 0.2, -0.4, 0.1]).unwrap();
        let v = poisson_integral(&phi, &x, &QuadratureSpec::zonal(200)).unwrap();
        for (a, b) in v.value.iter().zip([1.5, -2.0, 0.25, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_gives_mean() {
        let axis = UnitVector::new(vec![1.0, 1.0, 0.0]).unwrap();
        let phi = BoundaryFunction::zonal(axis, 1, "t^2", |t| vec![t * t]);
        let v = poisson_integral(
            &phi,
            &BallPoint::origin(3).unwrap(),
            &QuadratureSpec::zonal(20),
        )
        .unwrap();
        assert!((v.value[0] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zonal_rejects_general_data() {
        let phi = BoundaryFunction::new(3, 1, "x1", |z| vec![z.coords()[0]]);
        let x = BallPoint::origin(3).unwrap();
        let err = poisson_integral(&phi, &x, &QuadratureSpec::zonal(20));
        assert!(matches!(err, Err(Error::MethodMismatch(_))));
        assert!(poisson_integral(&phi, &x, &QuadratureSpec::monte_carlo(100, 0)).is_ok());
    }

    #[test]
    fn off_axis_zonal_matches_monte_carlo() {
        // φ zonal about e_1, x not parallel to e_1: exercises the two-axis rule.
        let n = 4;
        let axis = UnitVector::basis(n, 0).unwrap();
        let phi = BoundaryFunction::zonal(axis, 1, "exp", |t| vec![(1.5 * t).exp()]);
        let x = BallPoint::new(vec![0.2, 0.3, 0.0, -0.1]).unwrap();
        let z = poisson_integral(&phi, &x, &QuadratureSpec::zonal(60)).unwrap();
        let mc = poisson_integral(&phi, &x, &QuadratureSpec::monte_carlo(400_000, 9)).unwrap();
        assert!((z.value[0] - mc.value[0]).abs() < 4.0 * mc.stderr[0]);
    }

    #[test]
    fn normalization_at_origin_exact() {
        let v = kernel_normalization(&BallPoint::origin(5).unwrap(), &QuadratureSpec::zonal(10))
            .unwrap();
        assert!((v.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cap_indicator_has_unit_mass() {
        let c = UnitVector::north(3).unwrap();
        let phi = BoundaryFunction::cap_indicator(c.clone(), 0.5, true).unwrap();
        // n = 3: σ(cap) = (1 - t0)/2 with t0 = 1 - chord²/2
        let height = phi.zonal_profile().unwrap().eval(1.0)[0];
        assert!((height - 1.0 / 0.0625).abs() < 1e-12);
        assert_eq!(
            phi.evaluate(&UnitVector::new(vec![1.0, 0.0, 0.0]).unwrap())[0],
            0.0
        );
        let whole = BoundaryFunction::cap_indicator(c, 3.0, true).unwrap();
        assert_eq!(whole.zonal_profile().unwrap().support.0, -1.0);
    }

    #[test]
    fn laplacian_residual_examples() {
        let x = BallPoint::on_axis(3, 0.5, 0).unwrap();
        let r = hyperbolic_laplacian_residual(|_| 4.2, &x, 1e-3).unwrap();
        assert_eq!(r, 0.0);
        for n in 3..=5 {
            let x = BallPoint::on_axis(n, 0.5, 0).unwrap();
            let r = hyperbolic_laplacian_residual(|p| p.coords()[0], &x, 1e-3).unwrap();
            let want = 2.0 * (n as f64 - 2.0) * 0.75 * 0.5;
            assert!((r - want).abs() < 1e-9, "n = {n}: {r}");
        }
        let near = BallPoint::on_axis(3, 0.999, 0).unwrap();
        assert!(hyperbolic_laplacian_residual(|_| 0.0, &near, 1e-3).is_err());
    }

    #[test]
    fn kernel_is_hyperbolic_harmonic() {
        let zeta = UnitVector::new(vec![0.3, -0.4, 0.5, 0.2]).unwrap();
        let x = BallPoint::new(vec![0.2, 0.1, 0.3, -0.2]).unwrap();
        let u = |p: &BallPoint| poisson_szego(p, &zeta);
        let r = hyperbolic_laplacian_residual(u, &x, 1e-3).unwrap();
        assert!(r.abs() <= 1e-4 * (1.0 + u(&x)), "{r}");
    }
}
