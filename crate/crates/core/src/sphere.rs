//! Points of the unit ball and unit sphere, and integration against the
//! normalized surface measure dσ on S^{n-1}.
//!
//! Zonal integrands (functions of `⟨a, ζ⟩` for a fixed axis `a`) reduce to
//! a one-dimensional integral in `t = ⟨a, ζ⟩` with weight `(1-t²)^{(n-3)/2}`;
//! these are integrated with Gauss–Jacobi rules in that weight. Everything
//! else goes through seeded Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gamma::ln_gamma;
use crate::quadrature::gauss_jacobi;

/// Samples per Monte Carlo chunk. Each chunk owns one ChaCha stream.
pub const MC_CHUNK: usize = 4096;
/// Default node count for zonal quadrature.
pub const DEFAULT_NODES: usize = 200;

pub fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(domain(format!("dimension must be at least 3, got {n}")));
    }
    Ok(())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// A point of S^{n-1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(domain("non-finite coordinate"));
        }
        let r = norm(&coords);
        if r == 0.0 {
            return Err(domain("cannot normalize the zero vector"));
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / r).collect(),
        })
    }

    /// Standard basis vector `e_{axis+1}` (zero-based `axis`).
    pub fn basis(n: usize, axis: usize) -> Result<Self> {
        check_dim(n)?;
        if axis >= n {
            return Err(domain(format!("axis {axis} out of range for n = {n}")));
        }
        let mut coords = vec![0.0; n];
        coords[axis] = 1.0;
        Ok(Self { coords })
    }

    /// `e_n`, the "north pole".
    pub fn north(n: usize) -> Result<Self> {
        Self::basis(n, n.saturating_sub(1))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.coords, other)
    }

    /// Some unit vector orthogonal to `self`.
    pub fn orthogonal(&self) -> UnitVector {
        let (imin, _) = self
            .coords
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        let mut v: Vec<f64> = self.coords.iter().map(|c| -c * self.coords[imin]).collect();
        v[imin] += 1.0;
        let r = norm(&v);
        UnitVector {
            coords: v.into_iter().map(|c| c / r).collect(),
        }
    }
}

/// A point of the open unit ball B^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    coords: Vec<f64>,
}

impl BallPoint {
    /// Rejects points with `|x| >= 1 - 1e-15`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(domain("non-finite coordinate"));
        }
        let r = norm(&coords);
        if r >= 1.0 - 1e-15 {
            return Err(domain(format!("|x| = {r} is not inside the unit ball")));
        }
        Ok(Self { coords })
    }

    pub fn origin(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    /// `radius · e_{axis+1}`.
    pub fn on_axis(n: usize, radius: f64, axis: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&radius) {
            return Err(domain(format!("radius {radius} outside [0, 1)")));
        }
        let e = UnitVector::basis(n, axis)?;
        Self::new(e.coords.iter().map(|c| c * radius).collect())
    }

    /// `radius · direction`.
    pub fn along(direction: &UnitVector, radius: f64) -> Result<Self> {
        Self::new(direction.coords.iter().map(|c| c * radius).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.coords, &self.coords)
    }

    /// `1 - |x|²`.
    pub fn one_minus_norm_sq(&self) -> f64 {
        let r = self.norm();
        (1.0 - r) * (1.0 + r)
    }

    /// `x / |x|`, or `None` at the origin.
    pub fn direction(&self) -> Option<UnitVector> {
        let r = self.norm();
        (r > 0.0).then(|| UnitVector {
            coords: self.coords.iter().map(|c| c / r).collect(),
        })
    }

    /// `|x - ζ|²`.
    pub fn dist_sq(&self, zeta: &UnitVector) -> f64 {
        self.coords
            .iter()
            .zip(&zeta.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ZonalGaussLegendre,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::ZonalGaussLegendre => write!(f, "zonal"),
            Method::MonteCarlo => write!(f, "monte-carlo"),
        }
    }
}

/// How a surface integral is computed. `nodes` is the node count of the
/// zonal rule or the Monte Carlo sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: Method,
    pub nodes: usize,
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn zonal(nodes: usize) -> Self {
        Self {
            method: Method::ZonalGaussLegendre,
            nodes,
            seed: 0,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            method: Method::MonteCarlo,
            nodes: samples,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min = match self.method {
            Method::ZonalGaussLegendre => 2,
            Method::MonteCarlo => 1,
        };
        if self.nodes < min {
            return Err(domain(format!(
                "{} quadrature needs at least {min} nodes, got {}",
                self.method, self.nodes
            )));
        }
        Ok(())
    }

    pub fn is_zonal(&self) -> bool {
        self.method == Method::ZonalGaussLegendre
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::zonal(DEFAULT_NODES)
    }
}

/// A scalar estimate with its standard error (zero for deterministic rules).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }
}

/// Componentwise estimate of a vector-valued integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorEstimate {
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl VectorEstimate {
    pub fn exact(value: Vec<f64>) -> Self {
        let stderr = vec![0.0; value.len()];
        Self { value, stderr }
    }

    /// Euclidean norm of the value with a first-order standard error.
    pub fn norm(&self) -> Estimate {
        let value = norm(&self.value);
        let stderr = if value > 0.0 {
            let var: f64 = self
                .value
                .iter()
                .zip(&self.stderr)
                .map(|(v, s)| (v / value * s).powi(2))
                .sum();
            var.sqrt()
        } else {
            norm(&self.stderr)
        };
        Estimate { value, stderr }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn draw_unit(rng: &mut ChaCha8Rng, n: usize, buf: &mut Vec<f64>) {
    loop {
        buf.clear();
        buf.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let r = norm(buf);
        if r > 0.0 {
            buf.iter_mut().for_each(|c| *c /= r);
            return;
        }
    }
}

/// `count` independent uniform points on S^{n-1}, reproducible from `seed`.
/// Sample `i` always comes from chunk `i / MC_CHUNK`, so the first `k`
/// samples do not depend on `count`.
pub fn uniform_sphere_sample(n: usize, count: usize, seed: u64) -> Result<Vec<UnitVector>> {
    check_dim(n)?;
    let chunks = count.div_ceil(MC_CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let len = MC_CHUNK.min(count - chunk * MC_CHUNK);
            let mut rng = chunk_rng(seed, chunk);
            let mut buf = Vec::with_capacity(n);
            (0..len)
                .map(|_| {
                    draw_unit(&mut rng, n, &mut buf);
                    UnitVector {
                        coords: buf.clone(),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect())
}

/// Running mean and sum of squared deviations per component.
#[derive(Clone)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *m;
            *m += delta / self.count;
            *s += delta * (v - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let total = self.count + other.count;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.count / total;
            self.m2[i] += other.m2[i] + delta * delta * self.count * other.count / total;
        }
        self.count = total;
    }

    fn finish(self) -> VectorEstimate {
        let n = self.count;
        let stderr = self
            .m2
            .iter()
            .map(|&s| {
                if n > 1.0 {
                    (s / (n - 1.0) / n).sqrt()
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        VectorEstimate {
            value: self.mean,
            stderr,
        }
    }
}

/// Monte Carlo mean of a vector-valued `f` over `samples` uniform points.
///
/// Chunks run in parallel, but each chunk is summed serially and the
/// chunk moments are merged in chunk order, so the result is identical for
/// any thread count.
pub fn monte_carlo_vector<F>(
    f: F,
    dim: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<VectorEstimate>
where
    F: Fn(&UnitVector) -> Vec<f64> + Sync,
{
    check_dim(n)?;
    if samples == 0 {
        return Err(domain("Monte Carlo needs at least one sample"));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let len = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut rng = chunk_rng(seed, chunk);
            let mut moments = Moments::new(dim);
            let mut buf = Vec::with_capacity(n);
            for _ in 0..len {
                draw_unit(&mut rng, n, &mut buf);
                let zeta = UnitVector {
                    coords: buf.clone(),
                };
                moments.push(&f(&zeta));
            }
            moments
        })
        .collect();
    let mut total = Moments::new(dim);
    for m in &partials {
        total.merge(m);
    }
    Ok(total.finish())
}

/// Monte Carlo estimate of `∫ f dσ` with its standard error.
pub fn monte_carlo_surface_integral<F>(f: F, n: usize, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&UnitVector) -> f64 + Sync,
{
    spec.validate()?;
    if spec.method != Method::MonteCarlo {
        return Err(Error::MethodMismatch(
            "monte_carlo_surface_integral requires the monte-carlo method".into(),
        ));
    }
    let est = monte_carlo_vector(|z| vec![f(z)], 1, n, spec.nodes, spec.seed)?;
    Ok(Estimate {
        value: est.value[0],
        stderr: est.stderr[0],
    })
}

/// `ω_{n-2} / ω_{n-1} = Γ(n/2) / (√π Γ((n-1)/2))`, the density of
/// `t = ⟨a, ζ⟩` relative to `(1-t²)^{(n-3)/2} dt`. Defined for `n >= 2`.
pub fn surface_ratio(n: usize) -> f64 {
    assert!(n >= 2, "surface_ratio needs n >= 2");
    let nf = n as f64;
    let (a, _) = ln_gamma(nf / 2.0).unwrap();
    let (b, _) = ln_gamma((nf - 1.0) / 2.0).unwrap();
    (a - b - 0.5 * std::f64::consts::PI.ln()).exp()
}

/// Exponent of the zonal weight `(1-t²)^α` on S^{n-1}.
fn zonal_alpha(n: usize) -> f64 {
    (n as f64 - 3.0) / 2.0
}

/// Nodes `t_i` and weights `w_i` with
/// `Σ w_i g(t_i) ≈ ∫_{S^{n-1}} 1{lo <= ⟨a,ζ⟩ <= hi} g(⟨a,ζ⟩) dσ(ζ)`.
/// Valid for `n >= 2` and `-1 <= lo < hi <= 1`.
pub fn zonal_nodes(n: usize, lo: f64, hi: f64, nodes: usize) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(domain(format!("zonal rule needs n >= 2, got {n}")));
    }
    if nodes < 2 {
        return Err(domain(format!(
            "zonal rule needs at least 2 nodes, got {nodes}"
        )));
    }
    if !(-1.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(domain(format!("invalid zonal interval [{lo}, {hi}]")));
    }
    let alpha = zonal_alpha(n);
    if lo == -1.0 && hi == 1.0 {
        let rule = gauss_jacobi(nodes, alpha, alpha)?;
        return Ok(rule
            .nodes
            .iter()
            .copied()
            .zip(rule.weights.iter().copied())
            .collect());
    }
    // t = mid + half·u; the endpoint factors touching ±1 go into the Jacobi weight.
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let a_u = if hi == 1.0 { alpha } else { 0.0 };
    let b_u = if lo == -1.0 { alpha } else { 0.0 };
    let rule = gauss_jacobi(nodes, a_u, b_u)?;
    let (g1, _) = ln_gamma(a_u + 1.0)?;
    let (g2, _) = ln_gamma(b_u + 1.0)?;
    let (g3, _) = ln_gamma(a_u + b_u + 2.0)?;
    let ln_mass = (a_u + b_u + 1.0) * std::f64::consts::LN_2 + g1 + g2 - g3;
    let scale = surface_ratio(n) * half * (ln_mass + (a_u + b_u) * half.ln()).exp();
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&u, &w)| {
            let t = mid + half * u;
            let mut factor = 1.0;
            if hi < 1.0 {
                factor *= ((1.0 - hi) + half * (1.0 - u)).powf(alpha);
            }
            if lo > -1.0 {
                factor *= ((1.0 + lo) + half * (1.0 + u)).powf(alpha);
            }
            (t, w * scale * factor)
        })
        .collect())
}

/// Composite zonal rule on `[lo, hi]` with panels graded geometrically
/// toward `t = 1` (or `t = -1` when `toward_top` is false): panel edges sit
/// at distance `width · 4^k` from that end. Suited to integrands peaked at
/// the end with characteristic width `width`. `nodes` is split evenly over
/// the panels with a floor of 16 per panel.
pub fn graded_zonal_nodes(
    n: usize,
    lo: f64,
    hi: f64,
    nodes: usize,
    width: f64,
    toward_top: bool,
) -> Result<Vec<(f64, f64)>> {
    if !(width > 0.0) {
        return Err(domain(format!("panel width must be positive, got {width}")));
    }
    // Work in distance from the peaked end.
    let (near, far) = if toward_top {
        (1.0 - hi, 1.0 - lo)
    } else {
        (lo + 1.0, hi + 1.0)
    };
    let mut edges = vec![near];
    let mut d = width;
    while d < far {
        if d > near {
            edges.push(d);
        }
        d *= 4.0;
    }
    edges.push(far);
    let panels = edges.len() - 1;
    let per_panel = (nodes / panels).max(16);
    let mut out = Vec::with_capacity(per_panel * panels);
    for w in edges.windows(2) {
        let (a, b) = if toward_top {
            (1.0 - w[1], 1.0 - w[0])
        } else {
            (w[0] - 1.0, w[1] - 1.0)
        };
        out.extend(zonal_nodes(n, a.max(-1.0), b.min(1.0), per_panel)?);
    }
    Ok(out)
}

/// `∫_{S^{n-1}} g(⟨e_n, η⟩) dσ(η)` by Gauss–Jacobi in `t = cos θ`.
pub fn zonal_integral(n: usize, g: impl Fn(f64) -> f64, nodes: usize) -> Result<f64> {
    check_dim(n)?;
    Ok(zonal_nodes(n, -1.0, 1.0, nodes)?
        .into_iter()
        .map(|(t, w)| w * g(t))
        .sum())
}

/// Zonal integral restricted to the band `lo <= ⟨e_n, η⟩ <= hi`.
pub fn zonal_integral_over(
    n: usize,
    g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    nodes: usize,
) -> Result<f64> {
    check_dim(n)?;
    Ok(zonal_nodes(n, lo, hi, nodes)?
        .into_iter()
        .map(|(t, w)| w * g(t))
        .sum())
}

/// Product rule for integrands depending on two orthonormal directions:
/// returns `(t, u, w)` with
/// `Σ w g(t, u) ≈ ∫ 1{lo <= ⟨a,ζ⟩ <= hi} g(⟨a,ζ⟩, ⟨b,ζ⟩) dσ(ζ)` for `a ⊥ b`.
/// Writing `ζ = t a + √(1-t²) ω` with `ω` uniform on the S^{n-2} orthogonal
/// to `a`, `⟨b,ζ⟩ = √(1-t²) ⟨b,ω⟩` is zonal on that smaller sphere.
pub fn biaxial_nodes(n: usize, lo: f64, hi: f64, nodes: usize) -> Result<Vec<(f64, f64, f64)>> {
    check_dim(n)?;
    let outer = zonal_nodes(n, lo, hi, nodes)?;
    let inner = zonal_nodes(n - 1, -1.0, 1.0, nodes)?;
    let mut out = Vec::with_capacity(outer.len() * inner.len());
    for &(t, wt) in &outer {
        let r = (1.0 - t * t).max(0.0).sqrt();
        for &(s, ws) in &inner {
            out.push((t, r * s, wt * ws));
        }
    }
    Ok(out)
}

/// `T_x(η) = x - (1-|x|²)(η-x)/|η-x|²` without renormalization.
pub fn mobius_boundary_map_raw(x: &BallPoint, eta: &UnitVector) -> Vec<f64> {
    let diff: Vec<f64> = eta
        .coords
        .iter()
        .zip(&x.coords)
        .map(|(e, c)| e - c)
        .collect();
    let d2 = dot(&diff, &diff);
    let s = x.one_minus_norm_sq() / d2;
    x.coords.iter().zip(&diff).map(|(c, d)| c - s * d).collect()
}

/// The boundary Möbius map `T_x`, a bijection of S^{n-1}.
pub fn mobius_boundary_map(x: &BallPoint, eta: &UnitVector) -> UnitVector {
    let v = mobius_boundary_map_raw(x, eta);
    let r = norm(&v);
    UnitVector {
        coords: v.into_iter().map(|c| c / r).collect(),
    }
}

/// `dσ(T_x η) / dσ(η) = (1-|x|²)^{n-1} / |η-x|^{2(n-1)}`.
pub fn mobius_jacobian(x: &BallPoint, eta: &UnitVector) -> f64 {
    let n = x.dim() as i32;
    (x.one_minus_norm_sq() / x.dist_sq(eta)).powi(n - 1)
}
