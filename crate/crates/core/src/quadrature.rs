//! Gauss–Jacobi rules on `[-1, 1]` for the weight `(1-t)^α (1+t)^β`.
//!
//! Nodes are the eigenvalues of the Jacobi matrix of the monic recurrence
//! (implicit QL, no eigenvectors), polished by Newton steps on the
//! orthonormal polynomial of degree `n`. Weights come from the
//! Christoffel function `1 / Σ p_k(t)^2` and are normalized so that they
//! sum to one: a rule integrates against the probability measure
//! proportional to the weight function.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{domain, Result};

/// Normalized Gauss rule: `Σ weights[i] f(nodes[i]) ≈ ∫ f w / ∫ w`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

type RuleKey = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached normalized Gauss–Jacobi rule with `n` nodes.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Arc<GaussRule>> {
    if n == 0 {
        return Err(domain("Gauss rule needs at least one node"));
    }
    if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(domain(format!(
            "Jacobi exponents must exceed -1 (alpha = {alpha}, beta = {beta})"
        )));
    }
    let key = (n, alpha.to_bits(), beta.to_bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_rule(n, alpha, beta));
    cache()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| Arc::clone(&rule));
    Ok(rule)
}

/// Normalized Gauss–Legendre rule (weights sum to one, not two).
pub fn gauss_legendre(n: usize) -> Result<Arc<GaussRule>> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Diagonal entry `a_k` of the Jacobi matrix.
fn recurrence_a(k: usize, alpha: f64, beta: f64) -> f64 {
    let ab = alpha + beta;
    if k == 0 {
        return (beta - alpha) / (ab + 2.0);
    }
    let s = 2.0 * k as f64 + ab;
    (beta * beta - alpha * alpha) / (s * (s + 2.0))
}

/// Off-diagonal entry `b_k = sqrt(β_k)` of the Jacobi matrix, `k >= 1`.
fn recurrence_b(k: usize, alpha: f64, beta: f64) -> f64 {
    let ab = alpha + beta;
    let kf = k as f64;
    let b2 = if k == 1 {
        4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
    } else {
        let s = 2.0 * kf + ab;
        4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
    };
    b2.sqrt()
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with shifts.
/// `diag` is overwritten with the eigenvalues; `off[i]` couples rows `i` and `i+1`.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &[f64]) {
    let n = diag.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "QL iteration failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Orthonormal polynomial values `p_0..p_n` at `t` plus `p_n'(t)`.
fn orthonormal_eval(t: f64, a: &[f64], b: &[f64], sum_sq_upto: usize) -> (f64, f64, f64) {
    // b[k] couples p_{k-1} and p_k (b[0] unused).
    let n = a.len();
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    let mut sum_sq = if sum_sq_upto > 0 { 1.0 } else { 0.0 };
    for k in 0..n {
        let b_k = if k == 0 { 0.0 } else { b[k] };
        let p_next = ((t - a[k]) * p - b_k * p_prev) / b[k + 1];
        let d_next = ((t - a[k]) * d + p - b_k * d_prev) / b[k + 1];
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        if k + 1 < sum_sq_upto {
            sum_sq += p * p;
        }
    }
    (p, d, sum_sq)
}

fn build_rule(n: usize, alpha: f64, beta: f64) -> GaussRule {
    let a: Vec<f64> = (0..n).map(|k| recurrence_a(k, alpha, beta)).collect();
    // b[k] for k = 0..=n; b[0] is a placeholder.
    let b: Vec<f64> = (0..=n)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                recurrence_b(k, alpha, beta)
            }
        })
        .collect();

    let mut nodes = a.clone();
    if n > 1 {
        tridiagonal_eigenvalues(&mut nodes, &b[1..n]);
    }
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut weights = Vec::with_capacity(n);
    for t in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d, _) = orthonormal_eval(*t, &a, &b, 0);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let step = p / d;
            if !step.is_finite() {
                break;
            }
            let cand = *t - step;
            if cand.abs() >= 1.0 {
                break;
            }
            *t = cand;
            if step.abs() <= 1e-16 * t.abs().max(1e-300) {
                break;
            }
        }
        let (_, _, sum_sq) = orthonormal_eval(*t, &a, &b, n);
        weights.push(1.0 / sum_sq);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    GaussRule {
        nodes,
        weights,
        alpha,
        beta,
    }
}
