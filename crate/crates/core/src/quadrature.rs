//! Quadrature polynomials `J_n`, the vacuum density `|Ψ_0(X)|²`, and
//! Gauss rules for the measure they are orthonormal against.
//!
//! `J_n` obeys
//! `J_{n+1} = ([2X/sqrt(1+q²)] J_n - sqrt([n]_q) J_{n-1}) / sqrt([n+1]_q)`,
//! so `X J_n = b_{n+1} J_{n+1} + b_n J_{n-1}` with
//! `b_n = (sqrt(1+q²)/2) sqrt([n]_q)`. The Jacobi matrix built from `b_n`
//! is bounded with spectrum `[-L, L]`, `L = sqrt((1+q²)/(1-q²))`; its
//! spectral measure is the continuous q-Hermite weight in base `q²`
//! rescaled to `X = L cos ϑ`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::qmath::{ln_q_pochhammer_inf, DeformationParam, QTable};

/// Default truncation for the infinite products in the vacuum density.
pub const DENSITY_TOL: f64 = 1e-17;

/// Evaluator for the recurrence, with the coefficients precomputed.
#[derive(Debug, Clone)]
pub struct JRecurrence {
    scale: f64,
    sqrt_ints: Vec<f64>,
}

impl JRecurrence {
    pub fn new(d: &DeformationParam, n_max: usize) -> Self {
        Self::from_table(d, &QTable::new(d, n_max + 1))
    }

    /// Uses the q-integers stored in `table`.
    pub fn from_table(d: &DeformationParam, table: &QTable) -> Self {
        Self {
            scale: 2.0 / (1.0 + d.q_squared()).sqrt(),
            sqrt_ints: table.ints().iter().map(|v| v.sqrt()).collect(),
        }
    }

    /// Highest degree this evaluator can produce.
    pub fn n_max(&self) -> usize {
        self.sqrt_ints.len() - 2
    }

    /// Writes `J_0(x) .. J_{out.len()-1}(x)` into `out`.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let Some(first) = out.first_mut() else {
            return;
        };
        *first = 1.0;
        if out.len() == 1 {
            return;
        }
        assert!(out.len() - 1 <= self.n_max() + 1, "degree beyond recurrence table");
        let sx = self.scale * x;
        out[1] = sx;
        for n in 1..out.len() - 1 {
            out[n + 1] = (sx * out[n] - self.sqrt_ints[n] * out[n - 1]) / self.sqrt_ints[n + 1];
        }
    }

    pub fn eval(&self, x: f64, n_max: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_max + 1];
        self.eval_into(x, &mut out);
        out
    }
}

/// `[J_0(X), .., J_{n_max}(X)]` in a single upward pass.
pub fn eval_j(n_max: usize, x: f64, d: &DeformationParam) -> Vec<f64> {
    JRecurrence::new(d, n_max).eval(x, n_max)
}

/// Difference between the two sides of the product identity
///
/// `Σ_k (-1)^k q^{k(k-1)} J_{α-k} J_{β-k} / ([k]! sqrt([α-k]! [β-k]!))
///   = sqrt([α+β]!) / ([α]! [β]!) · J_{α+β}`
///
/// at `x`, which is what turns the tomogram into a series in `J_{α+β}`.
pub fn product_identity_residual(alpha: usize, beta: usize, x: f64, d: &DeformationParam) -> f64 {
    let top = alpha + beta;
    let table = QTable::new(d, top);
    let j = eval_j(top, x, d);
    let lf = |n: usize| table.ln_factorial(n);
    let lhs: f64 = (0..=alpha.min(beta))
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let ln_coeff = (k * k.saturating_sub(1)) as f64 * d.q().ln() - lf(k) - 0.5 * (lf(alpha - k) + lf(beta - k));
            sign * ln_coeff.exp() * j[alpha - k] * j[beta - k]
        })
        .sum();
    let rhs = (0.5 * lf(top) - lf(alpha) - lf(beta)).exp() * j[top];
    lhs - rhs
}

/// Half-width `L` of the support of the vacuum density.
pub fn support_bound(d: &DeformationParam) -> f64 {
    d.support_bound()
}

/// Precomputed pieces of the vacuum density for one `q`.
#[derive(Debug, Clone)]
pub struct VacuumDensity {
    support: f64,
    ln_prefactor: f64,
    powers: Vec<f64>,
}

impl VacuumDensity {
    pub fn new(d: &DeformationParam, tol: f64) -> Result<Self> {
        let p = d.q_squared();
        let ln_pp = ln_q_pochhammer_inf(p, p, tol)?;
        let support = d.support_bound();
        let mut powers = Vec::new();
        let mut pk = p;
        while pk >= tol {
            powers.push(pk);
            pk *= p;
        }
        Ok(Self {
            support,
            ln_prefactor: ln_pp + (2.0 / (PI * support)).ln(),
            powers,
        })
    }

    /// `|Ψ_0(X)|² = (2/(πL)) sin ϑ (p;p)_∞ |(p e^{2iϑ}; p)_∞|²`,
    /// `cos ϑ = X/L`; zero outside the open support.
    ///
    /// Each factor uses `|1 - p^k e^{2iϑ}|² = (1-p^k)² + 4 p^k sin²ϑ`,
    /// which stays accurate when `p^k` is close to 1.
    pub fn eval(&self, x: f64) -> f64 {
        let u = x / self.support;
        if !(u.abs() < 1.0) {
            return 0.0;
        }
        let sin2 = (1.0 - u) * (1.0 + u);
        let mut ln = self.ln_prefactor + 0.5 * sin2.ln();
        for &pk in &self.powers {
            let one_minus = 1.0 - pk;
            ln += (one_minus * one_minus + 4.0 * pk * sin2).ln();
        }
        ln.exp()
    }
}

/// Vacuum density `|Ψ_0(X)|²` at a single point.
pub fn vacuum_density(x: f64, d: &DeformationParam, tol: f64) -> Result<f64> {
    Ok(VacuumDensity::new(d, tol)?.eval(x))
}

/// Nodes and weights of the midpoint rule in `ϑ` on `X = L cos ϑ`, with the
/// vacuum density folded into the weights.
///
/// The substituted integrand is smooth and periodic, so the rule converges
/// geometrically without touching the endpoints.
pub fn dense_samples(d: &DeformationParam, points: usize) -> Result<Vec<(f64, f64)>> {
    if points == 0 {
        return Err(Error::InvalidArgument("dense rule needs at least one point".into()));
    }
    let density = VacuumDensity::new(d, DENSITY_TOL)?;
    let l = d.support_bound();
    let h = PI / points as f64;
    Ok((0..points)
        .map(|i| {
            let theta = (i as f64 + 0.5) * h;
            let x = l * theta.cos();
            (x, density.eval(x) * l * theta.sin() * h)
        })
        .collect())
}

/// `∫ f(X) |Ψ_0(X)|² dX` over [`dense_samples`].
pub fn integrate_dense(d: &DeformationParam, points: usize, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
    Ok(dense_samples(d, points)?.into_iter().map(|(x, w)| w * f(x)).sum())
}

/// Gauss nodes and weights for the vacuum measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    d: DeformationParam,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    #[inline]
    pub fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Highest polynomial degree integrated exactly.
    #[inline]
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Fails unless polynomials of `degree` are integrated exactly.
    pub fn require_exact(&self, degree: usize) -> Result<()> {
        if degree > self.exact_degree() {
            return Err(Error::InsufficientRule {
                order: self.order(),
                exact: self.exact_degree(),
                needed: degree,
            });
        }
        Ok(())
    }
}

/// Golub-Welsch: nodes are the eigenvalues of the `order × order` Jacobi
/// matrix, weights the squared first components of its eigenvectors.
pub fn gauss_rule(d: &DeformationParam, order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be positive".into()));
    }
    let table = QTable::new(d, order);
    let half = 0.5 * (1.0 + d.q_squared()).sqrt();
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for n in 1..order {
        let b = half * table.int(n).sqrt();
        jacobi[(n - 1, n)] = b;
        jacobi[(n, n - 1)] = b;
    }
    let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure(format!("order {order} did not converge")))?;

    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // The measure is even: pair nodes exactly so reflections are bitwise.
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order {
        let j = order - 1 - i;
        if i > j {
            break;
        }
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::EigenFailure("weights do not sum to a positive value".into()));
    }
    for w in &mut weights {
        *w /= total;
    }
    let l = d.support_bound();
    if nodes.iter().any(|x| !(x.abs() < l)) {
        return Err(Error::EigenFailure("node outside the open support".into()));
    }
    Ok(QuadratureRule { d: *d, nodes, weights })
}

type RuleKey = (u64, usize);

fn rule_cache() -> &'static RwLock<HashMap<RuleKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Memoized [`gauss_rule`]. Readers only ever see fully built rules.
pub fn gauss_rule_cached(d: &DeformationParam, order: usize) -> Result<Arc<QuadratureRule>> {
    let key = (d.q().to_bits(), order);
    if let Some(rule) = rule_cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_rule(d, order)?);
    let mut cache = rule_cache().write().expect("rule cache poisoned");
    Ok(Arc::clone(cache.entry(key).or_insert(rule)))
}

/// Smallest Gauss rule integrating polynomials of `degree` exactly, with a
/// small margin.
pub fn rule_for_degree(d: &DeformationParam, degree: usize) -> Result<Arc<QuadratureRule>> {
    gauss_rule_cached(d, degree / 2 + 8)
}
