//! q-arithmetic for the math-type deformation `A A† - q² A† A = 1`.
//!
//! Everything here is double precision. Products run in increasing index
//! order so that results are reproducible bit for bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard limit on the number of factors taken in an infinite q-product.
pub const MAX_POCHHAMMER_FACTORS: usize = 50_000_000;

/// The deformation parameter `q` together with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DeformationParam {
    q: f64,
    p: f64,
    support_bound: f64,
    radius: f64,
}

impl DeformationParam {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidDeformation(q));
        }
        let p = q * q;
        let one_minus_p = 1.0 - p;
        Ok(Self {
            q,
            p,
            support_bound: ((1.0 + p) / one_minus_p).sqrt(),
            radius: 1.0 / one_minus_p.sqrt(),
        })
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// `q²`, the base of every q-integer.
    #[inline]
    pub fn q_squared(&self) -> f64 {
        self.p
    }

    /// Half-width `L` of the quadrature spectrum: `sqrt((1+q²)/(1-q²))`.
    #[inline]
    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    /// Radius `1/sqrt(1-q²)` inside which coherent-state series converge.
    #[inline]
    pub fn convergence_radius(&self) -> f64 {
        self.radius
    }
}

impl TryFrom<f64> for DeformationParam {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<DeformationParam> for f64 {
    fn from(d: DeformationParam) -> f64 {
        d.q
    }
}

/// The q-integer `[n]_q = (1 - q^{2n}) / (1 - q²)`.
pub fn q_int(n: usize, d: &DeformationParam) -> f64 {
    if n == 0 {
        return 0.0;
    }
    // expm1 keeps full relative precision as q approaches 1.
    let ln_p = d.p.ln();
    (n as f64 * ln_p).exp_m1() / ln_p.exp_m1()
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q`.
pub fn q_factorial(n: usize, d: &DeformationParam) -> Result<f64> {
    let mut acc = 1.0;
    for k in 1..=n {
        acc *= q_int(k, d);
        if !acc.is_finite() {
            return Err(Error::Overflow { n });
        }
    }
    Ok(acc)
}

/// `[2n-1]_q!! = [1]_q [3]_q ... [2n-1]_q`, equal to 1 for `n = 0`.
pub fn q_double_factorial_odd(n: usize, d: &DeformationParam) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * q_int(2 * k - 1, d))
}

/// `[2n]_q!! = [2]_q [4]_q ... [2n]_q`, equal to 1 for `n = 0`.
pub fn q_double_factorial_even(n: usize, d: &DeformationParam) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * q_int(2 * k, d))
}

/// Gaussian binomial `[n choose k]_q` in base `q²`, built as a ratio of
/// falling products so it never forms the full factorials.
pub fn q_binomial(n: usize, k: usize, d: &DeformationParam) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 1..=k {
        acc *= q_int(n - k + j, d) / q_int(j, d);
    }
    acc
}

/// Evaluates `sum_k [p choose k]_q (-1)^k q^{k(k-1)}`, which the q-binomial
/// theorem says is exactly `δ_{p,0}`.
pub fn q_binomial_delta(p_exp: usize, d: &DeformationParam) -> f64 {
    (0..=p_exp)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * d.q.powi((k * k.saturating_sub(1)) as i32) * q_binomial(p_exp, k, d)
        })
        .sum()
}

fn pochhammer_factor_count(base: f64, tol: f64) -> Result<usize> {
    if !(base > 0.0 && base < 1.0) {
        return Err(Error::InvalidBase(base));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if tol >= 1.0 {
        return Ok(0);
    }
    let needed = (tol.ln() / base.ln()).floor() + 1.0;
    if needed > MAX_POCHHAMMER_FACTORS as f64 {
        return Err(Error::TooManyFactors {
            needed,
            limit: MAX_POCHHAMMER_FACTORS,
        });
    }
    // Smallest K with base^K < tol; the product keeps factors k < K.
    let mut k = needed as usize;
    while k > 0 && base.powi(k as i32 - 1) < tol {
        k -= 1;
    }
    while base.powi(k as i32) >= tol {
        k += 1;
    }
    Ok(k)
}

/// `(a; base)_∞ = prod_{k>=0} (1 - a base^k)`, truncated at the first `K`
/// with `base^K < tol`.
pub fn q_pochhammer_inf(a: Complex64, base: f64, tol: f64) -> Result<Complex64> {
    let count = pochhammer_factor_count(base, tol)?;
    let mut acc = Complex64::new(1.0, 0.0);
    let mut power = 1.0;
    for _ in 0..count {
        acc *= Complex64::new(1.0, 0.0) - a * power;
        power *= base;
    }
    Ok(acc)
}

/// Logarithm of `(a; base)_∞` for real `a < 1`, for products that
/// underflow when formed directly (base close to 1).
pub fn ln_q_pochhammer_inf(a: f64, base: f64, tol: f64) -> Result<f64> {
    if a >= 1.0 && base > 0.0 && base < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "log of (a; q)_inf needs a < 1, got {a}"
        )));
    }
    let count = pochhammer_factor_count(base, tol)?;
    let mut acc = 0.0;
    let mut power = 1.0;
    for _ in 0..count {
        acc += (-a * power).ln_1p();
        power *= base;
    }
    Ok(acc)
}

/// Precomputed q-integers and log q-factorials up to a fixed index, used
/// by the hot loops in the Fock-space and tomography code.
#[derive(Debug, Clone)]
pub struct QTable {
    ints: Vec<f64>,
    ln_factorials: Vec<f64>,
}

impl QTable {
    pub fn new(d: &DeformationParam, n_max: usize) -> Self {
        let ints: Vec<f64> = (0..=n_max).map(|n| q_int(n, d)).collect();
        Self::from_ints(ints)
    }

    /// Builds the table from explicit q-integer values. Only the
    /// self-check harness feeds anything other than [`q_int`] here.
    pub fn from_ints(ints: Vec<f64>) -> Self {
        let mut ln_factorials = Vec::with_capacity(ints.len());
        let mut acc = 0.0;
        for (n, v) in ints.iter().enumerate() {
            if n > 0 {
                acc += v.ln();
            }
            ln_factorials.push(acc);
        }
        Self { ints, ln_factorials }
    }

    pub fn len(&self) -> usize {
        self.ints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ints.is_empty()
    }

    #[inline]
    pub fn int(&self, n: usize) -> f64 {
        self.ints[n]
    }

    pub fn ints(&self) -> &[f64] {
        &self.ints
    }

    #[inline]
    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.ln_factorials[n]
    }

    /// `sqrt([m]_q! / [m-k]_q!)`.
    #[inline]
    pub fn sqrt_falling(&self, m: usize, k: usize) -> f64 {
        (0.5 * (self.ln_factorials[m] - self.ln_factorials[m - k])).exp()
    }
}
