//! Normally ordered moments from tomograms.
//!
//! Projecting a tomogram slice on `J_γ` isolates the moments of total order
//! `γ`:
//!
//! `I_γ(θ) = ∫ ω(X, θ) J_γ(X) dX
//!         = Σ_{α=0..γ} e^{i(2α-γ)θ} sqrt([γ]!)/([α]! [γ-α]!) <A†^α A^{γ-α}>`.
//!
//! Sampling `I_γ` at `γ + 1` angles distinct modulo `π` gives a square
//! linear system for the `γ + 1` unknowns. With `θ_k = kπ/(γ+1)` the phase
//! part is a unitary DFT matrix up to a diagonal, so after scaling out the
//! q-factorial column factors its condition number is exactly 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::MomentTable;
use crate::qmath::{DeformationParam, QTable};
use crate::quadrature::{gauss_rule, JRecurrence, QuadratureRule, VacuumDensity, DENSITY_TOL};
use crate::tomography::{Tomogram, TomogramGrid};

/// Ceiling on the column-scaled condition number of the moment system.
pub const MAX_CONDITION: f64 = 1e8;

/// Smallest `|sin(θ_i - θ_j)|` accepted for two angles.
pub const ANGLE_SEPARATION: f64 = 1e-6;

/// Anything that can deliver reduced tomogram slices `ω/|Ψ_0|²` on the
/// nodes of a quadrature rule.
pub trait SliceSource: Sync {
    fn deformation(&self) -> &DeformationParam;

    /// Polynomial degree in `X` of the reduced slices.
    fn degree(&self) -> usize;

    fn slice(&self, theta: f64, rule: &QuadratureRule) -> Result<Vec<f64>>;

    /// Angles at which slices exist, or `None` when any angle works.
    fn angles(&self) -> Option<Vec<f64>> {
        None
    }

    /// Highest `γ` for which the slices carry real information, when the
    /// source is a truncated expansion.
    fn max_order(&self) -> Option<usize> {
        None
    }
}

impl<T: Tomogram> SliceSource for T {
    fn deformation(&self) -> &DeformationParam {
        Tomogram::deformation(self)
    }

    fn degree(&self) -> usize {
        Tomogram::degree(self)
    }

    fn slice(&self, theta: f64, rule: &QuadratureRule) -> Result<Vec<f64>> {
        Ok(self.reduced_slice(theta, rule.nodes()))
    }
}

/// A tomogram given as a plain function `ω(θ, X)` including the vacuum
/// weight. The caller states the polynomial degree of `ω / |Ψ_0|²`.
pub struct CallableTomogram<F> {
    d: DeformationParam,
    degree: usize,
    density: VacuumDensity,
    omega: F,
}

impl<F: Fn(f64, f64) -> f64 + Sync> CallableTomogram<F> {
    pub fn new(d: DeformationParam, degree: usize, omega: F) -> Result<Self> {
        Ok(Self {
            d,
            degree,
            density: VacuumDensity::new(&d, DENSITY_TOL)?,
            omega,
        })
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> SliceSource for CallableTomogram<F> {
    fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn slice(&self, theta: f64, rule: &QuadratureRule) -> Result<Vec<f64>> {
        Ok(rule
            .nodes()
            .iter()
            .map(|&x| (self.omega)(theta, x) / self.density.eval(x))
            .collect())
    }
}

/// Largest deviation from the identity tolerated in the discrete Gram matrix
/// of `J_0..J_m` on a non-Gauss grid before the fit degree `m` stops
/// growing.
pub const FIT_GRAM_TOL: f64 = 0.1;

/// A tomogram known only on a sampled grid, e.g. read from a file.
///
/// Each row is divided by the vacuum density and expanded as
/// `P_θ = Σ_γ c_γ(θ) J_γ`; the coefficients are exactly the projections
/// `I_γ(θ)`. On the Gauss nodes of order `n_x` the expansion is the discrete
/// orthogonal transform and exact through degree `n_x - 1`. On any other
/// layout it is a weighted least-squares fit whose degree is the largest
/// one for which the sampled `J_γ` stay numerically orthonormal.
#[derive(Debug, Clone)]
pub struct SampledTomogram {
    d: DeformationParam,
    thetas: Vec<f64>,
    xs: Vec<f64>,
    rows: Vec<Vec<f64>>,
    coeffs: Vec<Vec<f64>>,
    native_rule: Option<QuadratureRule>,
    fit_residual: f64,
}

impl SampledTomogram {
    pub fn new(grid: &TomogramGrid) -> Result<Self> {
        let nx = grid.n_x();
        if nx < 2 || grid.n_theta() == 0 || grid.values.len() != nx * grid.n_theta() {
            return Err(Error::IncompatibleGrid(format!(
                "{} values for a {}x{} grid",
                grid.values.len(),
                grid.n_theta(),
                nx
            )));
        }
        let l = grid.d.support_bound();
        if grid.xs.iter().any(|x| !(x.abs() < l)) {
            return Err(Error::IncompatibleGrid(format!(
                "X samples must lie inside (-{l}, {l})"
            )));
        }
        for pair in grid.xs.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::IncompatibleGrid("X samples must increase strictly".into()));
            }
        }
        let density = VacuumDensity::new(&grid.d, DENSITY_TOL)?;
        let rho0: Vec<f64> = grid.xs.iter().map(|&x| density.eval(x)).collect();
        if rho0.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::IncompatibleGrid(
                "X samples too close to the support edge".into(),
            ));
        }
        let rows: Vec<Vec<f64>> = (0..grid.n_theta())
            .map(|i| grid.row(i).iter().zip(&rho0).map(|(w, r)| w / r).collect())
            .collect();

        // Files do not always say how X was laid out, so check for Gauss nodes.
        let rule = gauss_rule(&grid.d, nx)?;
        let native_rule = rule
            .nodes()
            .iter()
            .zip(&grid.xs)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * l)
            .then_some(rule);

        let (weights, degree) = match &native_rule {
            Some(rule) => (rule.weights().to_vec(), nx - 1),
            None => {
                let weights = cell_weights(&grid.xs, &rho0, l);
                let degree = stable_fit_degree(&grid.d, &grid.xs, &weights);
                (weights, degree)
            }
        };
        let jrec = JRecurrence::new(&grid.d, degree);
        let basis: Vec<Vec<f64>> = grid.xs.iter().map(|&x| jrec.eval(x, degree)).collect();
        let coeffs = if native_rule.is_some() {
            rows.iter()
                .map(|row| {
                    (0..=degree)
                        .map(|g| (0..nx).map(|j| weights[j] * row[j] * basis[j][g]).sum())
                        .collect()
                })
                .collect()
        } else {
            least_squares(&basis, &weights, &rows, degree)?
        };
        let fit_residual = rows
            .iter()
            .zip(&coeffs)
            .flat_map(|(row, c)| {
                let (basis, rho0) = (&basis, &rho0);
                row.iter().enumerate().map(move |(j, p)| {
                    let fit: f64 = c.iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                    (p - fit).abs() * rho0[j]
                })
            })
            .fold(0.0, f64::max);
        Ok(Self {
            d: grid.d,
            thetas: grid.thetas.clone(),
            xs: grid.xs.clone(),
            rows,
            coeffs,
            native_rule,
            fit_residual,
        })
    }

    /// The Gauss rule whose nodes are the grid X positions, if any.
    pub fn native_rule(&self) -> Option<&QuadratureRule> {
        self.native_rule.as_ref()
    }

    /// Degree of the `J` expansion of each row.
    pub fn fit_degree(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Largest `|ω - |Ψ_0|² Σ c_γ J_γ|` over the samples.
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    fn row_index(&self, theta: f64) -> Result<usize> {
        let tau = 2.0 * std::f64::consts::PI;
        self.thetas
            .iter()
            .position(|&t| {
                let diff = (t - theta).rem_euclid(tau);
                diff.min(tau - diff) < 1e-9
            })
            .ok_or_else(|| Error::IncompatibleGrid(format!("no grid row at theta = {theta}")))
    }
}

/// `∫ ρ_0` over the cells around each sample (midpoint value times width),
/// the outer cells reaching the support edges.
fn cell_weights(xs: &[f64], rho0: &[f64], l: f64) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|j| {
            let lo = if j == 0 { -l } else { 0.5 * (xs[j - 1] + xs[j]) };
            let hi = if j + 1 == n { l } else { 0.5 * (xs[j] + xs[j + 1]) };
            rho0[j] * (hi - lo)
        })
        .collect()
}

/// Largest `m < n` such that the weighted Gram matrix of `J_0..J_m` on the
/// samples stays within [`FIT_GRAM_TOL`] of the identity.
fn stable_fit_degree(d: &DeformationParam, xs: &[f64], weights: &[f64]) -> usize {
    let top = xs.len() - 1;
    let jrec = JRecurrence::new(d, top);
    let basis: Vec<Vec<f64>> = xs.iter().map(|&x| jrec.eval(x, top)).collect();
    let mut degree = 0;
    let mut worst: f64 = 0.0;
    for m in 0..=top {
        // Only the new row/column of the leading block needs checking.
        for k in 0..=m {
            let g: f64 = basis.iter().zip(weights).map(|(b, w)| w * b[m] * b[k]).sum();
            let expect = if k == m { 1.0 } else { 0.0 };
            worst = worst.max((g - expect).abs());
        }
        if worst > FIT_GRAM_TOL {
            break;
        }
        degree = m;
    }
    degree
}

/// Weighted least-squares coefficients of every row in `J_0..J_degree`.
fn least_squares(basis: &[Vec<f64>], weights: &[f64], rows: &[Vec<f64>], degree: usize) -> Result<Vec<Vec<f64>>> {
    let m = degree + 1;
    let gram = DMatrix::from_fn(m, m, |a, b| {
        basis.iter().zip(weights).map(|(v, w)| w * v[a] * v[b]).sum::<f64>()
    });
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::IncompatibleGrid("X samples do not support a stable fit".into()))?;
    Ok(rows
        .iter()
        .map(|row| {
            let rhs = DVector::from_fn(m, |a, _| {
                basis
                    .iter()
                    .zip(weights)
                    .zip(row)
                    .map(|((v, w), p)| w * v[a] * p)
                    .sum::<f64>()
            });
            chol.solve(&rhs).iter().copied().collect()
        })
        .collect())
}

impl SliceSource for SampledTomogram {
    fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    fn degree(&self) -> usize {
        self.fit_degree()
    }

    fn slice(&self, theta: f64, rule: &QuadratureRule) -> Result<Vec<f64>> {
        let i = self.row_index(theta)?;
        let same_nodes = self.native_rule.is_some()
            && rule.order() == self.xs.len()
            && rule.nodes().iter().zip(&self.xs).all(|(a, b)| a == b);
        if same_nodes {
            return Ok(self.rows[i].clone());
        }
        let c = &self.coeffs[i];
        let jrec = JRecurrence::new(&self.d, c.len() - 1);
        let mut buf = vec![0.0; c.len()];
        Ok(rule
            .nodes()
            .iter()
            .map(|&x| {
                jrec.eval_into(x, &mut buf);
                c.iter().zip(&buf).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    fn angles(&self) -> Option<Vec<f64>> {
        Some(self.thetas.clone())
    }

    fn max_order(&self) -> Option<usize> {
        match self.native_rule {
            Some(_) => None,
            None => Some(self.fit_degree()),
        }
    }
}

/// `I_γ(θ_k)` sampled at `γ + 1` angles.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionVector {
    pub gamma: usize,
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
}

fn j_at_nodes(rule: &QuadratureRule, gamma: usize) -> Vec<f64> {
    let jrec = JRecurrence::new(rule.deformation(), gamma);
    let mut buf = vec![0.0; gamma + 1];
    rule.nodes()
        .iter()
        .map(|&x| {
            jrec.eval_into(x, &mut buf);
            buf[gamma]
        })
        .collect()
}

fn integrate_slice(rule: &QuadratureRule, slice: &[f64], j_gamma: &[f64]) -> f64 {
    rule.weights()
        .iter()
        .zip(slice)
        .zip(j_gamma)
        .map(|((w, p), j)| w * p * j)
        .sum()
}

fn check_rule(src: &dyn SliceSource, gamma: usize, rule: &QuadratureRule) -> Result<()> {
    if rule.deformation() != src.deformation() {
        return Err(Error::IncompatibleGrid(format!(
            "rule built for q = {}, tomogram has q = {}",
            rule.deformation().q(),
            src.deformation().q()
        )));
    }
    if let Some(top) = src.max_order().filter(|&top| gamma > top) {
        return Err(Error::IncompatibleGrid(format!(
            "order {gamma} requested but the sampled grid resolves orders up to {top}"
        )));
    }
    rule.require_exact(src.degree() + gamma)
}

/// `I_γ(θ) = ∫ ω(X, θ) J_γ(X) dX`, evaluated as `Σ_k w_k P_θ(X_k) J_γ(X_k)`
/// with `P_θ = ω/|Ψ_0|²`.
pub fn project(src: &dyn SliceSource, theta: f64, gamma: usize, rule: &QuadratureRule) -> Result<f64> {
    check_rule(src, gamma, rule)?;
    let slice = src.slice(theta, rule)?;
    Ok(integrate_slice(rule, &slice, &j_at_nodes(rule, gamma)))
}

fn check_separation(angles: &[f64]) -> Result<()> {
    for (i, &a) in angles.iter().enumerate() {
        for &b in &angles[i + 1..] {
            if (b - a).sin().abs() < ANGLE_SEPARATION {
                return Err(Error::DegenerateAngles { theta1: a, theta2: b });
            }
        }
    }
    Ok(())
}

/// `<A>` from two slices:
/// `(e^{iθ₂} I_1(θ₁) - e^{iθ₁} I_1(θ₂)) / (2i sin(θ₂ - θ₁))`.
pub fn extract_first_moment(
    src: &dyn SliceSource,
    theta1: f64,
    theta2: f64,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    let s = (theta2 - theta1).sin();
    if s.abs() < ANGLE_SEPARATION {
        return Err(Error::DegenerateAngles { theta1, theta2 });
    }
    let i1 = project(src, theta1, 1, rule)?;
    let i2 = project(src, theta2, 1, rule)?;
    let num = Complex64::from_polar(i1, theta2) - Complex64::from_polar(i2, theta1);
    Ok(num / Complex64::new(0.0, 2.0 * s))
}

/// `θ_k = kπ/(γ+1)`, `k = 0..=γ`.
pub fn default_angles(gamma: usize) -> Vec<f64> {
    (0..=gamma)
        .map(|k| std::f64::consts::PI * k as f64 / (gamma + 1) as f64)
        .collect()
}

/// Picks `γ + 1` angles out of `available`, distinct modulo `π` and spread
/// as evenly as the set allows.
pub fn select_angles(available: &[f64], gamma: usize) -> Result<Vec<f64>> {
    let pi = std::f64::consts::PI;
    let mut classes: Vec<(f64, f64)> = Vec::new();
    for &theta in available {
        let reduced = theta.rem_euclid(pi);
        let dup = classes.iter().any(|&(r, _)| {
            let diff = (r - reduced).abs();
            diff.min(pi - diff) < 1e-9
        });
        if !dup {
            classes.push((reduced, theta));
        }
    }
    classes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = classes.len();
    if m < gamma + 1 {
        return Err(Error::IncompatibleGrid(format!(
            "order {gamma} needs {} angles distinct modulo pi, grid has {m}",
            gamma + 1
        )));
    }
    let step = m as f64 / (gamma + 1) as f64;
    Ok((0..=gamma)
        .map(|k| classes[((k as f64 * step).round() as usize).min(m - 1)].1)
        .collect())
}

/// Result of solving for all moments of one total order.
#[derive(Debug, Clone)]
pub struct OrderExtraction {
    pub projections: ProjectionVector,
    /// `<A†^α A^{γ-α}>` for `α = 0..=γ`.
    pub moments: Vec<Complex64>,
    /// Condition number of the column-scaled system matrix.
    pub condition: f64,
    /// Largest `|m_α - conj(m_{γ-α})|`.
    pub pairing_deviation: f64,
}

fn order_scales(table: &QTable, gamma: usize) -> Vec<f64> {
    (0..=gamma)
        .map(|a| (0.5 * table.ln_factorial(gamma) - table.ln_factorial(a) - table.ln_factorial(gamma - a)).exp())
        .collect()
}

/// Solves for every `<A†^α A^{γ-α}>` from `γ + 1` projections.
///
/// Angles default to `kπ/(γ+1)`; a source restricted to fixed angles (a
/// sampled grid) gets a well-spread subset of its own.
pub fn extract_order(
    src: &dyn SliceSource,
    gamma: usize,
    rule: &QuadratureRule,
    angles: Option<&[f64]>,
) -> Result<OrderExtraction> {
    check_rule(src, gamma, rule)?;
    let angles = match angles {
        Some(a) => {
            if a.len() != gamma + 1 {
                return Err(Error::InvalidArgument(format!(
                    "order {gamma} needs {} angles, got {}",
                    gamma + 1,
                    a.len()
                )));
            }
            a.to_vec()
        }
        None => match src.angles() {
            Some(available) => select_angles(&available, gamma)?,
            None => default_angles(gamma),
        },
    };
    check_separation(&angles)?;

    let j_gamma = j_at_nodes(rule, gamma);
    let values = angles
        .iter()
        .map(|&theta| Ok(integrate_slice(rule, &src.slice(theta, rule)?, &j_gamma)))
        .collect::<Result<Vec<f64>>>()?;

    let n = gamma + 1;
    let phase = DMatrix::from_fn(n, n, |k, a| {
        Complex64::from_polar(1.0, (2.0 * a as f64 - gamma as f64) * angles[k])
    });
    let sv = phase.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = smax / smin;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let rhs = DVector::from_iterator(n, values.iter().map(|&v| Complex64::new(v, 0.0)));
    let y = phase.lu().solve(&rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;

    let scales = order_scales(&QTable::new(src.deformation(), gamma), gamma);
    let moments: Vec<Complex64> = y.iter().zip(&scales).map(|(v, s)| v / s).collect();
    let pairing_deviation = (0..n)
        .map(|a| (moments[a] - moments[gamma - a].conj()).norm())
        .fold(0.0, f64::max);

    Ok(OrderExtraction {
        projections: ProjectionVector { gamma, angles, values },
        moments,
        condition,
        pairing_deviation,
    })
}

/// Table plus the diagnostics gathered while extracting it.
#[derive(Debug, Clone)]
pub struct TableExtraction {
    pub table: MomentTable,
    /// `I_0` before the (0,0) entry is pinned to 1.
    pub normalization: f64,
    pub max_pairing_deviation: f64,
    pub max_condition: f64,
}

/// Extracts every moment up to total order `order`.
///
/// Each order is solved independently, then Hermitian pairs are averaged
/// and the `(0,0)` entry is set to 1.
pub fn extract_table(src: &dyn SliceSource, order: usize, rule: &QuadratureRule) -> Result<TableExtraction> {
    check_rule(src, order, rule)?;
    let mut table = MomentTable::new(*src.deformation(), order);
    let mut normalization = 1.0;
    let mut max_pairing_deviation: f64 = 0.0;
    let mut max_condition: f64 = 0.0;
    for gamma in 0..=order {
        let ex = extract_order(src, gamma, rule, None)?;
        max_pairing_deviation = max_pairing_deviation.max(ex.pairing_deviation);
        max_condition = max_condition.max(ex.condition);
        for a in 0..=gamma {
            let v = 0.5 * (ex.moments[a] + ex.moments[gamma - a].conj());
            table.set(a, gamma - a, v);
        }
        if gamma == 0 {
            normalization = ex.moments[0].re;
            table.set(0, 0, Complex64::new(1.0, 0.0));
        }
    }
    Ok(TableExtraction {
        table,
        normalization,
        max_pairing_deviation,
        max_condition,
    })
}

/// [`extract_table`] without the diagnostics.
pub fn moment_table_from_tomogram(src: &dyn SliceSource, order: usize, rule: &QuadratureRule) -> Result<MomentTable> {
    Ok(extract_table(src, order, rule)?.table)
}
