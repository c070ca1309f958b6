//! Optical tomograms `ω(X, θ)`.
//!
//! With `<X_θ|n>_q = e^{-inθ} J_n(X) Ψ_0(X)`, every tomogram factors as
//! `ω(X, θ) = |Ψ_0(X)|² · P_θ(X)` where `P_θ` is a polynomial in `X`. The
//! [`Tomogram`] trait exposes that polynomial part ("reduced" tomogram),
//! which is what Gauss quadrature against the vacuum measure integrates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockState, MomentTable};
use crate::qmath::{DeformationParam, QTable};
use crate::quadrature::{gauss_rule, JRecurrence, VacuumDensity, DENSITY_TOL};
use crate::states::StateSpec;

pub trait Tomogram: Sync {
    fn deformation(&self) -> &DeformationParam;

    /// Degree in `X` of the reduced tomogram.
    fn degree(&self) -> usize;

    /// `ω(X, θ) / |Ψ_0(X)|²`.
    fn reduced(&self, theta: f64, x: f64) -> f64;

    fn reduced_slice(&self, theta: f64, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.reduced(theta, x)).collect()
    }
}

fn phases(theta: f64, n: usize) -> Vec<Complex64> {
    (0..=n)
        .map(|k| Complex64::from_polar(1.0, -(k as f64) * theta))
        .collect()
}

/// Tomogram of a pure state: `|Ψ_0|² |Σ_n c_n e^{-inθ} J_n(X)|²`.
#[derive(Debug, Clone)]
pub struct PureTomogram {
    d: DeformationParam,
    amps: Vec<Complex64>,
    jrec: JRecurrence,
}

impl PureTomogram {
    pub fn new(s: &FockState) -> Self {
        let top = s.support_top();
        Self {
            d: *s.deformation(),
            amps: s.amplitudes()[..=top].to_vec(),
            jrec: JRecurrence::new(s.deformation(), top),
        }
    }

    fn amplitude_with(&self, theta: f64, x: f64, j: &mut [f64]) -> Complex64 {
        self.jrec.eval_into(x, j);
        let ph = phases(theta, self.amps.len() - 1);
        self.amps
            .iter()
            .zip(j.iter())
            .zip(&ph)
            .map(|((c, &jn), e)| c * e * jn)
            .sum()
    }
}

impl Tomogram for PureTomogram {
    fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    fn degree(&self) -> usize {
        2 * (self.amps.len() - 1)
    }

    fn reduced(&self, theta: f64, x: f64) -> f64 {
        let mut j = vec![0.0; self.amps.len()];
        self.amplitude_with(theta, x, &mut j).norm_sqr()
    }

    fn reduced_slice(&self, theta: f64, xs: &[f64]) -> Vec<f64> {
        let n = self.amps.len();
        let ph: Vec<Complex64> = phases(theta, n - 1)
            .into_iter()
            .zip(&self.amps)
            .map(|(e, c)| e * c)
            .collect();
        let mut j = vec![0.0; n];
        xs.iter()
            .map(|&x| {
                self.jrec.eval_into(x, &mut j);
                ph.iter().zip(&j).map(|(a, &jn)| a * jn).sum::<Complex64>().norm_sqr()
            })
            .collect()
    }
}

/// Tomogram of a density matrix: `|Ψ_0|² Σ_{n,m} ρ_{nm} J_n J_m e^{i(m-n)θ}`.
#[derive(Debug, Clone)]
pub struct DensityTomogram {
    d: DeformationParam,
    rho: DensityMatrix,
    jrec: JRecurrence,
}

impl DensityTomogram {
    pub fn new(rho: &DensityMatrix) -> Self {
        Self {
            d: *rho.deformation(),
            rho: rho.clone(),
            jrec: JRecurrence::new(rho.deformation(), rho.cutoff()),
        }
    }

    /// Full complex value of the reduced quadratic form; the imaginary part
    /// is floating-point residue for a Hermitian `ρ`.
    pub fn reduced_complex(&self, theta: f64, x: f64) -> Complex64 {
        let n = self.rho.cutoff();
        let j = self.jrec.eval(x, n);
        let v: Vec<Complex64> = phases(theta, n).into_iter().zip(&j).map(|(e, &jn)| e * jn).collect();
        let m = self.rho.matrix();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..=n {
            let mut row = Complex64::new(0.0, 0.0);
            for b in 0..=n {
                row += m[(a, b)] * v[b].conj();
            }
            acc += v[a] * row;
        }
        acc
    }
}

impl Tomogram for DensityTomogram {
    fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    fn degree(&self) -> usize {
        2 * self.rho.cutoff()
    }

    fn reduced(&self, theta: f64, x: f64) -> f64 {
        self.reduced_complex(theta, x).re
    }
}

/// Tomogram assembled from normally ordered moments:
/// `|Ψ_0|² Σ_{α+β<=Γ} e^{i(α-β)θ} (sqrt([α+β]!)/([α]![β]!)) J_{α+β}(X) <A†^α A^β>`.
#[derive(Debug, Clone)]
pub struct MomentTomogram {
    d: DeformationParam,
    gamma_max: usize,
    terms: Vec<(usize, usize, Complex64)>,
    jrec: JRecurrence,
}

impl MomentTomogram {
    pub fn new(t: &MomentTable, gamma_max: usize) -> Result<Self> {
        if gamma_max > t.order() {
            return Err(Error::IncompleteTable {
                alpha: gamma_max,
                beta: 0,
            });
        }
        t.require_complete(gamma_max)?;
        let d = *t.deformation();
        let qt = QTable::new(&d, gamma_max);
        let mut terms = Vec::new();
        for gamma in 0..=gamma_max {
            for alpha in 0..=gamma {
                let beta = gamma - alpha;
                let scale = (0.5 * qt.ln_factorial(gamma) - qt.ln_factorial(alpha) - qt.ln_factorial(beta)).exp();
                terms.push((alpha, beta, t.require(alpha, beta)? * scale));
            }
        }
        Ok(Self {
            d,
            gamma_max,
            terms,
            jrec: JRecurrence::new(&d, gamma_max),
        })
    }

    pub fn reduced_complex(&self, theta: f64, x: f64) -> Complex64 {
        let j = self.jrec.eval(x, self.gamma_max);
        self.terms
            .iter()
            .map(|&(a, b, c)| c * Complex64::from_polar(j[a + b], (a as f64 - b as f64) * theta))
            .sum()
    }
}

impl Tomogram for MomentTomogram {
    fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    fn degree(&self) -> usize {
        self.gamma_max
    }

    fn reduced(&self, theta: f64, x: f64) -> f64 {
        self.reduced_complex(theta, x).re
    }
}

/// `ω(X, θ)` of a pure state at one point.
pub fn tomogram_pure(s: &FockState, theta: f64, x: f64) -> Result<f64> {
    let rho0 = VacuumDensity::new(s.deformation(), DENSITY_TOL)?.eval(x);
    Ok(rho0 * PureTomogram::new(s).reduced(theta, x))
}

/// `ω(X, θ) = <X_θ|ρ|X_θ>` at one point.
pub fn tomogram_density(rho: &DensityMatrix, theta: f64, x: f64) -> Result<f64> {
    let rho0 = VacuumDensity::new(rho.deformation(), DENSITY_TOL)?.eval(x);
    Ok(rho0 * DensityTomogram::new(rho).reduced(theta, x))
}

/// `ω(X, θ)` from a moment table truncated at total order `gamma_max`.
pub fn tomogram_from_moments(t: &MomentTable, theta: f64, x: f64, gamma_max: usize) -> Result<f64> {
    let rho0 = VacuumDensity::new(t.deformation(), DENSITY_TOL)?.eval(x);
    Ok(rho0 * MomentTomogram::new(t, gamma_max)?.reduced(theta, x))
}

/// Where the X samples of a grid sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XLayout {
    /// Gauss nodes of the vacuum measure; the grid doubles as a quadrature.
    Gauss,
    /// Cell midpoints of a uniform partition of `(-L, L)`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    State { spec: StateSpec },
    FromMoments { gamma_max: usize },
    External,
}

/// Sampled `ω(θ_i, X_j)`, stored row-major with `θ` as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct TomogramGrid {
    pub d: DeformationParam,
    pub thetas: Vec<f64>,
    pub xs: Vec<f64>,
    pub layout: XLayout,
    /// Gauss weights when `layout` is [`XLayout::Gauss`].
    pub weights: Option<Vec<f64>>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

/// `θ_i = 2π i / n` for `i < n`.
pub fn theta_grid(n_theta: usize) -> Vec<f64> {
    (0..n_theta).map(|i| 2.0 * PI * i as f64 / n_theta as f64).collect()
}

/// Midpoints of `n_x` equal cells covering `(-L, L)`, mirrored exactly.
pub fn uniform_x_grid(d: &DeformationParam, n_x: usize) -> Vec<f64> {
    let l = d.support_bound();
    let h = 2.0 * l / n_x as f64;
    let mut xs: Vec<f64> = (0..n_x).map(|j| -l + (j as f64 + 0.5) * h).collect();
    for j in 0..n_x / 2 {
        xs[n_x - 1 - j] = -xs[j];
    }
    if n_x % 2 == 1 {
        xs[n_x / 2] = 0.0;
    }
    xs
}

/// Samples `source` on a uniform `θ` grid over `[0, 2π)` and the chosen X
/// layout. Rows are filled in parallel; every cell is computed
/// independently, so the output does not depend on scheduling.
pub fn make_grid(
    source: &dyn Tomogram,
    provenance: Provenance,
    n_theta: usize,
    n_x: usize,
    layout: XLayout,
) -> Result<TomogramGrid> {
    if n_theta < 2 || n_x < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 2x2 samples, got {n_theta}x{n_x}"
        )));
    }
    let d = *source.deformation();
    let (xs, weights) = match layout {
        XLayout::Gauss => {
            let rule = gauss_rule(&d, n_x)?;
            (rule.nodes().to_vec(), Some(rule.weights().to_vec()))
        }
        XLayout::Uniform => (uniform_x_grid(&d, n_x), None),
    };
    let density = VacuumDensity::new(&d, DENSITY_TOL)?;
    let rho0: Vec<f64> = xs.iter().map(|&x| density.eval(x)).collect();
    let thetas = theta_grid(n_theta);
    let rows: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&theta| {
            source
                .reduced_slice(theta, &xs)
                .into_iter()
                .zip(&rho0)
                .map(|(p, w)| p * w)
                .collect()
        })
        .collect();
    Ok(TomogramGrid {
        d,
        thetas,
        xs,
        layout,
        weights,
        values: rows.concat(),
        provenance,
    })
}

/// Builds the state described by `spec` and samples its tomogram.
pub fn grid_for_state(
    spec: &StateSpec,
    d: DeformationParam,
    trunc_eps: f64,
    n_theta: usize,
    n_x: usize,
    layout: XLayout,
) -> Result<TomogramGrid> {
    let state = spec.build(d, trunc_eps)?;
    make_grid(
        &PureTomogram::new(&state),
        Provenance::State { spec: spec.clone() },
        n_theta,
        n_x,
        layout,
    )
}

impl TomogramGrid {
    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_x(&self) -> usize {
        self.xs.len()
    }

    #[inline]
    pub fn value(&self, i_theta: usize, j_x: usize) -> f64 {
        self.values[i_theta * self.xs.len() + j_x]
    }

    pub fn row(&self, i_theta: usize) -> &[f64] {
        let n = self.xs.len();
        &self.values[i_theta * n..(i_theta + 1) * n]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(θ, X)` of the largest sample.
    pub fn argmax(&self) -> (f64, f64) {
        let (k, _) = self.values.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc },
        );
        let n = self.xs.len();
        (self.thetas[k / n], self.xs[k % n])
    }

    /// Per-row `∫ ω dX - 1` for Gauss layouts.
    pub fn normalization_errors(&self) -> Result<Option<Vec<f64>>> {
        let Some(w) = &self.weights else {
            return Ok(None);
        };
        let density = VacuumDensity::new(&self.d, DENSITY_TOL)?;
        let rho0: Vec<f64> = self.xs.iter().map(|&x| density.eval(x)).collect();
        Ok(Some(
            (0..self.n_theta())
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(w)
                        .zip(&rho0)
                        .map(|((v, w), r)| w * v / r)
                        .sum::<f64>()
                        - 1.0
                })
                .collect(),
        ))
    }

    /// Largest `|ω(θ_{i+shift}, X) - ω(θ_i, X)|` with row indices taken
    /// cyclically.
    pub fn row_shift_error(&self, shift: usize) -> f64 {
        let nt = self.n_theta();
        (0..nt)
            .flat_map(|i| {
                let k = (i + shift) % nt;
                self.row(i)
                    .iter()
                    .zip(self.row(k))
                    .map(|(a, b)| (a - b).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|ω(-X, θ+π) - ω(X, θ)|`. Needs an even `θ` count.
    pub fn reflection_error(&self) -> Result<f64> {
        let nt = self.n_theta();
        if !nt.is_multiple_of(2) {
            return Err(Error::InvalidArgument("reflection needs an even theta count".into()));
        }
        let nx = self.n_x();
        let mut worst: f64 = 0.0;
        for i in 0..nt {
            let k = (i + nt / 2) % nt;
            for j in 0..nx {
                worst = worst.max((self.value(k, nx - 1 - j) - self.value(i, j)).abs());
            }
        }
        Ok(worst)
    }

    /// Pearson correlation between `self` shifted by `shift` rows and
    /// `other`, on identical sample positions.
    pub fn correlation(&self, other: &TomogramGrid, shift: usize) -> Result<f64> {
        if self.n_theta() != other.n_theta() || self.xs != other.xs {
            return Err(Error::IncompatibleGrid(
                "correlation needs identical sample positions".into(),
            ));
        }
        let nt = self.n_theta();
        let mean_a = self.values.iter().sum::<f64>() / self.values.len() as f64;
        let mean_b = other.values.iter().sum::<f64>() / other.values.len() as f64;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for i in 0..nt {
            let k = (i + shift) % nt;
            for (a, b) in self.row(k).iter().zip(other.row(i)) {
                let (da, db) = (a - mean_a, b - mean_b);
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
        }
        Ok(sab / (saa * sbb).sqrt())
    }
}
