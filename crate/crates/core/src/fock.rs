//! Truncated q-deformed Fock space.
//!
//! States live on the basis `|0>_q .. |N>_q`. Ladder operators act through
//! `A|n> = sqrt([n]_q)|n-1>` and `A†|n> = sqrt([n+1]_q)|n+1>`; everything
//! else in this module (moments, normal-ordered coefficients, and the
//! moment expansion of a density operator) is built from those two rules.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::{DeformationParam, QTable};

/// Default tail-mass tolerance used by the state constructors.
pub const DEFAULT_TRUNC_EPS: f64 = 1e-16;

/// Largest Fock cutoff any constructor may choose.
pub const MAX_CUTOFF: usize = 512;

/// Number of top basis states that form the truncation guard band.
pub const GUARD_BAND: usize = 5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitude vector `c_0 .. c_N` over the q-deformed number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    d: DeformationParam,
    amps: Vec<Complex64>,
    trunc_eps: f64,
}

impl FockState {
    /// Normalizes `amps` and checks the truncation contract: the mass held
    /// in the top [`GUARD_BAND`] basis states must stay below `trunc_eps`.
    pub fn new(d: DeformationParam, amps: Vec<Complex64>, trunc_eps: f64) -> Result<Self> {
        if !(trunc_eps > 0.0 && trunc_eps < 1.0) {
            return Err(Error::InvalidTolerance(trunc_eps));
        }
        if amps.is_empty() {
            return Err(Error::DegenerateState("empty amplitude vector"));
        }
        if amps.len() > MAX_CUTOFF + 1 {
            return Err(Error::CutoffExceeded {
                cap: MAX_CUTOFF,
                eps: trunc_eps,
            });
        }
        let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DegenerateState("zero or non-finite norm"));
        }
        let amps: Vec<Complex64> = amps.into_iter().map(|c| c / norm).collect();
        let state = Self { d, amps, trunc_eps };
        let tail = state.guard_band_mass();
        if tail >= trunc_eps {
            return Err(Error::InvalidArgument(format!(
                "guard-band mass {tail:e} is not below the truncation tolerance {trunc_eps:e}"
            )));
        }
        Ok(state)
    }

    /// Operator outputs are kept unnormalized.
    fn raw(d: DeformationParam, amps: Vec<Complex64>, trunc_eps: f64) -> Self {
        Self { d, amps, trunc_eps }
    }

    /// The number state `|n>_q`, with cutoff `n + GUARD_BAND`.
    pub fn number(d: DeformationParam, n: usize) -> Result<Self> {
        if n + GUARD_BAND > MAX_CUTOFF {
            return Err(Error::CutoffExceeded {
                cap: MAX_CUTOFF,
                eps: DEFAULT_TRUNC_EPS,
            });
        }
        let mut amps = vec![ZERO; n + GUARD_BAND + 1];
        amps[n] = Complex64::new(1.0, 0.0);
        Self::new(d, amps, DEFAULT_TRUNC_EPS)
    }

    pub fn vacuum(d: DeformationParam) -> Self {
        Self::number(d, 0).expect("vacuum always fits")
    }

    #[inline]
    pub fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    /// Highest retained basis index `N`.
    #[inline]
    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    #[inline]
    pub fn trunc_eps(&self) -> f64 {
        self.trunc_eps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn guard_band_mass(&self) -> f64 {
        let start = self.amps.len().saturating_sub(GUARD_BAND);
        self.amps[start..].iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest index carrying a nonzero amplitude.
    pub fn support_top(&self) -> usize {
        self.amps.iter().rposition(|c| *c != ZERO).unwrap_or(0)
    }

    /// `<self|other>`, padding the shorter vector with zeros.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|| self - scale * other ||`, padding the shorter vector with zeros.
    pub fn residual_norm(&self, other: &FockState, scale: Complex64) -> f64 {
        let len = self.amps.len().max(other.amps.len());
        (0..len)
            .map(|n| {
                let a = self.amps.get(n).copied().unwrap_or(ZERO);
                let b = other.amps.get(n).copied().unwrap_or(ZERO);
                (a - scale * b).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    fn table(&self) -> QTable {
        QTable::new(&self.d, self.amps.len() + 1)
    }

    /// `A|s>`; the top amplitude has no source and becomes zero.
    pub fn apply_annihilation(&self) -> FockState {
        let t = self.table();
        let n_max = self.cutoff();
        let mut out = vec![ZERO; n_max + 1];
        for (n, slot) in out.iter_mut().enumerate().take(n_max) {
            *slot = self.amps[n + 1] * t.int(n + 1).sqrt();
        }
        Self::raw(self.d, out, self.trunc_eps)
    }

    /// `A†|s>`, refusing to push non-negligible mass past the cutoff.
    pub fn apply_creation(&self) -> Result<FockState> {
        let n_max = self.cutoff();
        let top = self.amps[n_max].norm();
        if top >= self.trunc_eps {
            return Err(Error::TruncationOverflow {
                amplitude: top,
                eps: self.trunc_eps,
            });
        }
        let t = self.table();
        let mut out = vec![ZERO; n_max + 1];
        for n in 0..n_max {
            out[n + 1] = self.amps[n] * t.int(n + 1).sqrt();
        }
        Ok(Self::raw(self.d, out, self.trunc_eps))
    }

    /// Two-photon annihilation `A†⁻¹A`: `|n> -> sqrt([n]/[n-1]) |n-2>` for
    /// `n >= 2`; the `|0>` and `|1>` components are annihilated.
    pub fn apply_tao_even(&self) -> FockState {
        self.apply_tao(|t, n| (t.int(n) / t.int(n - 1)).sqrt())
    }

    /// Two-photon annihilation `AA†⁻¹`: `|n> -> sqrt([n-1]/[n]) |n-2>` for
    /// `n >= 2`; the `|0>` and `|1>` components are annihilated.
    pub fn apply_tao_odd(&self) -> FockState {
        self.apply_tao(|t, n| (t.int(n - 1) / t.int(n)).sqrt())
    }

    fn apply_tao(&self, factor: impl Fn(&QTable, usize) -> f64) -> FockState {
        let t = self.table();
        let n_max = self.cutoff();
        let mut out = vec![ZERO; n_max + 1];
        for n in 2..=n_max {
            out[n - 2] += self.amps[n] * factor(&t, n);
        }
        Self::raw(self.d, out, self.trunc_eps)
    }
}

/// Normally ordered moments `<A†^α A^β>` evaluated directly in Fock space.
pub trait DirectMoments {
    fn deformation(&self) -> &DeformationParam;

    fn cutoff(&self) -> usize;

    /// `<A†^α A^β>`. Fails with [`Error::OrderTooHigh`] when α or β exceeds
    /// the cutoff.
    fn moment_direct(&self, alpha: usize, beta: usize) -> Result<Complex64>;

    /// Every moment with `α + β <= order`.
    fn moment_table(&self, order: usize) -> Result<MomentTable> {
        let mut table = MomentTable::new(*self.deformation(), order);
        let n_max = self.cutoff();
        for gamma in 0..=order {
            for alpha in 0..=gamma {
                let beta = gamma - alpha;
                // Outside the truncated space the moments vanish identically.
                let value = if alpha > n_max || beta > n_max {
                    ZERO
                } else {
                    self.moment_direct(alpha, beta)?
                };
                table.set(alpha, beta, value);
            }
        }
        Ok(table)
    }
}

fn check_order(alpha: usize, beta: usize, cutoff: usize) -> Result<()> {
    if alpha > cutoff || beta > cutoff {
        return Err(Error::OrderTooHigh { alpha, beta, cutoff });
    }
    Ok(())
}

impl DirectMoments for FockState {
    fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    fn cutoff(&self) -> usize {
        FockState::cutoff(self)
    }

    /// `<A^α s | A^β s>`.
    fn moment_direct(&self, alpha: usize, beta: usize) -> Result<Complex64> {
        let n_max = FockState::cutoff(self);
        check_order(alpha, beta, n_max)?;
        let t = QTable::new(&self.d, n_max);
        let top = n_max - alpha.max(beta);
        Ok((0..=top)
            .map(|j| {
                self.amps[j + alpha].conj()
                    * self.amps[j + beta]
                    * (t.sqrt_falling(j + alpha, alpha) * t.sqrt_falling(j + beta, beta))
            })
            .sum())
    }
}

/// Hermitian, unit-trace matrix over the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    d: DeformationParam,
    mat: DMatrix<Complex64>,
}

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(d: DeformationParam, mat: DMatrix<Complex64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidDensity(format!(
                "matrix is {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let rho = Self { d, mat };
        let herm = rho.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian ({herm:e})")));
        }
        let trace = rho.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace is {trace}")));
        }
        let min = rho.min_eigenvalue();
        if min < -EIGEN_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    fn unchecked(d: DeformationParam, mat: DMatrix<Complex64>) -> Self {
        Self { d, mat }
    }

    pub fn from_pure(s: &FockState) -> Self {
        let c = s.amplitudes();
        let n = c.len();
        Self::unchecked(*s.deformation(), DMatrix::from_fn(n, n, |i, j| c[i] * c[j].conj()))
    }

    /// Equal-weight mixture of number states `|0> .. |n-1>`.
    pub fn maximally_mixed(d: DeformationParam, n: usize, cutoff: usize) -> Result<Self> {
        if n == 0 || n > cutoff + 1 {
            return Err(Error::InvalidArgument(format!(
                "cannot mix {n} states under cutoff {cutoff}"
            )));
        }
        let mut mat = DMatrix::zeros(cutoff + 1, cutoff + 1);
        for k in 0..n {
            mat[(k, k)] = Complex64::new(1.0 / n as f64, 0.0);
        }
        Self::new(d, mat)
    }

    #[inline]
    pub fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.mat.nrows() - 1
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.mat.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Embeds the matrix in a larger truncation by zero padding.
    pub fn padded(&self, cutoff: usize) -> DMatrix<Complex64> {
        let n = cutoff.max(self.cutoff()) + 1;
        let mut out = DMatrix::zeros(n, n);
        out.view_mut((0, 0), self.mat.shape()).copy_from(&self.mat);
        out
    }

    /// `½ tr|ρ - σ|`, computed on the larger of the two truncations.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let cutoff = self.cutoff().max(other.cutoff());
        let diff = self.padded(cutoff) - other.padded(cutoff);
        let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        0.5 * herm.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Largest entrywise modulus of `ρ - σ` on the common padded truncation.
    pub fn max_abs_difference(&self, other: &DensityMatrix) -> f64 {
        let cutoff = self.cutoff().max(other.cutoff());
        (self.padded(cutoff) - other.padded(cutoff))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl DirectMoments for DensityMatrix {
    fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    fn cutoff(&self) -> usize {
        DensityMatrix::cutoff(self)
    }

    /// `Tr(ρ A†^α A^β)` using `<m|A†^α A^β|n> = δ_{m-α,n-β}
    /// sqrt([m]!/[m-α]!) sqrt([n]!/[n-β]!)`.
    fn moment_direct(&self, alpha: usize, beta: usize) -> Result<Complex64> {
        let n_max = DensityMatrix::cutoff(self);
        check_order(alpha, beta, n_max)?;
        let t = QTable::new(&self.d, n_max);
        let top = n_max - alpha.max(beta);
        Ok((0..=top)
            .map(|j| {
                self.mat[(j + beta, j + alpha)] * (t.sqrt_falling(j + alpha, alpha) * t.sqrt_falling(j + beta, beta))
            })
            .sum())
    }
}

/// `<A†^α A^β>` for all `α + β <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    d: DeformationParam,
    order: usize,
    entries: Vec<Option<Complex64>>,
}

#[inline]
fn tri_index(alpha: usize, beta: usize) -> usize {
    let s = alpha + beta;
    s * (s + 1) / 2 + alpha
}

impl MomentTable {
    /// An empty table; entries are filled with [`MomentTable::set`].
    pub fn new(d: DeformationParam, order: usize) -> Self {
        Self {
            d,
            order,
            entries: vec![None; tri_index(0, order + 1)],
        }
    }

    #[inline]
    pub fn deformation(&self) -> &DeformationParam {
        &self.d
    }

    /// Highest total order `Γ = α + β` the table can hold.
    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn set(&mut self, alpha: usize, beta: usize, value: Complex64) {
        assert!(
            alpha + beta <= self.order,
            "({alpha}, {beta}) beyond order {}",
            self.order
        );
        self.entries[tri_index(alpha, beta)] = Some(value);
    }

    pub fn get(&self, alpha: usize, beta: usize) -> Option<Complex64> {
        if alpha + beta > self.order {
            return None;
        }
        self.entries[tri_index(alpha, beta)]
    }

    pub fn require(&self, alpha: usize, beta: usize) -> Result<Complex64> {
        self.get(alpha, beta).ok_or(Error::IncompleteTable { alpha, beta })
    }

    /// Checks that every entry up to `order` is present.
    pub fn require_complete(&self, order: usize) -> Result<()> {
        for gamma in 0..=order {
            for alpha in 0..=gamma {
                self.require(alpha, gamma - alpha)?;
            }
        }
        Ok(())
    }

    /// Iterates `(α, β, value)` over present entries, by order then α.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..=self.order).flat_map(move |gamma| {
            (0..=gamma).filter_map(move |alpha| {
                let beta = gamma - alpha;
                self.get(alpha, beta).map(|v| (alpha, beta, v))
            })
        })
    }

    /// Largest `|t(α,β) - conj(t(β,α))|` over present pairs.
    pub fn hermiticity_error(&self) -> f64 {
        self.iter()
            .filter_map(|(a, b, v)| self.get(b, a).map(|w| (v - w.conj()).norm()))
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference against another table over `α + β <= order`.
    pub fn max_abs_difference(&self, other: &MomentTable, order: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for gamma in 0..=order {
            for alpha in 0..=gamma {
                let beta = gamma - alpha;
                let d = self.require(alpha, beta)? - other.require(alpha, beta)?;
                worst = worst.max(d.norm());
            }
        }
        Ok(worst)
    }
}

/// Coefficient `F_{α,β}` of `F = Σ F_{αβ} A†^α A^β` recovered from the
/// Fock matrix elements of `F`:
/// `Σ_k (-1)^k q^{k(k-1)} <α-k|F|β-k> / ([k]! sqrt([α-k]! [β-k]!))`.
pub fn normal_order_coeff(
    f: &DMatrix<Complex64>,
    alpha: usize,
    beta: usize,
    d: &DeformationParam,
) -> Result<Complex64> {
    let need = alpha.max(beta);
    if f.nrows() <= need || f.ncols() <= need {
        return Err(Error::InvalidArgument(format!(
            "operator matrix {}x{} does not reach index {need}",
            f.nrows(),
            f.ncols()
        )));
    }
    let t = QTable::new(d, need);
    Ok((0..=alpha.min(beta))
        .map(|k| f[(alpha - k, beta - k)] * kernel_weight(&t, d, alpha, beta, k))
        .sum())
}

/// `(-1)^k q^{k(k-1)} / ([k]! sqrt([α-k]! [β-k]!))`.
fn kernel_weight(t: &QTable, d: &DeformationParam, alpha: usize, beta: usize, k: usize) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let ln_den = t.ln_factorial(k) + 0.5 * (t.ln_factorial(alpha - k) + t.ln_factorial(beta - k));
    sign * d.q().powi((k * k.saturating_sub(1)) as i32) * (-ln_den).exp()
}

/// Output of [`density_from_moments`].
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub density: DensityMatrix,
    /// Max-entry norm of `(ρ - ρ†)/2` before symmetrization.
    pub asymmetry: f64,
}

/// Assembles `ρ = Σ_{α+β<=Γ} ρ(α,β) <A†^α A^β>` with the operator kernel
/// `ρ(α,β) = Σ_k (-1)^k q^{k(k-1)} |β-k><α-k| / ([k]! sqrt([α-k]! [β-k]!))`.
///
/// The result lives on the basis `|0> .. |Γ>` and is symmetrized; the
/// asymmetry removed by that step is reported.
pub fn density_from_moments(t: &MomentTable) -> Result<Reconstruction> {
    let order = t.order();
    t.require_complete(order)?;
    let d = *t.deformation();
    let qt = QTable::new(&d, order);
    let mut mat = DMatrix::<Complex64>::zeros(order + 1, order + 1);
    for (alpha, beta, value) in t.iter() {
        for k in 0..=alpha.min(beta) {
            mat[(beta - k, alpha - k)] += value * kernel_weight(&qt, &d, alpha, beta, k);
        }
    }
    let asym = (&mat - mat.adjoint()) * Complex64::new(0.5, 0.0);
    let asymmetry = asym.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let herm = (&mat + mat.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(Reconstruction {
        density: DensityMatrix::unchecked(d, herm),
        asymmetry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::q_int;

    fn dp(q: f64) -> DeformationParam {
        DeformationParam::new(q).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn annihilation_examples() {
        let d = dp(0.5);
        let vac = FockState::vacuum(d);
        assert!(vac.apply_annihilation().norm_sqr() == 0.0);

        let one = FockState::number(d, 1).unwrap();
        let out = one.apply_annihilation();
        assert!((out.amplitudes()[0] - c(1.0)).norm() < 1e-15);

        let two = FockState::number(d, 2).unwrap();
        let out = two.apply_annihilation();
        assert!((out.amplitudes()[1] - c(1.25f64.sqrt())).norm() < 1e-15);
        assert!(out.norm_sqr() - 1.25 < 1e-15);
    }

    #[test]
    fn creation_examples() {
        let d = dp(0.5);
        let out = FockState::vacuum(d).apply_creation().unwrap();
        assert!((out.amplitudes()[1] - c(1.0)).norm() < 1e-15);
        let out = FockState::number(d, 1).unwrap().apply_creation().unwrap();
        assert!((out.amplitudes()[2] - c(1.25f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn creation_refuses_to_overflow_cutoff() {
        let d = dp(0.5);
        let mut amps = vec![ZERO; 8];
        amps[0] = c(1.0);
        amps[7] = c(1e-9);
        let s = FockState::raw(d, amps, 1e-12);
        assert!(matches!(s.apply_creation(), Err(Error::TruncationOverflow { .. })));
    }

    #[test]
    fn deformed_commutator_on_basis() {
        for q in [0.5, 0.7, 0.9] {
            let d = dp(q);
            for n in 0..=60 {
                let s = FockState::number(d, n).unwrap();
                let aad = s.apply_creation().unwrap().apply_annihilation();
                let ada = s.apply_annihilation().apply_creation().unwrap();
                let value = s.inner(&aad) - s.inner(&ada) * d.q_squared();
                assert!((value - c(1.0)).norm() < 1e-12, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn tao_examples() {
        let d = dp(0.5);
        let out = FockState::number(d, 2).unwrap().apply_tao_even();
        assert!((out.amplitudes()[0] - c((1.25f64 / 1.0).sqrt())).norm() < 1e-15);
        assert_eq!(FockState::vacuum(d).apply_tao_even().norm_sqr(), 0.0);

        let out = FockState::number(d, 3).unwrap().apply_tao_odd();
        assert!((out.amplitudes()[1] - c((1.25f64 / 1.3125).sqrt())).norm() < 1e-15);
        assert_eq!(FockState::number(d, 1).unwrap().apply_tao_odd().norm_sqr(), 0.0);
    }

    #[test]
    fn number_state_moments() {
        let d = dp(0.5);
        let two = FockState::number(d, 2).unwrap();
        assert!((two.moment_direct(1, 1).unwrap() - c(1.25)).norm() < 1e-14);
        let vac = FockState::vacuum(d);
        assert_eq!(vac.moment_direct(1, 1).unwrap(), ZERO);
        assert!(matches!(vac.moment_direct(6, 0), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn density_and_pure_moments_agree() {
        let d = dp(0.7);
        let amps = vec![
            Complex64::new(0.6, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.3, -0.3),
            Complex64::new(0.1, 0.2),
            ZERO,
            ZERO,
            ZERO,
            ZERO,
            ZERO,
        ];
        let s = FockState::new(d, amps, 1e-12).unwrap();
        let rho = DensityMatrix::from_pure(&s);
        for a in 0..4 {
            for b in 0..4 {
                let x = s.moment_direct(a, b).unwrap();
                let y = rho.moment_direct(a, b).unwrap();
                assert!((x - y).norm() < 1e-13);
                let z = s.moment_direct(b, a).unwrap();
                assert!((x - z.conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn number_operator_coefficients() {
        let d = dp(0.5);
        let n = 6;
        let f = DMatrix::from_fn(n, n, |i, j| if i == j { c(q_int(i, &d)) } else { ZERO });
        assert!((normal_order_coeff(&f, 1, 1, &d).unwrap() - c(1.0)).norm() < 1e-14);
        assert!(normal_order_coeff(&f, 0, 0, &d).unwrap().norm() < 1e-14);
        assert!(normal_order_coeff(&f, 2, 2, &d).unwrap().norm() < 1e-14);
        assert!(normal_order_coeff(&f, 3, 1, &d).unwrap().norm() < 1e-14);
        assert!(normal_order_coeff(&f, 6, 0, &d).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let d = dp(0.5);
        let bad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.7), c(0.7)]));
        assert!(DensityMatrix::new(d, bad).is_err());
        let neg = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(DensityMatrix::new(d, neg).is_err());
        assert!(DensityMatrix::maximally_mixed(d, 2, 4).is_ok());
    }

    #[test]
    fn vacuum_table_reconstructs_vacuum() {
        let d = dp(0.7);
        let mut t = MomentTable::new(d, 4);
        for g in 0..=4 {
            for a in 0..=g {
                t.set(a, g - a, ZERO);
            }
        }
        t.set(0, 0, c(1.0));
        let rec = density_from_moments(&t).unwrap();
        let vac = DensityMatrix::from_pure(&FockState::vacuum(d));
        assert!(rec.density.max_abs_difference(&vac) < 1e-15);
    }

    #[test]
    fn incomplete_table_is_rejected() {
        let d = dp(0.7);
        let mut t = MomentTable::new(d, 2);
        t.set(0, 0, c(1.0));
        assert_eq!(
            density_from_moments(&t).unwrap_err(),
            Error::IncompleteTable { alpha: 0, beta: 1 }
        );
    }

    #[test]
    fn number_one_round_trip() {
        let d = dp(0.9);
        let s = FockState::number(d, 1).unwrap();
        let rho = DensityMatrix::from_pure(&s);
        let t = rho.moment_table(2 * rho.cutoff()).unwrap();
        let rec = density_from_moments(&t).unwrap();
        assert!(rec.density.max_abs_difference(&rho) < 1e-8);
    }
}
