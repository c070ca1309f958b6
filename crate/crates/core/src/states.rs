//! Constructors for the q-deformed states: coherent, even/odd cat, the
//! eigenstates of the two-photon annihilation operators, and number states.
//!
//! Each constructor grows the amplitude series term by term and stops at
//! the first cutoff `N` where the guard band `N-4..=N` plus a geometric
//! bound on the discarded tail carries less than `trunc_eps` of the mass.
//! Normalization is then done numerically on the kept vector.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, DEFAULT_TRUNC_EPS, GUARD_BAND, MAX_CUTOFF};
use crate::qmath::{q_int, DeformationParam};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqueezedKind {
    Vacuum,
    Excited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Coherent,
    CatEven,
    CatOdd,
    TaoEven,
    TaoOdd,
    SqueezedVacuum,
    SqueezedExcited,
    Number,
}

impl StateKind {
    pub const ALL: [StateKind; 8] = [
        StateKind::Coherent,
        StateKind::CatEven,
        StateKind::CatOdd,
        StateKind::TaoEven,
        StateKind::TaoOdd,
        StateKind::SqueezedVacuum,
        StateKind::SqueezedExcited,
        StateKind::Number,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StateKind::Coherent => "coherent",
            StateKind::CatEven => "cat-even",
            StateKind::CatOdd => "cat-odd",
            StateKind::TaoEven => "tao-even",
            StateKind::TaoOdd => "tao-odd",
            StateKind::SqueezedVacuum => "squeezed-vacuum",
            StateKind::SqueezedExcited => "squeezed-excited",
            StateKind::Number => "number",
        }
    }

    /// Kinds whose support sits on one parity sector of the number basis.
    pub fn parity(self) -> Option<Parity> {
        match self {
            StateKind::CatEven | StateKind::TaoEven | StateKind::SqueezedVacuum => Some(Parity::Even),
            StateKind::CatOdd | StateKind::TaoOdd | StateKind::SqueezedExcited => Some(Parity::Odd),
            StateKind::Coherent | StateKind::Number => None,
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        if key == "vacuum" {
            return Ok(StateKind::Number);
        }
        StateKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown state kind {s:?}")))
    }
}

/// Everything needed to build one state. Fields that a kind does not use
/// are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateSpec {
    pub kind: StateKind,
    /// Coherent / cat amplitude.
    pub alpha: Complex64,
    /// Squeezing magnitude.
    pub r: f64,
    /// Squeezing phase, distinct from the quadrature angle.
    pub phi_s: f64,
    /// Eigenvalue of the two-photon annihilation operator.
    pub xi: Complex64,
    /// Number-state index.
    pub n: usize,
}

impl Default for StateSpec {
    fn default() -> Self {
        Self {
            kind: StateKind::Number,
            alpha: ZERO,
            r: 0.0,
            phi_s: 0.0,
            xi: ZERO,
            n: 0,
        }
    }
}

impl StateSpec {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn coherent(alpha: Complex64) -> Self {
        Self {
            kind: StateKind::Coherent,
            alpha,
            ..Self::default()
        }
    }

    pub fn cat(alpha: Complex64, parity: Parity) -> Self {
        let kind = match parity {
            Parity::Even => StateKind::CatEven,
            Parity::Odd => StateKind::CatOdd,
        };
        Self {
            kind,
            alpha,
            ..Self::default()
        }
    }

    pub fn tao(xi: Complex64, parity: Parity) -> Self {
        let kind = match parity {
            Parity::Even => StateKind::TaoEven,
            Parity::Odd => StateKind::TaoOdd,
        };
        Self {
            kind,
            xi,
            ..Self::default()
        }
    }

    pub fn squeezed(r: f64, phi_s: f64, which: SqueezedKind) -> Self {
        let kind = match which {
            SqueezedKind::Vacuum => StateKind::SqueezedVacuum,
            SqueezedKind::Excited => StateKind::SqueezedExcited,
        };
        Self {
            kind,
            r,
            phi_s,
            ..Self::default()
        }
    }

    pub fn number(n: usize) -> Self {
        Self { n, ..Self::default() }
    }

    /// Checks the kind-specific parameter domain against `d`.
    pub fn validate(&self, d: &DeformationParam) -> Result<()> {
        match self.kind {
            StateKind::Coherent | StateKind::CatEven | StateKind::CatOdd => {
                check_alpha(self.alpha, d)?;
                if self.kind == StateKind::CatOdd && self.alpha == ZERO {
                    return Err(Error::DegenerateState("odd cat state with alpha = 0"));
                }
            }
            StateKind::TaoEven | StateKind::TaoOdd => check_xi(self.xi)?,
            StateKind::SqueezedVacuum | StateKind::SqueezedExcited => {
                if !(self.r >= 0.0 && self.r.is_finite()) || !self.phi_s.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "squeezing needs finite r >= 0, got r = {}, phi_s = {}",
                        self.r, self.phi_s
                    )));
                }
            }
            StateKind::Number => {
                if self.n + GUARD_BAND > MAX_CUTOFF {
                    return Err(Error::CutoffExceeded {
                        cap: MAX_CUTOFF,
                        eps: DEFAULT_TRUNC_EPS,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn build(&self, d: DeformationParam, trunc_eps: f64) -> Result<FockState> {
        self.validate(&d)?;
        match self.kind {
            StateKind::Coherent => make_coherent(self.alpha, d, trunc_eps),
            StateKind::CatEven => make_cat(self.alpha, Parity::Even, d, trunc_eps),
            StateKind::CatOdd => make_cat(self.alpha, Parity::Odd, d, trunc_eps),
            StateKind::TaoEven => make_tao_eigenstate(self.xi, Parity::Even, d, trunc_eps),
            StateKind::TaoOdd => make_tao_eigenstate(self.xi, Parity::Odd, d, trunc_eps),
            StateKind::SqueezedVacuum => make_squeezed(self.r, self.phi_s, SqueezedKind::Vacuum, d, trunc_eps),
            StateKind::SqueezedExcited => make_squeezed(self.r, self.phi_s, SqueezedKind::Excited, d, trunc_eps),
            StateKind::Number => FockState::number(d, self.n),
        }
    }
}

fn check_alpha(alpha: Complex64, d: &DeformationParam) -> Result<()> {
    let modulus = alpha.norm();
    let radius = d.convergence_radius();
    if !(modulus < radius) {
        return Err(Error::DivergentAmplitude { modulus, radius });
    }
    Ok(())
}

fn check_xi(xi: Complex64) -> Result<()> {
    let modulus = xi.norm();
    if !(modulus < 1.0) {
        return Err(Error::DivergentAmplitude { modulus, radius: 1.0 });
    }
    Ok(())
}

/// Grows a series with nonzero terms at `offset + stride*k`.
///
/// `step(n)` returns the factor taking the amplitude at `n - stride` to the
/// amplitude at `n`, together with an upper bound on `|factor|²` for every
/// later step.
fn grow_series(
    first: Complex64,
    offset: usize,
    stride: usize,
    trunc_eps: f64,
    mut step: impl FnMut(usize) -> (Complex64, f64),
) -> Result<Vec<Complex64>> {
    if !(trunc_eps > 0.0 && trunc_eps < 1.0) {
        return Err(Error::InvalidTolerance(trunc_eps));
    }
    let mut amps = vec![ZERO; offset];
    amps.push(first);
    let mut total = first.norm_sqr();
    let mut last = first;
    let mut ratio_bound = f64::INFINITY;
    let mut next = offset + stride;
    loop {
        let top = amps.len() - 1;
        if top >= GUARD_BAND {
            let window: f64 = amps[top + 1 - GUARD_BAND..].iter().map(|c| c.norm_sqr()).sum();
            let tail = if last == ZERO {
                0.0
            } else if ratio_bound < 1.0 {
                last.norm_sqr() * ratio_bound / (1.0 - ratio_bound)
            } else {
                f64::INFINITY
            };
            if window + tail < trunc_eps * total {
                return Ok(amps);
            }
        }
        if top >= MAX_CUTOFF {
            return Err(Error::CutoffExceeded {
                cap: MAX_CUTOFF,
                eps: trunc_eps,
            });
        }
        if top + 1 == next {
            let (factor, bound) = step(next);
            last *= factor;
            ratio_bound = bound;
            total += last.norm_sqr();
            amps.push(last);
            next += stride;
        } else {
            amps.push(ZERO);
        }
    }
}

/// `|α>_q ∝ Σ α^n / sqrt([n]_q!) |n>_q`.
pub fn make_coherent(alpha: Complex64, d: DeformationParam, trunc_eps: f64) -> Result<FockState> {
    check_alpha(alpha, &d)?;
    let a2 = alpha.norm_sqr();
    let amps = grow_series(Complex64::new(1.0, 0.0), 0, 1, trunc_eps, |n| {
        // |α|²/[n+1] bounds every later step since [n] increases
        (alpha / q_int(n, &d).sqrt(), a2 / q_int(n + 1, &d))
    })?;
    FockState::new(d, amps, trunc_eps)
}

/// `(|α>_q ± |-α>_q)` normalized: the coherent series restricted to even
/// or odd `n`.
pub fn make_cat(alpha: Complex64, parity: Parity, d: DeformationParam, trunc_eps: f64) -> Result<FockState> {
    check_alpha(alpha, &d)?;
    let a2 = alpha * alpha;
    let bound_base = a2.norm();
    let (first, offset) = match parity {
        Parity::Even => (Complex64::new(1.0, 0.0), 0),
        Parity::Odd => {
            if alpha == ZERO {
                return Err(Error::DegenerateState("odd cat state with alpha = 0"));
            }
            (alpha, 1)
        }
    };
    let amps = grow_series(first, offset, 2, trunc_eps, |n| {
        let step = (q_int(n, &d) * q_int(n - 1, &d)).sqrt();
        let bound = bound_base * bound_base / (q_int(n + 2, &d) * q_int(n + 1, &d));
        (a2 / step, bound)
    })?;
    FockState::new(d, amps, trunc_eps)
}

/// Eigenstates of the two-photon annihilation operators.
///
/// Even: `c_{2n} ∝ ξ^n sqrt([2n-1]!!/[2n]!!)`, eigenvector of `A†⁻¹A`.
/// Odd: `c_{2n+1} ∝ ξ^n sqrt([2n+1]!!/[2n]!!)`, eigenvector of `AA†⁻¹`.
pub fn make_tao_eigenstate(xi: Complex64, parity: Parity, d: DeformationParam, trunc_eps: f64) -> Result<FockState> {
    check_xi(xi)?;
    let x2 = xi.norm_sqr();
    let amps = match parity {
        // step ratio [2n-1]/[2n] < 1, so |ξ|² bounds every later step
        Parity::Even => grow_series(Complex64::new(1.0, 0.0), 0, 2, trunc_eps, |n| {
            let ratio = q_int(n - 1, &d) / q_int(n, &d);
            (xi * ratio.sqrt(), x2)
        })?,
        // step ratio [2n+1]/[2n] decreases towards 1
        Parity::Odd => grow_series(Complex64::new(1.0, 0.0), 1, 2, trunc_eps, |n| {
            let ratio = q_int(n, &d) / q_int(n - 1, &d);
            let next = q_int(n + 2, &d) / q_int(n + 1, &d);
            (xi * ratio.sqrt(), x2 * next)
        })?,
    };
    FockState::new(d, amps, trunc_eps)
}

/// Squeezed vacuum / first excited state with `ξ = -e^{iφ_s} tanh r`.
pub fn make_squeezed(
    r: f64,
    phi_s: f64,
    which: SqueezedKind,
    d: DeformationParam,
    trunc_eps: f64,
) -> Result<FockState> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("squeeze r must be >= 0, got {r}")));
    }
    let xi = -Complex64::from_polar(r.tanh(), phi_s);
    let parity = match which {
        SqueezedKind::Vacuum => Parity::Even,
        SqueezedKind::Excited => Parity::Odd,
    };
    make_tao_eigenstate(xi, parity, d, trunc_eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DirectMoments;
    use crate::qmath::{q_double_factorial_even, q_double_factorial_odd, q_factorial};

    fn dp(q: f64) -> DeformationParam {
        DeformationParam::new(q).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn coherent_zero_is_vacuum() {
        let s = make_coherent(ZERO, dp(0.7), DEFAULT_TRUNC_EPS).unwrap();
        assert_eq!(s.amplitudes()[0], re(1.0));
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn coherent_is_annihilation_eigenstate() {
        let alpha = re(0.5);
        let s = make_coherent(alpha, dp(0.7), DEFAULT_TRUNC_EPS).unwrap();
        assert!(s.apply_annihilation().residual_norm(&s, alpha) < 1e-8);

        let alpha = re(0.5f64.sqrt());
        let s = make_coherent(alpha, dp(0.9), DEFAULT_TRUNC_EPS).unwrap();
        assert!((s.moment_direct(0, 1).unwrap() - alpha).norm() < 1e-10);
    }

    #[test]
    fn coherent_rejects_divergent_amplitude() {
        let d = dp(0.5);
        let alpha = re(d.convergence_radius());
        assert!(matches!(
            make_coherent(alpha, d, DEFAULT_TRUNC_EPS),
            Err(Error::DivergentAmplitude { .. })
        ));
    }

    #[test]
    fn cat_parity_and_amplitudes() {
        let d = dp(0.9);
        let alpha = re(0.5f64.sqrt());
        let even = make_cat(alpha, Parity::Even, d, DEFAULT_TRUNC_EPS).unwrap();
        for (n, c) in even.amplitudes().iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(*c, ZERO);
            }
        }
        // superposition of two coherent states as an independent route
        let plus = make_coherent(alpha, d, DEFAULT_TRUNC_EPS).unwrap();
        let minus = make_coherent(-alpha, d, DEFAULT_TRUNC_EPS).unwrap();
        let len = plus.amplitudes().len();
        let sum: Vec<Complex64> = (0..len).map(|n| plus.amplitudes()[n] + minus.amplitudes()[n]).collect();
        let norm = sum.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for (a, s) in even.amplitudes().iter().zip(&sum) {
            assert!((a - s / norm).norm() < 1e-12);
        }
        // closed-form ratio α^{2n}/sqrt([2n]!)
        let c0 = even.amplitudes()[0];
        for n in 1..6 {
            let expect = alpha.powu(2 * n as u32) / q_factorial(2 * n, &d).unwrap().sqrt();
            assert!((even.amplitudes()[2 * n] / c0 - expect).norm() < 1e-12);
        }

        let odd = make_cat(alpha, Parity::Odd, d, DEFAULT_TRUNC_EPS).unwrap();
        assert!(odd.moment_direct(0, 1).unwrap().norm() < 1e-15);
        for (n, c) in odd.amplitudes().iter().enumerate() {
            if n % 2 == 0 {
                assert_eq!(*c, ZERO);
            }
        }
    }

    #[test]
    fn odd_cat_at_zero_is_degenerate() {
        assert!(matches!(
            make_cat(ZERO, Parity::Odd, dp(0.5), DEFAULT_TRUNC_EPS),
            Err(Error::DegenerateState(_))
        ));
    }

    #[test]
    fn tao_zero_eigenvalue() {
        let d = dp(0.7);
        let even = make_tao_eigenstate(ZERO, Parity::Even, d, DEFAULT_TRUNC_EPS).unwrap();
        assert_eq!(even.amplitudes()[0], re(1.0));
        let odd = make_tao_eigenstate(ZERO, Parity::Odd, d, DEFAULT_TRUNC_EPS).unwrap();
        assert_eq!(odd.amplitudes()[1], re(1.0));
        assert_eq!(odd.norm_sqr(), 1.0);
    }

    #[test]
    fn tao_rejects_unit_modulus() {
        assert!(make_tao_eigenstate(re(1.0), Parity::Even, dp(0.7), 1e-12).is_err());
    }

    #[test]
    fn tao_coefficients_follow_closed_form_and_recurrence() {
        let d = dp(0.9);
        let xi = re(-(0.5f64).tanh());
        let s = make_tao_eigenstate(xi, Parity::Even, d, DEFAULT_TRUNC_EPS).unwrap();
        let c = s.amplitudes();
        for n in 0..8 {
            let expect = xi.powu(n as u32) * (q_double_factorial_odd(n, &d) / q_double_factorial_even(n, &d)).sqrt();
            assert!((c[2 * n] / c[0] - expect).norm() < 1e-12);
        }
        for n in 0..c.len() - 2 {
            let lhs = xi * c[n];
            let rhs = c[n + 2] * (q_int(n + 2, &d) / q_int(n + 1, &d)).sqrt();
            // the top two amplitudes have no partner inside the cutoff
            if n + 2 <= s.cutoff() {
                assert!((lhs - rhs).norm() < 1e-14, "n = {n}");
            }
        }

        let s = make_tao_eigenstate(xi, Parity::Odd, d, DEFAULT_TRUNC_EPS).unwrap();
        let c = s.amplitudes();
        for n in 0..8 {
            let expect =
                xi.powu(n as u32) * (q_double_factorial_odd(n + 1, &d) / q_double_factorial_even(n, &d)).sqrt();
            assert!((c[2 * n + 1] / c[1] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn tao_eigen_residuals() {
        for q in [0.5, 0.7, 0.9] {
            let d = dp(q);
            for xi in [re(-0.5f64.tanh()), re(0.8), Complex64::from_polar(0.8, 1.1)] {
                let s = make_tao_eigenstate(xi, Parity::Even, d, DEFAULT_TRUNC_EPS).unwrap();
                assert!(s.apply_tao_even().residual_norm(&s, xi) < 1e-8, "q={q} xi={xi}");
                let s = make_tao_eigenstate(xi, Parity::Odd, d, DEFAULT_TRUNC_EPS).unwrap();
                assert!(s.apply_tao_odd().residual_norm(&s, xi) < 1e-8, "q={q} xi={xi}");
            }
        }
    }

    #[test]
    fn squeezed_maps_to_tao() {
        let d = dp(0.7);
        let s = make_squeezed(0.0, 0.0, SqueezedKind::Vacuum, d, DEFAULT_TRUNC_EPS).unwrap();
        assert_eq!(s.amplitudes()[0], re(1.0));
        let a = make_squeezed(0.5, 0.3, SqueezedKind::Excited, d, DEFAULT_TRUNC_EPS).unwrap();
        let xi = -Complex64::from_polar(0.5f64.tanh(), 0.3);
        let b = make_tao_eigenstate(xi, Parity::Odd, d, DEFAULT_TRUNC_EPS).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn squeezed_vacuum_non_deformed_limit() {
        let d = dp(0.999);
        let r = 0.5f64;
        let s = make_squeezed(r, 0.0, SqueezedKind::Vacuum, d, DEFAULT_TRUNC_EPS).unwrap();
        let c0 = s.amplitudes()[0];
        let mut ratio = 1.0; // (2n-1)!!/(2n)!!
        for n in 0..=10usize {
            if n > 0 {
                ratio *= (2 * n - 1) as f64 / (2 * n) as f64;
            }
            let standard = (-r.tanh()).powi(n as i32) * ratio.sqrt();
            let got = (s.amplitudes()[2 * n] / c0).re;
            // q-integers differ from integers by O(n(1 - q²)).
            assert!(((got - standard) / standard).abs() < 2e-3 * n as f64 + 1e-12, "n = {n}");
        }
    }

    #[test]
    fn tail_contract_holds() {
        let d = dp(0.9);
        for spec in [
            StateSpec::coherent(re(0.5f64.sqrt())),
            StateSpec::cat(re(0.5f64.sqrt()), Parity::Odd),
            StateSpec::squeezed(0.5, 0.0, SqueezedKind::Vacuum),
        ] {
            let s = spec.build(d, 1e-12).unwrap();
            assert!(s.guard_band_mass() < 1e-12);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("cat-even".parse::<StateKind>().unwrap(), StateKind::CatEven);
        assert_eq!(
            "Squeezed_Vacuum".parse::<StateKind>().unwrap(),
            StateKind::SqueezedVacuum
        );
        assert_eq!("vacuum".parse::<StateKind>().unwrap(), StateKind::Number);
        assert!("cat".parse::<StateKind>().is_err());
    }
}
