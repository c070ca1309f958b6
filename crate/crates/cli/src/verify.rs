//! Self-check suites behind `qtomo verify`.

use anyhow::Result;
use num_complex::Complex64;
use serde::Serialize;

use qtomo::config::RunConfig;
use qtomo::fock::DEFAULT_TRUNC_EPS;
use qtomo::moments::extract_table;
use qtomo::qmath::{q_binomial_delta, q_int, QTable};
use qtomo::quadrature::{dense_samples, gauss_rule, product_identity_residual, rule_for_degree, JRecurrence};
use qtomo::tomography::{make_grid, Provenance, PureTomogram, Tomogram};
use qtomo::{
    density_from_moments, DeformationParam, DensityMatrix, DirectMoments, FockState, Parity, SqueezedKind, StateSpec,
    XLayout,
};

pub const Q_VALUES: [f64; 3] = [0.5, 0.7, 0.9];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub q: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakRow {
    pub state: &'static str,
    /// `(q, max ω)` in the order of [`Q_VALUES`].
    pub peaks: Vec<(f64, f64)>,
    /// Peak grows as q decreases.
    pub increasing_with_deformation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub meta: RunConfig,
    pub sabotaged: bool,
    pub checks: Vec<Check>,
    pub peak_omega: Vec<PeakRow>,
    pub all_pass: bool,
}

fn check(suite: &'static str, q: f64, measured: f64, tolerance: f64) -> Check {
    Check {
        suite,
        q,
        measured,
        tolerance,
        pass: measured < tolerance,
    }
}

fn figure_states() -> [(&'static str, StateSpec); 4] {
    let alpha = Complex64::new(0.5f64.sqrt(), 0.0);
    [
        ("cat-even", StateSpec::cat(alpha, Parity::Even)),
        ("squeezed-vacuum", StateSpec::squeezed(0.5, 0.0, SqueezedKind::Vacuum)),
        ("cat-odd", StateSpec::cat(alpha, Parity::Odd)),
        ("squeezed-excited", StateSpec::squeezed(0.5, 0.0, SqueezedKind::Excited)),
    ]
}

fn algebra(d: &DeformationParam) -> Result<f64> {
    let p = d.q_squared();
    let mut worst: f64 = 0.0;
    for n in 0..=60 {
        let s = FockState::number(*d, n)?;
        let aad = s.apply_creation()?.apply_annihilation();
        let ada = s.apply_annihilation().apply_creation()?;
        for k in 0..=s.cutoff() {
            let lhs = aad.amplitudes()[k] - ada.amplitudes()[k] * p;
            worst = worst.max((lhs - s.amplitudes()[k]).norm());
        }
    }
    Ok(worst)
}

fn delta(d: &DeformationParam) -> f64 {
    (0..=12)
        .map(|p| (q_binomial_delta(p, d) - if p == 0 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Largest deviation of the Gram matrix of `J_0..J_20` from the identity
/// under the Gauss rule and under dense integration.
fn orthonormality(d: &DeformationParam, sabotage: bool) -> Result<(f64, f64)> {
    let n = 20;
    let jrec = if sabotage {
        let mut ints: Vec<f64> = (0..=n + 1).map(|k| q_int(k, d)).collect();
        ints[3] *= 1.01;
        JRecurrence::from_table(d, &QTable::from_ints(ints))
    } else {
        JRecurrence::new(d, n)
    };
    let gram_error = |samples: &[(f64, f64)]| {
        let mut g = vec![vec![0.0; n + 1]; n + 1];
        let mut buf = vec![0.0; n + 1];
        for &(x, w) in samples {
            jrec.eval_into(x, &mut buf);
            for i in 0..=n {
                for k in 0..=n {
                    g[i][k] += w * buf[i] * buf[k];
                }
            }
        }
        let mut worst: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                worst = worst.max((v - if i == k { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    };
    let rule = gauss_rule(d, n + 1)?;
    let gauss: Vec<(f64, f64)> = rule
        .nodes()
        .iter()
        .copied()
        .zip(rule.weights().iter().copied())
        .collect();
    Ok((gram_error(&gauss), gram_error(&dense_samples(d, 4000)?)))
}

fn identity(d: &DeformationParam) -> f64 {
    let l = d.support_bound();
    let mut worst: f64 = 0.0;
    for s in 0..50 {
        let x = l * (-0.98 + 1.96 * s as f64 / 49.0);
        for a in 0..=5 {
            for b in 0..=5 {
                worst = worst.max(product_identity_residual(a, b, x, d).abs());
            }
        }
    }
    worst
}

fn eigen_residual(d: &DeformationParam) -> Result<f64> {
    let xi = Complex64::new(-(0.5f64.tanh()), 0.0);
    let even = StateSpec::squeezed(0.5, 0.0, SqueezedKind::Vacuum).build(*d, DEFAULT_TRUNC_EPS)?;
    let odd = StateSpec::squeezed(0.5, 0.0, SqueezedKind::Excited).build(*d, DEFAULT_TRUNC_EPS)?;
    Ok(even
        .apply_tao_even()
        .residual_norm(&even, xi)
        .max(odd.apply_tao_odd().residual_norm(&odd, xi)))
}

/// Moment round trip for the figure states: (moment error up to order 6,
/// trace distance of the reconstructed projector).
fn round_trip(d: &DeformationParam) -> Result<(f64, f64)> {
    let mut moment_worst: f64 = 0.0;
    let mut trace_worst: f64 = 0.0;
    for (_, spec) in figure_states() {
        let state = spec.build(*d, DEFAULT_TRUNC_EPS)?;
        let tomo = PureTomogram::new(&state);
        let gamma = 2 * state.cutoff();
        let rule = rule_for_degree(d, Tomogram::degree(&tomo) + gamma)?;
        let table = extract_table(&tomo, gamma, &rule)?.table;
        moment_worst = moment_worst.max(table.max_abs_difference(&state.moment_table(6)?, 6)?);
        let rho = density_from_moments(&table)?.density;
        trace_worst = trace_worst.max(rho.trace_distance(&DensityMatrix::from_pure(&state)));
    }
    Ok((moment_worst, trace_worst))
}

fn peak_trend() -> Result<Vec<PeakRow>> {
    let mut rows = Vec::new();
    for (name, spec) in figure_states() {
        let mut peaks = Vec::new();
        for q in Q_VALUES {
            let d = DeformationParam::new(q)?;
            let state = spec.build(d, DEFAULT_TRUNC_EPS)?;
            let grid = make_grid(
                &PureTomogram::new(&state),
                Provenance::State { spec: spec.clone() },
                64,
                128,
                XLayout::Gauss,
            )?;
            peaks.push((q, grid.max_value()));
        }
        let increasing_with_deformation = peaks.windows(2).all(|w| w[0].1 > w[1].1);
        rows.push(PeakRow {
            state: name,
            peaks,
            increasing_with_deformation,
        });
    }
    Ok(rows)
}

pub fn run(meta: RunConfig, sabotage: bool) -> Result<Report> {
    let mut checks = Vec::new();
    for q in Q_VALUES {
        let d = DeformationParam::new(q)?;
        checks.push(check("algebra", q, algebra(&d)?, 1e-12));
        checks.push(check("q-binomial-delta", q, delta(&d), 1e-10));
        let (gauss, dense) = orthonormality(&d, sabotage)?;
        checks.push(check("orthonormality-gauss", q, gauss, 1e-8));
        checks.push(check("orthonormality-dense", q, dense, 1e-8));
        checks.push(check("product-identity", q, identity(&d), 1e-10));
        checks.push(check("eigen-residual", q, eigen_residual(&d)?, 1e-8));
        let (moments, trace) = round_trip(&d)?;
        checks.push(check("moment-round-trip", q, moments, 1e-6));
        checks.push(check("density-round-trip", q, trace, 1e-5));
    }
    let peak_omega = peak_trend()?;
    let all_pass = checks.iter().all(|c| c.pass) && peak_omega.iter().all(|r| r.increasing_with_deformation);
    Ok(Report {
        meta,
        sabotaged: sabotage,
        checks,
        peak_omega,
        all_pass,
    })
}

impl Report {
    pub fn human(&self) -> String {
        let mut out = String::new();
        if self.sabotaged {
            out.push_str("note: q-integers deliberately corrupted for the orthonormality suite\n");
        }
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<22} q={:<4} measured {:.3e}  tolerance {:.0e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.suite,
                c.q,
                c.measured,
                c.tolerance
            ));
        }
        out.push_str("peak omega by q (grid 64x128):\n");
        for r in &self.peak_omega {
            let peaks: Vec<String> = r.peaks.iter().map(|(q, m)| format!("q={q}: {m:.4}")).collect();
            out.push_str(&format!(
                "{} {:<17} {}\n",
                if r.increasing_with_deformation { "PASS" } else { "FAIL" },
                r.state,
                peaks.join("  ")
            ));
        }
        out.push_str(if self.all_pass {
            "all checks passed\n"
        } else {
            "some checks FAILED\n"
        });
        out
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
