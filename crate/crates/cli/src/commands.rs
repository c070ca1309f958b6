use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use qtomo::config::{OutputFormat, RunConfig};
use qtomo::io::{self, MomentRow};
use qtomo::moments::{extract_table, SampledTomogram, SliceSource};
use qtomo::quadrature::{gauss_rule_cached, rule_for_degree, QuadratureRule};
use qtomo::tomography::{grid_for_state, PureTomogram};
use qtomo::{DeformationParam, DirectMoments, Error, MomentTable};

use crate::options::{emit, RunArgs};

pub fn state(args: &RunArgs) -> Result<()> {
    let (cfg, d) = args.resolve()?;
    let state = cfg.state.build(d, cfg.trunc_eps).context("building the state")?;
    let text = match cfg.output.format {
        OutputFormat::Csv => io::state_to_csv(&cfg, &state),
        OutputFormat::Json => io::state_to_json(&cfg, &state),
    };
    emit(&cfg, &text)
}

pub fn tomogram(args: &RunArgs) -> Result<()> {
    let (cfg, d) = args.resolve()?;
    let grid = grid_for_state(
        &cfg.state,
        d,
        cfg.trunc_eps,
        cfg.grid.n_theta,
        cfg.grid.n_x,
        cfg.grid.layout,
    )
    .context("sampling the tomogram")?;
    let text = match cfg.output.format {
        OutputFormat::Csv => io::grid_to_csv(&cfg, &grid),
        OutputFormat::Json => io::grid_to_json(&cfg, &grid),
    };
    emit(&cfg, &text)
}

fn rule_for(cfg: &RunConfig, d: &DeformationParam, degree: usize) -> Result<QuadratureRule> {
    let rule = match cfg.integration_order {
        Some(order) => gauss_rule_cached(d, order)?,
        None => rule_for_degree(d, degree)?,
    };
    Ok((*rule).clone())
}

fn table_rows(table: &MomentTable, direct: Option<&MomentTable>) -> Vec<MomentRow> {
    let mut rows = Vec::new();
    for gamma in 0..=table.order() {
        for alpha in 0..=gamma {
            let beta = gamma - alpha;
            rows.push(MomentRow {
                alpha,
                beta,
                value: table.get(alpha, beta).expect("complete table"),
                direct: direct.and_then(|t| t.get(alpha, beta)),
            });
        }
    }
    rows
}

pub fn moments(args: &RunArgs, input: Option<&str>) -> Result<()> {
    let (mut cfg, d) = args.resolve()?;
    let gamma = cfg.gamma_max;
    let (table, direct) = match input {
        Some(path) => {
            let text = fs::read_to_string(Path::new(path)).with_context(|| format!("reading {path}"))?;
            let file = io::grid_from_str(&text).with_context(|| format!("parsing {path}"))?;
            let grid = file.into_grid(&d).with_context(|| format!("loading {path}"))?;
            for (flag, given, found) in [("--ntheta", args.ntheta, grid.n_theta()), ("--nx", args.nx, grid.n_x())] {
                if let Some(given) = given.filter(|&g| g != found) {
                    return Err(Error::IncompatibleGrid(format!(
                        "{flag} {given} but {path} has {found}"
                    )))
                    .with_context(|| format!("loading {path}"));
                }
            }
            cfg.grid.n_theta = grid.n_theta();
            cfg.grid.n_x = grid.n_x();
            cfg.grid.layout = grid.layout;
            let sampled = SampledTomogram::new(&grid).with_context(|| format!("loading {path}"))?;
            let rule = match (cfg.integration_order, sampled.native_rule()) {
                (None, Some(rule)) => rule.clone(),
                _ => rule_for(&cfg, &d, sampled.degree() + gamma)?,
            };
            (extract_table(&sampled, gamma, &rule)?.table, None)
        }
        None => {
            let state = cfg.state.build(d, cfg.trunc_eps).context("building the state")?;
            let tomo = PureTomogram::new(&state);
            let rule = rule_for(&cfg, &d, SliceSource::degree(&tomo) + gamma)?;
            let table = extract_table(&tomo, gamma, &rule)?.table;
            (table, Some(state.moment_table(gamma)?))
        }
    };
    let rows = table_rows(&table, direct.as_ref());
    let text = match cfg.output.format {
        OutputFormat::Csv => io::moments_to_csv(&cfg, &rows),
        OutputFormat::Json => io::moments_to_json(&cfg, &rows),
    };
    emit(&cfg, &text)
}
