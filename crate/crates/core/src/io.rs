//! Text formats for amplitude dumps, tomogram grids and moment tables.
//!
//! Every output starts with the resolved [`RunConfig`]: CSV files carry it
//! on a `# config: ` comment line ahead of the header, JSON files under
//! `meta`. Numbers in CSV use 17 significant digits so that doubles survive
//! a round trip.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::qmath::DeformationParam;
use crate::tomography::{Provenance, TomogramGrid, XLayout};

const CONFIG_PREFIX: &str = "# config: ";
pub const GRID_HEADER: [&str; 3] = ["theta", "x", "omega"];

/// `{:.16e}`: 17 significant digits in lowercase scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn config_line(cfg: &RunConfig) -> String {
    format!("{CONFIG_PREFIX}{}\n", cfg.to_json_line())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub prob: f64,
}

/// Rows for every nonzero amplitude.
pub fn amplitude_rows(state: &FockState) -> Vec<AmplitudeRow> {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(n, c)| AmplitudeRow {
            n,
            re: c.re,
            im: c.im,
            prob: c.norm_sqr(),
        })
        .collect()
}

pub fn state_to_csv(cfg: &RunConfig, state: &FockState) -> String {
    let mut out = config_line(cfg);
    out.push_str("n,re,im,prob\n");
    for r in amplitude_rows(state) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            fmt_num(r.re),
            fmt_num(r.im),
            fmt_num(r.prob)
        ));
    }
    out
}

pub fn state_to_json(cfg: &RunConfig, state: &FockState) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        meta: &'a RunConfig,
        cutoff: usize,
        amplitudes: Vec<AmplitudeRow>,
    }
    to_json(&Doc {
        meta: cfg,
        cutoff: state.cutoff(),
        amplitudes: amplitude_rows(state),
    })
}

pub fn grid_to_csv(cfg: &RunConfig, grid: &TomogramGrid) -> String {
    let mut out = config_line(cfg);
    out.push_str(&GRID_HEADER.join(","));
    out.push('\n');
    for (i, &theta) in grid.thetas.iter().enumerate() {
        let t = fmt_num(theta);
        for (&x, &w) in grid.xs.iter().zip(grid.row(i)) {
            out.push_str(&format!("{t},{},{}\n", fmt_num(x), fmt_num(w)));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridJson {
    #[serde(default)]
    meta: Option<RunConfig>,
    thetas: Vec<f64>,
    xs: Vec<f64>,
    values: Vec<Vec<f64>>,
}

pub fn grid_to_json(cfg: &RunConfig, grid: &TomogramGrid) -> String {
    to_json(&GridJson {
        meta: Some(cfg.clone()),
        thetas: grid.thetas.clone(),
        xs: grid.xs.clone(),
        values: (0..grid.n_theta()).map(|i| grid.row(i).to_vec()).collect(),
    })
}

/// A grid as read from a file, before it is tied to a deformation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub meta: Option<RunConfig>,
    pub thetas: Vec<f64>,
    pub xs: Vec<f64>,
    /// Row-major, `θ` outer.
    pub values: Vec<f64>,
}

impl GridFile {
    /// Attaches the deformation `d`, rejecting files whose embedded config
    /// disagrees with it or with the grid's own shape.
    pub fn into_grid(self, d: &DeformationParam) -> Result<TomogramGrid> {
        let layout = match &self.meta {
            Some(meta) => {
                if meta.q != d.q() {
                    return Err(Error::IncompatibleGrid(format!(
                        "file was written for q = {}, run uses q = {}",
                        meta.q,
                        d.q()
                    )));
                }
                if meta.grid.n_theta != self.thetas.len() || meta.grid.n_x != self.xs.len() {
                    return Err(Error::IncompatibleGrid(format!(
                        "file declares a {}x{} grid but holds {}x{}",
                        meta.grid.n_theta,
                        meta.grid.n_x,
                        self.thetas.len(),
                        self.xs.len()
                    )));
                }
                meta.grid.layout
            }
            None => XLayout::Uniform,
        };
        if self.values.len() != self.thetas.len() * self.xs.len() {
            return Err(Error::IncompatibleGrid(
                "value count does not match the grid shape".into(),
            ));
        }
        Ok(TomogramGrid {
            d: *d,
            thetas: self.thetas,
            xs: self.xs,
            layout,
            weights: None,
            values: self.values,
            provenance: Provenance::External,
        })
    }
}

fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Parse(format!("non-finite {what} value {v}"))),
        None => Ok(()),
    }
}

fn parse_meta(text: &str) -> Result<Option<RunConfig>> {
    let mut meta = None;
    for line in text.lines() {
        if let Some(json) = line.strip_prefix(CONFIG_PREFIX) {
            if meta.is_some() {
                return Err(Error::Parse("more than one config line".into()));
            }
            meta = Some(RunConfig::from_json_str(json)?);
        }
    }
    Ok(meta)
}

pub fn grid_from_csv(text: &str) -> Result<GridFile> {
    let meta = parse_meta(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(GRID_HEADER) {
        return Err(Error::Parse(format!(
            "expected header `theta,x,omega`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut thetas: Vec<f64> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    let mut column = 0;
    for record in reader.deserialize::<(f64, f64, f64)>() {
        let (theta, x, omega) = record.map_err(|e| Error::Parse(e.to_string()))?;
        let new_row = thetas.last().is_none_or(|&t| t.to_bits() != theta.to_bits());
        if new_row {
            if thetas.len() == 1 {
                if xs.len() < 2 {
                    return Err(Error::Parse("a grid row needs at least two X samples".into()));
                }
            } else if !thetas.is_empty() && column != xs.len() {
                return Err(Error::Parse(format!(
                    "row at theta = {} is short",
                    thetas[thetas.len() - 1]
                )));
            }
            if thetas.iter().any(|t| t.to_bits() == theta.to_bits()) {
                return Err(Error::Parse(format!("theta = {theta} appears in two blocks")));
            }
            thetas.push(theta);
            column = 0;
        }
        if thetas.len() == 1 {
            xs.push(x);
        } else {
            match xs.get(column) {
                Some(expected) if expected.to_bits() == x.to_bits() => {}
                _ => {
                    return Err(Error::Parse(format!(
                        "X samples at theta = {theta} differ from the first row"
                    )))
                }
            }
        }
        column += 1;
        values.push(omega);
    }
    if thetas.is_empty() {
        return Err(Error::Parse("grid has no rows".into()));
    }
    if column != xs.len() || xs.len() < 2 {
        return Err(Error::Parse("last grid row is incomplete".into()));
    }
    check_finite("theta", &thetas)?;
    check_finite("x", &xs)?;
    check_finite("omega", &values)?;
    Ok(GridFile {
        meta,
        thetas,
        xs,
        values,
    })
}

pub fn grid_from_json(text: &str) -> Result<GridFile> {
    let doc: GridJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.values.len() != doc.thetas.len() {
        return Err(Error::Parse(format!(
            "{} value rows for {} angles",
            doc.values.len(),
            doc.thetas.len()
        )));
    }
    if let Some(row) = doc.values.iter().find(|r| r.len() != doc.xs.len()) {
        return Err(Error::Parse(format!(
            "row of length {} for {} X samples",
            row.len(),
            doc.xs.len()
        )));
    }
    Ok(GridFile {
        meta: doc.meta,
        thetas: doc.thetas,
        xs: doc.xs,
        values: doc.values.concat(),
    })
}

/// Reads either format, telling them apart by the first non-blank byte.
pub fn grid_from_str(text: &str) -> Result<GridFile> {
    if text.trim_start().starts_with('{') {
        grid_from_json(text)
    } else {
        grid_from_csv(text)
    }
}

/// One moment with, when available, the Fock-space value it should match.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub alpha: usize,
    pub beta: usize,
    pub value: Complex64,
    pub direct: Option<Complex64>,
}

impl MomentRow {
    pub fn abs_diff(&self) -> Option<f64> {
        self.direct.map(|d| (self.value - d).norm())
    }
}

pub fn moments_to_csv(cfg: &RunConfig, rows: &[MomentRow]) -> String {
    let with_direct = rows.iter().any(|r| r.direct.is_some());
    let mut out = config_line(cfg);
    if let Some(worst) = rows.iter().filter_map(MomentRow::abs_diff).reduce(f64::max) {
        out.push_str(&format!("# max_abs_diff: {}\n", fmt_num(worst)));
    }
    out.push_str("alpha,beta,re,im");
    if with_direct {
        out.push_str(",direct_re,direct_im,abs_diff");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}",
            r.alpha,
            r.beta,
            fmt_num(r.value.re),
            fmt_num(r.value.im)
        ));
        if with_direct {
            let d = r.direct.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            out.push_str(&format!(
                ",{},{},{}",
                fmt_num(d.re),
                fmt_num(d.im),
                fmt_num(r.abs_diff().unwrap_or(f64::NAN))
            ));
        }
        out.push('\n');
    }
    out
}

pub fn moments_to_json(cfg: &RunConfig, rows: &[MomentRow]) -> String {
    #[derive(Serialize)]
    struct Row {
        alpha: usize,
        beta: usize,
        re: f64,
        im: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        direct_re: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        direct_im: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        abs_diff: Option<f64>,
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        meta: &'a RunConfig,
        #[serde(skip_serializing_if = "Option::is_none")]
        max_abs_diff: Option<f64>,
        moments: Vec<Row>,
    }
    to_json(&Doc {
        meta: cfg,
        max_abs_diff: rows.iter().filter_map(MomentRow::abs_diff).reduce(f64::max),
        moments: rows
            .iter()
            .map(|r| Row {
                alpha: r.alpha,
                beta: r.beta,
                re: r.value.re,
                im: r.value.im,
                direct_re: r.direct.map(|d| d.re),
                direct_im: r.direct.map(|d| d.im),
                abs_diff: r.abs_diff(),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::StateSpec;
    use crate::tomography::grid_for_state;

    fn small_grid(layout: XLayout) -> (RunConfig, TomogramGrid) {
        let mut cfg = RunConfig {
            q: 0.7,
            state: StateSpec::coherent(Complex64::new(0.5, 0.1)),
            ..RunConfig::default()
        };
        cfg.grid.n_theta = 4;
        cfg.grid.n_x = 6;
        cfg.grid.layout = layout;
        let d = cfg.validate().unwrap();
        let grid = grid_for_state(&cfg.state, d, cfg.trunc_eps, 4, 6, layout).unwrap();
        (cfg, grid)
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_num(-1234.5), "-1.2345000000000000e3");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_grid_round_trip() {
        let (cfg, grid) = small_grid(XLayout::Gauss);
        let text = grid_to_csv(&cfg, &grid);
        assert!(text.lines().nth(1).unwrap() == "theta,x,omega");
        assert_eq!(text.lines().count(), 2 + 24);
        let back = grid_from_str(&text).unwrap();
        assert_eq!(back.meta.as_ref(), Some(&cfg));
        let g = back.into_grid(&grid.d).unwrap();
        assert_eq!(g.thetas, grid.thetas);
        assert_eq!(g.xs, grid.xs);
        assert_eq!(g.values, grid.values);
        assert_eq!(g.layout, XLayout::Gauss);
    }

    #[test]
    fn json_grid_round_trip() {
        let (cfg, grid) = small_grid(XLayout::Uniform);
        let back = grid_from_str(&grid_to_json(&cfg, &grid)).unwrap();
        let g = back.into_grid(&grid.d).unwrap();
        assert_eq!(g.values, grid.values);
        assert_eq!(g.xs, grid.xs);
    }

    #[test]
    fn q_mismatch_is_incompatible() {
        let (cfg, grid) = small_grid(XLayout::Gauss);
        let file = grid_from_csv(&grid_to_csv(&cfg, &grid)).unwrap();
        let other = DeformationParam::new(0.9).unwrap();
        assert!(matches!(file.into_grid(&other), Err(Error::IncompatibleGrid(_))));
    }

    #[test]
    fn malformed_grids_are_rejected() {
        for text in [
            "",
            "theta,x\n0,0\n",
            "theta,x,omega\n",
            "theta,x,omega\n0,0.1,1\n",
            "theta,x,omega\n0,-0.1,1\n0,0.1,1\n1,-0.1,1\n",
            "theta,x,omega\n0,-0.1,1\n0,0.1,1\n1,-0.1,1\n1,0.2,1\n",
            "theta,x,omega\n0,-0.1,1\n0,0.1,1\n1,-0.1,1\n1,0.1,1\n0,-0.1,1\n0,0.1,1\n",
            "theta,x,omega\n0,-0.1,nan\n0,0.1,1\n",
            "theta,x,omega\n0,-0.1,abc\n0,0.1,1\n",
            "# config: {\"q\": 2\n theta,x,omega\n",
            "{\"thetas\": [0], \"xs\": [0, 1], \"values\": [[1]]}",
        ] {
            assert!(grid_from_str(text).is_err(), "accepted {text:?}");
        }
    }

    #[test]
    fn headerless_file_without_meta_is_uniform() {
        let g = grid_from_csv("theta,x,omega\n0,-0.5,0.1\n0,0.5,0.1\n1,-0.5,0.2\n1,0.5,0.2\n")
            .unwrap()
            .into_grid(&DeformationParam::new(0.9).unwrap())
            .unwrap();
        assert_eq!(g.layout, XLayout::Uniform);
        assert_eq!(g.thetas, vec![0.0, 1.0]);
    }

    #[test]
    fn state_dump_skips_zero_amplitudes() {
        let d = DeformationParam::new(0.9).unwrap();
        let text = state_to_csv(&RunConfig::default(), &FockState::vacuum(d));
        let rows: Vec<&str> = text.lines().skip(2).collect();
        assert_eq!(
            rows,
            vec!["0,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0"]
        );
    }

    #[test]
    fn moment_csv_has_comparison_columns() {
        let rows = vec![MomentRow {
            alpha: 0,
            beta: 1,
            value: Complex64::new(0.5, 0.0),
            direct: Some(Complex64::new(0.5, 1e-9)),
        }];
        let text = moments_to_csv(&RunConfig::default(), &rows);
        assert!(text.contains("alpha,beta,re,im,direct_re,direct_im,abs_diff\n"));
        let worst: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("# max_abs_diff: "))
            .unwrap()
            .parse()
            .unwrap();
        assert!((worst - 1e-9).abs() < 1e-20);
    }
}
