use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;

use qtomo::config::{OutputFormat, RunConfig};
use qtomo::{DeformationParam, StateKind, XLayout};

/// Flags shared by every subcommand. Each one overrides the matching field
/// of the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML (or JSON) file with the same fields as the flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<String>,
    /// Deformation parameter, 0 < q < 1.
    #[arg(long)]
    pub q: Option<f64>,
    /// State kind: coherent, cat-even, cat-odd, tao-even, tao-odd,
    /// squeezed-vacuum, squeezed-excited, number (or vacuum).
    #[arg(long = "state", value_name = "KIND")]
    pub state: Option<StateKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    /// Squeeze magnitude.
    #[arg(long)]
    pub r: Option<f64>,
    /// Squeeze phase.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_im: Option<f64>,
    /// Number-state index.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub ntheta: Option<usize>,
    #[arg(long)]
    pub nx: Option<usize>,
    /// X sample layout: gauss or uniform.
    #[arg(long, value_parser = parse_layout)]
    pub layout: Option<XLayout>,
    #[arg(long)]
    pub gamma_max: Option<usize>,
    #[arg(long)]
    pub trunc_eps: Option<f64>,
    /// Gauss order for the moment integrals.
    #[arg(long)]
    pub integration_order: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<OutputFormat>,
}

fn parse_layout(s: &str) -> Result<XLayout, String> {
    match s.to_ascii_lowercase().as_str() {
        "gauss" => Ok(XLayout::Gauss),
        "uniform" => Ok(XLayout::Uniform),
        other => Err(format!("unknown layout `{other}` (expected gauss or uniform)")),
    }
}

impl RunArgs {
    pub fn resolve(&self) -> Result<(RunConfig, DeformationParam)> {
        let mut cfg = match &self.config {
            Some(path) => load_config(Path::new(path))?,
            None => RunConfig::default(),
        };
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if let Some(kind) = self.state {
            cfg.state.kind = kind;
        }
        if let Some(v) = self.alpha_re {
            cfg.state.alpha.re = v;
        }
        if let Some(v) = self.alpha_im {
            cfg.state.alpha.im = v;
        }
        if let Some(v) = self.r {
            cfg.state.r = v;
        }
        if let Some(v) = self.phi_s {
            cfg.state.phi_s = v;
        }
        if let Some(v) = self.xi_re {
            cfg.state.xi.re = v;
        }
        if let Some(v) = self.xi_im {
            cfg.state.xi.im = v;
        }
        if let Some(v) = self.n {
            cfg.state.n = v;
        }
        if let Some(v) = self.ntheta {
            cfg.grid.n_theta = v;
        }
        if let Some(v) = self.nx {
            cfg.grid.n_x = v;
        }
        if let Some(v) = self.layout {
            cfg.grid.layout = v;
        }
        if let Some(v) = self.gamma_max {
            cfg.gamma_max = v;
        }
        if let Some(v) = self.trunc_eps {
            cfg.trunc_eps = v;
        }
        if let Some(v) = self.integration_order {
            cfg.integration_order = Some(v);
        }
        if let Some(v) = &self.out {
            cfg.output.path = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.output.format = v;
        }
        let d = cfg.validate().context("invalid configuration")?;
        Ok((cfg, d))
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        RunConfig::from_json_str(&text)
    } else {
        RunConfig::from_toml_str(&text)
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

/// Writes `text` to the configured output, or to standard output.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output.path {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path}")),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing to standard output")
        }
    }
}
