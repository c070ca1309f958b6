//! Run configuration shared by the command-line tool and the file formats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DEFAULT_TRUNC_EPS;
use crate::qmath::DeformationParam;
use crate::states::StateSpec;
use crate::tomography::XLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Parse(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_theta: usize,
    pub n_x: usize,
    pub layout: XLayout,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_theta: 128,
            n_x: 128,
            layout: XLayout::Gauss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Destination file; standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub q: f64,
    pub state: StateSpec,
    pub grid: GridConfig,
    pub gamma_max: usize,
    pub output: OutputConfig,
    pub trunc_eps: f64,
    /// Gauss order for moment integrals; chosen from the degree when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integration_order: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: 0.9,
            state: StateSpec::default(),
            grid: GridConfig::default(),
            gamma_max: 6,
            output: OutputConfig::default(),
            trunc_eps: DEFAULT_TRUNC_EPS,
            integration_order: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Compact single-line JSON, used as the echo embedded in outputs.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Checks every precondition that can be checked without building the
    /// state's tail, and returns the deformation.
    pub fn validate(&self) -> Result<DeformationParam> {
        let d = DeformationParam::new(self.q)?;
        if !(self.trunc_eps > 0.0 && self.trunc_eps < 1.0) {
            return Err(Error::InvalidTolerance(self.trunc_eps));
        }
        if self.grid.n_theta < 2 || self.grid.n_x < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2x2 samples, got {}x{}",
                self.grid.n_theta, self.grid.n_x
            )));
        }
        if self.integration_order == Some(0) {
            return Err(Error::InvalidArgument("integration order must be positive".into()));
        }
        self.state.validate(&d)?;
        Ok(d)
    }
}
