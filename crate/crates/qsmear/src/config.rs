//! TOML run configuration for the command-line driver. Every field failure
//! is reported with its dotted path; TOML syntax errors keep the parser's
//! line/column context.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::smear::Convention;

fn default_true() -> bool {
    true
}

fn default_kind() -> String {
    "gaussian".into()
}

fn default_ref() -> f64 {
    1.0
}

fn default_factor() -> f64 {
    3.0
}

fn default_sigma_si() -> f64 {
    1e-6
}

fn default_n_ratio() -> f64 {
    3.0
}

fn default_dim() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    /// Packet family; only "gaussian" is implemented.
    #[serde(rename = "type", default = "default_kind")]
    pub kind: String,
    pub s: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionConfig {
    TracePreserving,
    RawOverlap,
}

impl From<ConventionConfig> for Convention {
    fn from(c: ConventionConfig) -> Convention {
        match c {
            ConventionConfig::TracePreserving => Convention::TracePreserving,
            ConventionConfig::RawOverlap => Convention::RawOverlap,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// Monitor accuracy; required for every channel-driven command.
    pub sigma: Option<f64>,
    #[serde(default = "default_convention")]
    pub convention: ConventionConfig,
}

fn default_convention() -> ConventionConfig {
    ConventionConfig::TracePreserving
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_true")]
    pub widths: bool,
    #[serde(default = "default_true")]
    pub purity: bool,
    #[serde(default = "default_true")]
    pub entropy: bool,
    #[serde(default = "default_true")]
    pub momentum: bool,
    #[serde(default)]
    pub classify: bool,
    #[serde(default)]
    pub classical: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            widths: true,
            purity: true,
            entropy: true,
            momentum: true,
            classify: false,
            classical: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    #[serde(default = "default_ref")]
    pub ref_x: f64,
    #[serde(default = "default_ref")]
    pub ref_p: f64,
    #[serde(default = "default_factor")]
    pub factor: f64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        RegimeConfig {
            ref_x: 1.0,
            ref_p: 1.0,
            factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub s: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    /// Cell size in meters for the SI momentum estimate.
    #[serde(default = "default_sigma_si")]
    pub sigma_si: f64,
    /// Cell-to-packet width ratio sigma / s.
    #[serde(default = "default_n_ratio")]
    pub n_ratio: f64,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        ClassicalConfig {
            sigma_si: 1e-6,
            n_ratio: 3.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmConfig {
    #[serde(default = "default_dim")]
    pub dim_s: usize,
    #[serde(default = "default_dim")]
    pub dim_a: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for PovmConfig {
    fn default() -> Self {
        PovmConfig {
            dim_s: 2,
            dim_a: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Report,
    Bin,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Format::Csv => write!(f, "csv"),
            Format::Report => write!(f, "report"),
            Format::Bin => write!(f, "bin"),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    /// Left unset, each command picks its natural format (csv for sweep,
    /// report otherwise).
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub wavefunction: WaveConfig,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub regime: RegimeConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub povm: PovmConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn field_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn require_positive(field: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(field_err(field, format!("must be positive and finite, got {value}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Field-by-field validation shared by every command.
    pub fn validate(&self) -> Result<()> {
        if self.grid.n < 2 {
            return Err(field_err("grid.n", format!("need at least 2 points, got {}", self.grid.n)));
        }
        if !(self.grid.x_min.is_finite() && self.grid.x_max.is_finite())
            || self.grid.x_min >= self.grid.x_max
        {
            return Err(field_err(
                "grid.x_min",
                format!(
                    "bounds must be finite with x_min < x_max, got [{}, {}]",
                    self.grid.x_min, self.grid.x_max
                ),
            ));
        }
        if self.wavefunction.kind != "gaussian" {
            return Err(field_err(
                "wavefunction.type",
                format!("only \"gaussian\" is implemented, got \"{}\"", self.wavefunction.kind),
            ));
        }
        require_positive("wavefunction.s", self.wavefunction.s)?;
        if !self.wavefunction.x0.is_finite() {
            return Err(field_err("wavefunction.x0", "must be finite"));
        }
        if !self.wavefunction.p0.is_finite() {
            return Err(field_err("wavefunction.p0", "must be finite"));
        }
        match self.channel.sigma {
            None => return Err(field_err("channel.sigma", "required")),
            Some(sigma) => require_positive("channel.sigma", sigma)?,
        }
        require_positive("regime.ref_x", self.regime.ref_x)?;
        require_positive("regime.ref_p", self.regime.ref_p)?;
        if !(self.regime.factor.is_finite() && self.regime.factor >= 1.0) {
            return Err(field_err(
                "regime.factor",
                format!("must be >= 1, got {}", self.regime.factor),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.s.is_empty() {
                return Err(field_err("sweep.s", "must list at least one value"));
            }
            if sweep.sigma.is_empty() {
                return Err(field_err("sweep.sigma", "must list at least one value"));
            }
            for &v in &sweep.s {
                require_positive("sweep.s", v)?;
            }
            for &v in &sweep.sigma {
                require_positive("sweep.sigma", v)?;
            }
        }
        require_positive("classical.sigma_si", self.classical.sigma_si)?;
        require_positive("classical.n_ratio", self.classical.n_ratio)?;
        for (name, dim) in [("povm.dim_s", self.povm.dim_s), ("povm.dim_a", self.povm.dim_a)] {
            if !(2..=4).contains(&dim) {
                return Err(field_err(name, format!("must be between 2 and 4, got {dim}")));
            }
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.channel.sigma.expect("validated config")
    }

    pub fn convention(&self) -> Convention {
        self.channel.convention.into()
    }

    /// The sweep table, required by the sweep command.
    pub fn sweep_required(&self) -> Result<&SweepConfig> {
        self.sweep
            .as_ref()
            .ok_or_else(|| field_err("sweep", "required for the sweep command"))
    }
}
