//! Experiment configuration: a small TOML schema with defaults, validation,
//! and a content hash that is stable under key reordering (the hash covers
//! the parsed value, not the raw bytes).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::Grid;
use crate::kernel::{make_fractional_kernel, OperatorSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    /// Output directory; overridable from the command line.
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// One of `linear`, `pucci-plus`, `pucci-minus`.
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_one")]
    pub lambda: f64,
    /// Constant coefficient of the linear kernel.
    #[serde(default = "default_one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_dim")]
    pub n: usize,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_r_grid")]
    pub r_grid: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_bank")]
    pub bank_size: usize,
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    /// Coefficient-gap size for the perturbation experiment.
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Drift slope of the discontinuous exterior datum.
    #[serde(default = "default_c1")]
    pub c1: f64,
    /// Claimed bound on the extremal operators of the initial slice.
    #[serde(default = "default_one")]
    pub c0: f64,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_kind() -> String {
    "linear".into()
}
fn default_sigma() -> f64 {
    1.0
}
fn default_one() -> f64 {
    1.0
}
fn default_dim() -> usize {
    1
}
fn default_h() -> f64 {
    1.0 / 32.0
}
fn default_r_grid() -> f64 {
    4.0
}
fn default_seed() -> u64 {
    1
}
fn default_bank() -> usize {
    40
}
fn default_sigma0() -> f64 {
    0.5
}
fn default_eta() -> f64 {
    0.05
}
fn default_c1() -> f64 {
    0.05
}
fn default_betas() -> Vec<f64> {
    vec![1.0, 0.5, 0.25, 0.125]
}
fn default_k_max() -> usize {
    5
}

impl Default for OperatorConfig {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}
impl Default for GridConfig {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}
impl Default for ParamsConfig {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.operator.sigma > 0.0 && self.operator.sigma < 2.0) {
            return Err(Error::config("operator.sigma must lie in (0, 2)"));
        }
        if self.operator.lambda < 1.0 {
            return Err(Error::config("operator.lambda must be >= 1"));
        }
        if !(self.grid.h > 0.0 && self.grid.r_grid >= 4.0) {
            return Err(Error::config("grid.h must be > 0 and grid.r_grid >= 4"));
        }
        if self.params.bank_size == 0 {
            return Err(Error::config("params.bank_size must be >= 1"));
        }
        if self.params.betas.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            return Err(Error::config("params.betas must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn make_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.h, self.grid.r_grid)
    }

    pub fn make_operator(&self) -> Result<OperatorSpec> {
        let o = &self.operator;
        match o.kind.as_str() {
            "linear" => OperatorSpec::linear(make_fractional_kernel(
                self.grid.n,
                o.sigma,
                o.scale,
                o.lambda,
            )?),
            "pucci-plus" => OperatorSpec::pucci_plus(self.grid.n, o.sigma, o.lambda),
            "pucci-minus" => OperatorSpec::pucci_minus(self.grid.n, o.sigma, o.lambda),
            other => Err(Error::config(format!("unknown operator kind `{other}`"))),
        }
    }

    /// Hash of the canonicalized (re-serialized) config; identical for any
    /// key order in the source file.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config reserialization");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
