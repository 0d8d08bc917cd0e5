//! Run configuration: a single TOML file with nested sections, scalar keys
//! overridable from the command line. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    /// Radius of the local disk; defaults to the equilibrium module's choice.
    #[serde(default)]
    pub delta: Option<f64>,
    pub potential: PotentialConfig,
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub szego: SzegoConfig,
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

fn default_seed() -> u64 {
    1
}

fn default_out_dir() -> String {
    "besselab-out".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// Coefficient of `x^k` at index `k`, ascending.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub alpha: f64,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
}

fn default_n_list() -> Vec<usize> {
    vec![8, 16, 32, 64]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            min: 0.25,
            max: 2.5,
            count: 10,
        }
    }
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count as f64 - 1.0))
            .collect()
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SzegoConfig {
    /// Bands as `[lo, hi]` pairs; defaults to the solved equilibrium band.
    #[serde(default)]
    pub bands: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    pub particles: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    #[serde(default)]
    pub proposal_scale: Option<f64>,
}

impl Default for McmcSection {
    fn default() -> Self {
        McmcSection {
            particles: 50,
            sweeps: 4000,
            burn_in: 800,
            proposal_scale: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Cap on the recurrence degree (and on n).
    pub max_degree: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { max_degree: 64 }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Canonical serialization used for the reproducibility hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
