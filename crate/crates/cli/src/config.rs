//! Config file parsing and flag merging.
//!
//! Configs are strict JSON: unknown keys are rejected so typos in experiment
//! definitions fail loudly instead of silently running defaults. Flags
//! override file values; every block has workable defaults.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sinai_core::env::EnvDistribution;
use sinai_core::plpath::BmGridSpec;
use sinai_core::walk::FunctionalSpec;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub distribution: Option<DistributionConfig>,
    pub grid: Option<BmGridSpec>,
    pub simulate: Option<SimulateBlock>,
    pub verify_formulas: Option<VerifyBlock>,
    pub extrema: Option<ExtremaBlock>,
    pub sign_changes: Option<SignChangesBlock>,
    pub persistence: Option<PersistenceBlock>,
    pub rate_function: Option<RateFunctionBlock>,
    pub localization: Option<LocalizationBlock>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {path:?}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("invalid config {path:?}: {e}")))
    }
}

/// Environment law named in a config; `epsilon0`, when given, is checked
/// against the precondition `0 < ε₀ < 1/2` and the family's own bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    TwoPoint {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon0: Option<f64>,
    },
    UniformLogOdds {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon0: Option<f64>,
    },
    DiscreteTable {
        entries: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon0: Option<f64>,
    },
    MirrorTable {
        entries: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon0: Option<f64>,
    },
    ConstantDiagnostic {
        omega: f64,
    },
}

impl Default for DistributionConfig {
    fn default() -> Self {
        DistributionConfig::TwoPoint {
            p: 0.3,
            epsilon0: None,
        }
    }
}

impl DistributionConfig {
    pub fn build(&self) -> Result<EnvDistribution, CliError> {
        let (declared, dist) = match self {
            DistributionConfig::TwoPoint { p, epsilon0 } => {
                (*epsilon0, EnvDistribution::two_point(*p))
            }
            DistributionConfig::UniformLogOdds { lambda, epsilon0 } => {
                (*epsilon0, EnvDistribution::uniform_log_odds(*lambda))
            }
            DistributionConfig::DiscreteTable { entries, epsilon0 } => {
                (*epsilon0, EnvDistribution::discrete_table(entries.clone()))
            }
            DistributionConfig::MirrorTable { entries, epsilon0 } => {
                (*epsilon0, EnvDistribution::mirror_table(entries.clone()))
            }
            DistributionConfig::ConstantDiagnostic { omega } => {
                (None, EnvDistribution::constant_diagnostic(*omega))
            }
        };
        let dist = dist.map_err(|e| CliError::Validation(format!("distribution: {e}")))?;
        if let Some(eps) = declared {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(CliError::Validation(format!(
                    "epsilon0 must lie in (0, 1/2), got {eps}"
                )));
            }
            if eps > dist.epsilon0() + 1e-12 {
                return Err(CliError::Validation(format!(
                    "declared epsilon0 {eps} exceeds the family bound {}",
                    dist.epsilon0()
                )));
            }
        }
        Ok(dist)
    }
}

fn default_grid() -> BmGridSpec {
    BmGridSpec::uniform(1e-3, -50.0, 50.0)
}

pub fn grid_or_default(grid: &Option<BmGridSpec>) -> BmGridSpec {
    grid.clone().unwrap_or_else(default_grid)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateBlock {
    pub n_steps: u64,
    pub half_width: u32,
    pub functional: Option<FunctionalSpec>,
    pub threshold: f64,
    pub targets: Vec<i64>,
    pub stream: bool,
    pub emit_env: bool,
}

impl Default for SimulateBlock {
    fn default() -> Self {
        Self {
            n_steps: 10_000,
            half_width: 64,
            functional: None,
            threshold: 0.0,
            targets: Vec::new(),
            stream: false,
            emit_env: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyBlock {
    pub n_cases: u64,
    pub trials_per_case: u64,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self {
            n_cases: 40,
            trials_per_case: 4_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSource {
    Bm,
    Potential,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtremaBlock {
    pub source: PathSource,
    pub scale: f64,
    /// Potential window half-width when the source is a potential.
    pub half_width: u32,
}

impl Default for ExtremaBlock {
    fn default() -> Self {
        Self {
            source: PathSource::Bm,
            scale: 1.0,
            half_width: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignChangesMode {
    /// Export the sweep record of a single path.
    Record,
    /// Monte Carlo mean of the normalised sign-change count.
    Rate,
    /// Monte Carlo sign-persistence probability per scale.
    Constant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignChangesBlock {
    pub mode: SignChangesMode,
    pub source: PathSource,
    pub half_width: u32,
    pub c: f64,
    pub x_max: f64,
    pub a: f64,
    pub t_values: Vec<f64>,
    pub x_values: Vec<f64>,
    pub n_samples: u64,
}

impl Default for SignChangesBlock {
    fn default() -> Self {
        Self {
            mode: SignChangesMode::Record,
            source: PathSource::Bm,
            half_width: 512,
            c: 1.0,
            x_max: 8.0,
            a: 0.5,
            t_values: vec![2.0, 4.0, 6.0],
            x_values: vec![2.0, 4.0, 8.0],
            n_samples: 1_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Shared,
    Independent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PersistenceBlock {
    pub horizons: Vec<u64>,
    pub functional: FunctionalSpec,
    pub threshold: f64,
    pub n_envs: u64,
    pub walks_per_env: u64,
    pub mode: ModeConfig,
}

impl Default for PersistenceBlock {
    fn default() -> Self {
        Self {
            horizons: vec![100, 1_000, 10_000, 100_000],
            functional: FunctionalSpec::Sign,
            threshold: 0.0,
            n_envs: 10_000,
            walks_per_env: 1,
            mode: ModeConfig::Shared,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateFunctionBlock {
    pub x_max: f64,
    pub steps: u64,
}

impl Default for RateFunctionBlock {
    fn default() -> Self {
        Self {
            x_max: 5.0,
            steps: 500,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizationBlock {
    pub n_steps: u64,
    pub n_trials: u64,
}

impl Default for LocalizationBlock {
    fn default() -> Self {
        Self {
            n_steps: 100_000,
            n_trials: 200,
        }
    }
}
