//! Config resolution: defaults, then the JSON config file, then explicit
//! flags, in increasing priority. The fully resolved config is echoed into
//! every run's manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vcnn_core::net::{LrSchedule, TrainConfig};
use vcnn_core::paircop::{Family, FitConfig, Selection};
use vcnn_core::vcnn::VcnnConfig;

use crate::error::CliError;

/// File-level schema. Every field is optional; absent values fall back to
/// the built-in defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub target: Option<String>,
    pub data: Option<DataSection>,
    pub train: Option<TrainSection>,
    pub uncertainty: Option<UncertaintySection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub dataset: Option<String>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub noise_sd: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub hidden: Option<Vec<usize>>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySection {
    pub s: Option<usize>,
    pub alpha: Option<f64>,
    pub bootstrap_sample_size: Option<usize>,
    pub truncation_level: Option<usize>,
    pub pin_target_leaf: Option<bool>,
    pub tau_grid: Option<Vec<f64>>,
    pub families: Option<Vec<String>>,
    pub kernel_bandwidth_multiplier: Option<f64>,
    pub kernel_grid_size: Option<usize>,
    pub head_epochs: Option<usize>,
    pub head_learning_rate: Option<f64>,
    pub head_batch_size: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::io(format!("reading config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::config(format!("config {}: {e}", p.display())))
            }
        }
    }
}

/// Fully resolved generation settings.
#[derive(Debug, Clone, Serialize)]
pub struct DataConfig {
    pub dataset: String,
    pub n_train: usize,
    pub n_test: usize,
    pub noise_sd: f64,
}

/// Fully resolved trunk training settings.
#[derive(Debug, Clone, Serialize)]
pub struct TrunkConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl TrunkConfig {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            seed, schedule: LrSchedule::Constant }
    }
}

pub const DEMO_NAMES: [&str; 5] = ["fig2a", "fig2b", "fig2c", "bimodal", "moons"];

pub fn parse_dataset_name(name: &str) -> Result<String, CliError> {
    if DEMO_NAMES.contains(&name) {
        Ok(name.to_string())
    } else {
        Err(CliError::config(format!(
            "unknown dataset '{name}'; expected one of {}",
            DEMO_NAMES.join(", ")
        )))
    }
}

pub fn parse_family(name: &str) -> Result<Family, CliError> {
    match name.trim() {
        "independence" => Ok(Family::Independence),
        "gaussian" => Ok(Family::Gaussian),
        "clayton" => Ok(Family::Clayton),
        "gumbel" => Ok(Family::Gumbel),
        "frank" => Ok(Family::Frank),
        "kernel" => Ok(Family::Kernel),
        other => Err(CliError::config(format!("unknown copula family '{other}'"))),
    }
}

pub fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::config(format!("invalid {what} entry '{t}'")))
        })
        .collect()
}

pub fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::config(format!("invalid {what} entry '{t}'")))
        })
        .collect()
}

/// Builds the data config from flags > file > defaults.
pub fn resolve_data(
    file: &FileConfig,
    dataset: Option<String>,
    n_train: Option<usize>,
    n_test: Option<usize>,
    noise_sd: Option<f64>,
) -> Result<DataConfig, CliError> {
    let section = file.data.clone().unwrap_or_default();
    let dataset = parse_dataset_name(
        &dataset.or(section.dataset).unwrap_or_else(|| "fig2c".to_string()),
    )?;
    let (def_train, def_test) = match dataset.as_str() {
        "fig2a" | "fig2b" | "fig2c" => (280, 100),
        "bimodal" => (600, 200),
        "moons" => (400, 200),
        _ => unreachable!("validated above"),
    };
    Ok(DataConfig {
        dataset,
        n_train: n_train.or(section.n_train).unwrap_or(def_train),
        n_test: n_test.or(section.n_test).unwrap_or(def_test),
        noise_sd: noise_sd.or(section.noise_sd).unwrap_or(0.1),
    })
}

/// Builds the trunk config from flags > file > per-dataset defaults.
pub fn resolve_trunk(
    file: &FileConfig,
    dataset: Option<&str>,
    hidden: Option<Vec<usize>>,
    epochs: Option<usize>,
    learning_rate: Option<f64>,
    batch_size: Option<usize>,
) -> TrunkConfig {
    let section = file.train.clone().unwrap_or_default();
    let default_hidden = match dataset {
        Some("fig2a" | "fig2b" | "fig2c") => vec![50, 50],
        Some("bimodal" | "moons") => vec![16, 16],
        _ => vec![50, 50],
    };
    TrunkConfig {
        hidden: hidden.or(section.hidden).unwrap_or(default_hidden),
        epochs: epochs.or(section.epochs).unwrap_or(100),
        learning_rate: learning_rate.or(section.learning_rate).unwrap_or(1e-2),
        batch_size: batch_size.or(section.batch_size).unwrap_or(32),
    }
}

/// Flag-level overrides for the uncertainty section.
#[derive(Debug, Default)]
pub struct UncertaintyOverrides {
    pub s: Option<usize>,
    pub alpha: Option<f64>,
    pub truncation_level: Option<usize>,
    pub families: Option<Vec<Family>>,
    pub kernel_bandwidth_multiplier: Option<f64>,
    pub kernel_grid_size: Option<usize>,
    pub bootstrap_sample_size: Option<usize>,
    pub tau_grid: Option<Vec<f64>>,
    pub no_pin: bool,
    pub head_epochs: Option<usize>,
    pub head_learning_rate: Option<f64>,
    pub head_batch_size: Option<usize>,
}

/// Builds the core uncertainty config from flags > file > defaults.
pub fn resolve_vcnn(
    file: &FileConfig,
    overrides: UncertaintyOverrides,
    seed: u64,
) -> Result<VcnnConfig, CliError> {
    let section = file.uncertainty.clone().unwrap_or_default();
    let defaults = VcnnConfig::default();
    let families = match (overrides.families, section.families) {
        (Some(f), _) => f,
        (None, Some(names)) => names
            .iter()
            .map(|n| parse_family(n))
            .collect::<Result<Vec<_>, _>>()?,
        (None, None) => defaults.fit.family_set.clone(),
    };
    let config = VcnnConfig {
        s: overrides.s.or(section.s).unwrap_or(defaults.s),
        alpha: overrides.alpha.or(section.alpha).unwrap_or(defaults.alpha),
        bootstrap_sample_size: overrides
            .bootstrap_sample_size
            .or(section.bootstrap_sample_size),
        tau_grid: overrides
            .tau_grid
            .or(section.tau_grid)
            .unwrap_or_else(|| defaults.tau_grid.clone()),
        truncation_level: overrides
            .truncation_level
            .or(section.truncation_level)
            .unwrap_or(defaults.truncation_level),
        pin_target_leaf: if overrides.no_pin {
            false
        } else {
            section.pin_target_leaf.unwrap_or(true)
        },
        fit: FitConfig {
            family_set: families,
            selection: Selection::Aic,
            kernel_bandwidth_multiplier: overrides
                .kernel_bandwidth_multiplier
                .or(section.kernel_bandwidth_multiplier)
                .unwrap_or(defaults.fit.kernel_bandwidth_multiplier),
            kernel_grid_size: overrides
                .kernel_grid_size
                .or(section.kernel_grid_size)
                .unwrap_or(defaults.fit.kernel_grid_size),
        },
        head_train: TrainConfig {
            epochs: overrides
                .head_epochs
                .or(section.head_epochs)
                .unwrap_or(defaults.head_train.epochs),
            learning_rate: overrides
                .head_learning_rate
                .or(section.head_learning_rate)
                .unwrap_or(defaults.head_train.learning_rate),
            batch_size: overrides
                .head_batch_size
                .or(section.head_batch_size)
                .unwrap_or(defaults.head_train.batch_size),
            seed: 0, schedule: LrSchedule::Constant },
        seed,
    };
    config.validate().map_err(CliError::from)?;
    Ok(config)
}
