//! Run directories, the manifest, and the small CSV emitters.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Identifier written into every manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolves and creates the run directory. A pre-existing non-empty
/// directory is refused: runs are write-once.
pub fn prepare_out_dir(
    out: Option<&Path>,
    command: &str,
    seed: u64,
) -> Result<PathBuf, CliError> {
    let dir = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let root = std::env::var("VCNN_OUT_ROOT").unwrap_or_else(|_| "runs".to_string());
            PathBuf::from(root).join(format!("{command}-seed{seed}"))
        }
    };
    if dir.exists() {
        let occupied = std::fs::read_dir(&dir)
            .map_err(|e| CliError::io(format!("inspecting {}: {e}", dir.display())))?
            .next()
            .is_some();
        if occupied {
            return Err(CliError::io(format!(
                "output directory {} already exists and is not empty",
                dir.display()
            )));
        }
    } else {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
    }
    Ok(dir)
}

/// Provenance record written alongside every run's outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub rng: String,
    pub seed: u64,
    pub config: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: Value) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            rng: vcnn_core::rng::RNG_ID.to_string(),
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::new("serde", e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text)
            .map_err(|e| CliError::io(format!("writing manifest: {e}")))?;
        Ok(())
    }
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new("serde", e.to_string()))?;
    std::fs::write(dir.join(name), text)
        .map_err(|e| CliError::io(format!("writing {name}: {e}")))
}

/// Two-column CSV for curves.
pub fn write_curve_csv(
    path: &Path,
    header: (&str, &str),
    points: &[(f64, f64)],
) -> Result<(), CliError> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| CliError::io(e.to_string()))?;
    writer
        .write_record([header.0, header.1])
        .map_err(|e| CliError::io(e.to_string()))?;
    for (a, b) in points {
        writer
            .write_record([a.to_string(), b.to_string()])
            .map_err(|e| CliError::io(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::io(e.to_string()))?;
    Ok(())
}

/// Loss trace CSV: epoch, mean squared error.
pub fn write_loss_trace(path: &Path, trace: &[f64]) -> Result<(), CliError> {
    let points: Vec<(f64, f64)> =
        trace.iter().enumerate().map(|(i, &l)| (i as f64, l)).collect();
    write_curve_csv(path, ("epoch", "train_mse"), &points)
}

/// Per-point conditional quantiles; one column per tau named `q_<tau>`.
pub fn write_quantiles_csv(
    path: &Path,
    taus: &[f64],
    rows: &[Vec<f64>],
) -> Result<(), CliError> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| CliError::io(e.to_string()))?;
    let header: Vec<String> = taus.iter().map(|t| format!("q_{t}")).collect();
    writer.write_record(&header).map_err(|e| CliError::io(e.to_string()))?;
    for row in rows {
        let record: Vec<String> = row.iter().map(f64::to_string).collect();
        writer.write_record(&record).map_err(|e| CliError::io(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::io(e.to_string()))?;
    Ok(())
}
