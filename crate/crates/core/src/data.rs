//! Synthetic toy datasets and CSV ingestion.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::derive_rng;

/// Which split a dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// A feature matrix with targets and generation provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub split: Split,
    pub meta: DatasetMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator: String,
    pub seed: u64,
    /// Generator parameters, recorded for provenance.
    pub params: BTreeMap<String, f64>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>, split: Split, meta: DatasetMeta) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), got: y.len() });
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset entries must be finite".into()));
        }
        Ok(Self { x, y, split, meta })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.x.ncols()
    }
}

/// Which inputs of the additive toy process are visible as features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToyMode {
    /// x1 only.
    A,
    /// x1 and x2.
    B,
    /// all three inputs.
    C,
}

impl ToyMode {
    pub fn feature_count(self) -> usize {
        match self {
            ToyMode::A => 1,
            ToyMode::B => 2,
            ToyMode::C => 3,
        }
    }
}

/// Wiggly additive toy regression.
///
/// Train: `x1 ~ U[-2pi, 2pi]`, `x2 = sin(2 x1)`, `x3 = sin(x1^2)`,
/// `y = x1 + x2 + x3 + eps`, `eps ~ N(0, 0.2)`. Test: `x1 ~ U[-4pi, 5pi]`,
/// `x2 = sin(x1)`, `x3 = sin(x1^2)`, heteroscedastic noise `x1 * eps` with
/// `eps ~ N(0, 0.5)`. The mode hides x2/x3 from the feature matrix; hidden
/// inputs still drive the target.
pub fn gen_toy_additive(
    n_train: usize,
    n_test: usize,
    mode: ToyMode,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    gen_toy_additive_with_noise(n_train, n_test, mode, seed, 0.2, 0.5)
}

/// [`gen_toy_additive`] with explicit noise standard deviations, used to
/// check the noiseless generative identity and to build coverage fixtures.
pub fn gen_toy_additive_with_noise(
    n_train: usize,
    n_test: usize,
    mode: ToyMode,
    seed: u64,
    train_noise_sd: f64,
    test_noise_sd: f64,
) -> Result<(Dataset, Dataset)> {
    use std::f64::consts::PI;
    let mut rng = derive_rng(seed, "toy-additive");
    let normal = rand_distr::StandardNormal;

    let mut build = |n: usize,
                     lo: f64,
                     hi: f64,
                     x2_freq: f64,
                     noise_sd: f64,
                     heteroscedastic: bool,
                     split: Split|
     -> Result<Dataset> {
        let mut rows = Vec::with_capacity(n);
        let mut targets = Vec::with_capacity(n);
        for _ in 0..n {
            let x1 = rng.random_range(lo..hi);
            let x2 = (x2_freq * x1).sin();
            let x3 = (x1 * x1).sin();
            let eps: f64 = rng.sample(normal);
            let noise = if heteroscedastic { x1 * eps * noise_sd } else { eps * noise_sd };
            let y = x1 + x2 + x3 + noise;
            let row = match mode {
                ToyMode::A => vec![x1],
                ToyMode::B => vec![x1, x2],
                ToyMode::C => vec![x1, x2, x3],
            };
            rows.push(row);
            targets.push(y);
        }
        let mut params = BTreeMap::new();
        params.insert("x1_low".into(), lo);
        params.insert("x1_high".into(), hi);
        params.insert("x2_frequency".into(), x2_freq);
        params.insert("noise_sd".into(), noise_sd);
        params.insert("heteroscedastic".into(), f64::from(u8::from(heteroscedastic)));
        params.insert("features".into(), mode.feature_count() as f64);
        Dataset::new(
            Matrix::from_rows(&rows)?,
            targets,
            split,
            DatasetMeta { generator: "toy-additive".into(), seed, params },
        )
    };

    let train = build(n_train, -2.0 * PI, 2.0 * PI, 2.0, train_noise_sd, false, Split::Train)?;
    let test = build(n_test, -4.0 * PI, 5.0 * PI, 1.0, test_noise_sd, true, Split::Test)?;
    Ok((train, test))
}

/// One-dimensional bimodal regression: two sine branches offset by a fixed
/// amount, chosen with equal probability, plus Gaussian noise.
///
/// `x ~ U[-pi, pi]`, `y = 0.5 sin(2x) +/- 1.0 + N(0, 0.15)`.
pub fn gen_bimodal(n: usize, seed: u64) -> Result<Dataset> {
    use std::f64::consts::PI;
    let mut rng = derive_rng(seed, "bimodal");
    let normal = rand_distr::StandardNormal;
    let offset = 1.0;
    let noise_sd = 0.15;
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(-PI..PI);
        let branch: bool = rng.random();
        let eps: f64 = rng.sample(normal);
        let y = 0.5 * (2.0 * x).sin() + if branch { offset } else { -offset } + noise_sd * eps;
        rows.push(vec![x]);
        targets.push(y);
    }
    let mut params = BTreeMap::new();
    params.insert("offset".into(), offset);
    params.insert("noise_sd".into(), noise_sd);
    params.insert("x_low".into(), -PI);
    params.insert("x_high".into(), PI);
    Dataset::new(
        Matrix::from_rows(&rows)?,
        targets,
        Split::Train,
        DatasetMeta { generator: "bimodal".into(), seed, params },
    )
}

/// Two interleaving half-circles with Gaussian jitter; labels in {0, 1}.
pub fn gen_moons(n: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    use std::f64::consts::PI;
    if noise_sd < 0.0 {
        return Err(Error::InvalidInput(format!("noise sd must be >= 0, got {noise_sd}")));
    }
    let mut rng = derive_rng(seed, "moons");
    let normal = rand_distr::StandardNormal;
    let n_outer = n / 2;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let outer = i < n_outer;
        let t = if outer {
            PI * (i as f64 + 0.5) / n_outer as f64
        } else {
            PI * ((i - n_outer) as f64 + 0.5) / (n - n_outer) as f64
        };
        let (mut x, mut y) = if outer {
            (t.cos(), t.sin())
        } else {
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        let jx: f64 = rng.sample(normal);
        let jy: f64 = rng.sample(normal);
        x += noise_sd * jx;
        y += noise_sd * jy;
        rows.push(vec![x, y]);
        labels.push(f64::from(u8::from(!outer)));
    }
    let mut params = BTreeMap::new();
    params.insert("noise_sd".into(), noise_sd);
    Dataset::new(
        Matrix::from_rows(&rows)?,
        labels,
        Split::Train,
        DatasetMeta { generator: "moons".into(), seed, params },
    )
}

/// Writes `dataset` as headered CSV: feature columns then the target column.
pub fn save_csv(dataset: &Dataset, path: &Path, target_column: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let p = dataset.feature_count();
    let mut header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    header.push(target_column.to_string());
    writer.write_record(&header).map_err(csv_err)?;
    for (row, y) in dataset.x.rows().zip(&dataset.y) {
        let mut record: Vec<String> = row.iter().map(f64::to_string).collect();
        record.push(y.to_string());
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv { row: 0, message: e.to_string() }
}

/// Loads a rectangular numeric CSV with a header row. The named column is
/// the target; every other column becomes a feature in header order.
pub fn load_csv(path: &Path, target_column: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::InvalidInput(format!("missing target column '{target_column}'")))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // Header is row 1; data rows are reported 2-based like spreadsheets.
        let row_no = i + 2;
        let record = record.map_err(|e| Error::Csv { row: row_no, message: e.to_string() })?;
        if record.len() != header.len() {
            return Err(Error::Csv {
                row: row_no,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let mut features = Vec::with_capacity(header.len() - 1);
        for (c, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Csv {
                row: row_no,
                message: format!("column {} ('{}') is not numeric: '{field}'", c + 1, header[c]),
            })?;
            if c == target_idx {
                targets.push(value);
            } else {
                features.push(value);
            }
        }
        rows.push(features);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("csv contains no data rows".into()));
    }
    Dataset::new(
        Matrix::from_rows(&rows)?,
        targets,
        Split::Train,
        DatasetMeta { generator: "csv".into(), seed: 0, params: BTreeMap::new() },
    )
}
