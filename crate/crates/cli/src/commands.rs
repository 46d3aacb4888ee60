//! Command implementations on top of the core library.

use std::path::Path;

use serde_json::json;
use vcnn_core::data::{
    gen_bimodal, gen_moons, gen_toy_additive_with_noise, load_csv, save_csv, Dataset, Split,
    ToyMode,
};
use vcnn_core::eval::{calibration_curve, error_retention, picp_mpiw, MetricsReport};
use vcnn_core::matrix::Matrix;
use vcnn_core::net::{train_mlp, MlpModel};
use vcnn_core::vcnn::{compute_intervals, conditional_quantile_grid, fit_vcnn, VcnnConfig};

use crate::args::{DemoArgs, EvalArgs, GenerateArgs, TrainArgs, UncertaintyArgs};
use crate::config::{
    parse_f64_list, parse_family, parse_usize_list, resolve_data, resolve_trunk, resolve_vcnn,
    DataConfig, FileConfig, TrunkConfig, UncertaintyOverrides,
};
use crate::error::CliError;
use crate::output::{
    prepare_out_dir, write_curve_csv, write_json, write_loss_trace, write_quantiles_csv, Manifest,
};

fn in_thread_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match threads {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
            pool.install(f)
        }
    }
}

/// Generates the train/test split for a named dataset. Datasets without a
/// generative train/test distinction are split deterministically.
fn generate_datasets(data: &DataConfig, seed: u64) -> Result<(Dataset, Dataset), CliError> {
    let (train, test) = match data.dataset.as_str() {
        "fig2a" => gen_toy_additive_with_noise(data.n_train, data.n_test, ToyMode::A, seed, 0.2, 0.5)?,
        "fig2b" => gen_toy_additive_with_noise(data.n_train, data.n_test, ToyMode::B, seed, 0.2, 0.5)?,
        "fig2c" => gen_toy_additive_with_noise(data.n_train, data.n_test, ToyMode::C, seed, 0.2, 0.5)?,
        "bimodal" => {
            let all = gen_bimodal(data.n_train + data.n_test, seed)?;
            split_dataset(all, data.n_train)?
        }
        "moons" => {
            let train = gen_moons(data.n_train, data.noise_sd, seed)?;
            let test = gen_moons(data.n_test, data.noise_sd, seed.wrapping_add(1))?;
            (train, test)
        }
        other => return Err(CliError::config(format!("unknown dataset '{other}'"))),
    };
    Ok((train, test))
}

fn split_dataset(all: Dataset, n_train: usize) -> Result<(Dataset, Dataset), CliError> {
    let n = all.len();
    if n_train >= n {
        return Err(CliError::config(format!(
            "train size {n_train} leaves no test rows out of {n}"
        )));
    }
    let rows: Vec<Vec<f64>> = all.x.rows().map(<[f64]>::to_vec).collect();
    let train = Dataset::new(
        Matrix::from_rows(&rows[..n_train])?,
        all.y[..n_train].to_vec(),
        Split::Train,
        all.meta.clone(),
    )?;
    let test = Dataset::new(
        Matrix::from_rows(&rows[n_train..])?,
        all.y[n_train..].to_vec(),
        Split::Test,
        all.meta,
    )?;
    Ok((train, test))
}

pub fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = args.common.seed.or(file.seed).unwrap_or(0);
    let data = resolve_data(&file, args.dataset, args.n_train, args.n_test, args.noise_sd)?;
    let dir = prepare_out_dir(args.common.out.as_deref(), "generate", seed)?;

    let (train, test) = generate_datasets(&data, seed)?;
    save_csv(&train, &dir.join("train.csv"), "y")?;
    save_csv(&test, &dir.join("test.csv"), "y")?;

    let mut manifest = Manifest::new("generate", seed, json!({ "seed": seed, "data": data }));
    manifest.output("train.csv");
    manifest.output("test.csv");
    manifest.write(&dir)?;
    println!("{}", dir.display());
    Ok(())
}

pub fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = args.common.seed.or(file.seed).unwrap_or(0);
    let target = args.target.or(file.target.clone()).unwrap_or_else(|| "y".to_string());
    let hidden = match args.hidden {
        Some(h) => Some(parse_usize_list(&h, "hidden width")?),
        None => None,
    };
    let trunk_cfg = resolve_trunk(
        &file,
        None,
        hidden,
        args.epochs,
        args.learning_rate,
        args.batch_size,
    );
    let dir = prepare_out_dir(args.common.out.as_deref(), "train", seed)?;

    let dataset = load_csv(&args.train, &target)?;
    let (model, trace) = run_training(&dataset, &trunk_cfg, seed)?;
    std::fs::write(dir.join("model.json"), model.to_json()?)
        .map_err(|e| CliError::io(format!("writing model.json: {e}")))?;
    write_loss_trace(&dir.join("loss_trace.csv"), &trace)?;

    let mut manifest = Manifest::new(
        "train",
        seed,
        json!({ "seed": seed, "target": target, "train": trunk_cfg }),
    );
    manifest.input(&args.train);
    manifest.output("model.json");
    manifest.output("loss_trace.csv");
    manifest.write(&dir)?;
    println!("{}", dir.display());
    Ok(())
}

fn run_training(
    dataset: &Dataset,
    cfg: &TrunkConfig,
    seed: u64,
) -> Result<(MlpModel, Vec<f64>), CliError> {
    let mut widths = vec![dataset.feature_count()];
    widths.extend_from_slice(&cfg.hidden);
    widths.push(1);
    Ok(train_mlp(&dataset.x, &dataset.y, &widths, &cfg.train_config(seed))?)
}

fn uncertainty_overrides(args: &UncertaintyArgs) -> Result<UncertaintyOverrides, CliError> {
    let families = match &args.families {
        Some(list) => Some(
            list.split(',')
                .map(parse_family)
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let tau_grid = match &args.tau_grid {
        Some(list) => Some(parse_f64_list(list, "tau")?),
        None => None,
    };
    Ok(UncertaintyOverrides {
        s: args.s,
        alpha: args.alpha,
        truncation_level: args.truncation_level,
        families,
        kernel_bandwidth_multiplier: args.kernel_bandwidth_multiplier,
        kernel_grid_size: args.kernel_grid_size,
        bootstrap_sample_size: args.bootstrap_sample_size,
        tau_grid,
        no_pin: args.no_pin,
        head_epochs: args.head_epochs,
        head_learning_rate: args.head_learning_rate,
        head_batch_size: args.head_batch_size,
    })
}

pub fn cmd_uncertainty(args: UncertaintyArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = args.common.seed.or(file.seed).unwrap_or(0);
    let threads = args.common.threads.or(file.threads);
    let target = args.target.clone().or(file.target.clone()).unwrap_or_else(|| "y".to_string());
    let config = resolve_vcnn(&file, uncertainty_overrides(&args)?, seed)?;
    let dir = prepare_out_dir(args.common.out.as_deref(), "uncertainty", seed)?;

    let model_json = std::fs::read_to_string(&args.model)
        .map_err(|e| CliError::io(format!("reading {}: {e}", args.model.display())))?;
    let trunk = MlpModel::from_json(&model_json)?;
    let train = load_csv(&args.train, &target)?;
    let test = load_csv(&args.test, &target)?;

    let mut manifest = Manifest::new(
        "uncertainty",
        seed,
        json!({ "seed": seed, "target": target, "threads": threads, "uncertainty": config }),
    );
    manifest.input(&args.model);
    manifest.input(&args.train);
    manifest.input(&args.test);

    in_thread_pool(threads, || {
        run_uncertainty(&dir, trunk, &train, &test, config, &mut manifest)
    })?;
    manifest.write(&dir)?;
    println!("{}", dir.display());
    Ok(())
}

fn run_uncertainty(
    dir: &Path,
    trunk: MlpModel,
    train: &Dataset,
    test: &Dataset,
    config: VcnnConfig,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let tau_grid = config.tau_grid.clone();
    let model = fit_vcnn(trunk, &train.x, &train.y, config)?;
    let report = compute_intervals(&model, &test.x)?;
    report.write_csv(&dir.join("intervals.csv"))?;
    std::fs::write(dir.join("intervals.json"), report.to_json()?)
        .map_err(|e| CliError::io(format!("writing intervals.json: {e}")))?;
    manifest.output("intervals.csv");
    manifest.output("intervals.json");

    if !tau_grid.is_empty() {
        let grid = conditional_quantile_grid(&model, &test.x, &tau_grid)?;
        write_quantiles_csv(&dir.join("quantiles.csv"), &tau_grid, &grid)?;
        manifest.output("quantiles.csv");
    }
    Ok(())
}

/// Columns pulled back out of an interval report CSV.
struct IntervalColumns {
    y_hat: Vec<f64>,
    aleatoric_lower: Vec<f64>,
    aleatoric_upper: Vec<f64>,
    envelope_lower: Vec<f64>,
    envelope_upper: Vec<f64>,
}

fn read_interval_csv(path: &Path) -> Result<IntervalColumns, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let col = |name: &str| -> Result<usize, CliError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::config(format!("intervals csv lacks column '{name}'")))
    };
    let (iy, ila, iua, il, iu) = (col("y_hat")?, col("y_La")?, col("y_Ua")?, col("L")?, col("U")?);
    let mut out = IntervalColumns {
        y_hat: vec![],
        aleatoric_lower: vec![],
        aleatoric_upper: vec![],
        envelope_lower: vec![],
        envelope_upper: vec![],
    };
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::io(format!("row {}: {e}", i + 2)))?;
        let get = |idx: usize| -> Result<f64, CliError> {
            record
                .get(idx)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| CliError::config(format!("row {}: non-numeric field", i + 2)))
        };
        out.y_hat.push(get(iy)?);
        out.aleatoric_lower.push(get(ila)?);
        out.aleatoric_upper.push(get(iua)?);
        out.envelope_lower.push(get(il)?);
        out.envelope_upper.push(get(iu)?);
    }
    Ok(out)
}

fn read_quantiles_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>), CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    let taus: Vec<f64> = reader
        .headers()
        .map_err(|e| CliError::io(e.to_string()))?
        .iter()
        .map(|h| {
            h.strip_prefix("q_")
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| CliError::config(format!("bad quantile column '{h}'")))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::io(format!("row {}: {e}", i + 2)))?;
        let row: Vec<f64> = record
            .iter()
            .map(|f| {
                f.trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("row {}: non-numeric field", i + 2)))
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok((taus, rows))
}

pub fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = args.common.seed.or(file.seed).unwrap_or(0);
    let target = args.target.clone().or(file.target.clone()).unwrap_or_else(|| "y".to_string());
    let dir = prepare_out_dir(args.common.out.as_deref(), "eval", seed)?;

    let intervals = read_interval_csv(&args.intervals)?;
    let test = load_csv(&args.test, &target)?;
    if test.len() != intervals.y_hat.len() {
        return Err(CliError::config(format!(
            "test set has {} rows but intervals report {}",
            test.len(),
            intervals.y_hat.len()
        )));
    }

    let mut manifest = Manifest::new(
        "eval",
        seed,
        json!({ "seed": seed, "target": target }),
    );
    manifest.input(&args.intervals);
    manifest.input(&args.test);

    let report = evaluate_intervals(&dir, &test.y, &intervals, args.quantiles.as_deref(), &mut manifest)?;
    write_json(&dir, "metrics.json", &report)?;
    manifest.output("metrics.json");
    manifest.write(&dir)?;
    println!("{}", dir.display());
    Ok(())
}

fn evaluate_intervals(
    dir: &Path,
    y: &[f64],
    intervals: &IntervalColumns,
    quantiles: Option<&Path>,
    manifest: &mut Manifest,
) -> Result<MetricsReport, CliError> {
    let (picp, mpiw, capture) =
        picp_mpiw(y, &intervals.aleatoric_lower, &intervals.aleatoric_upper)?;
    let abs_errors: Vec<f64> =
        y.iter().zip(&intervals.y_hat).map(|(a, b)| (a - b).abs()).collect();
    let scores: Vec<f64> = intervals
        .envelope_lower
        .iter()
        .zip(&intervals.envelope_upper)
        .map(|(l, u)| u - l)
        .collect();
    let retention = error_retention(&abs_errors, &scores)?;
    write_curve_csv(
        &dir.join("retention.csv"),
        ("retained_fraction", "mean_abs_error"),
        &retention,
    )?;
    manifest.output("retention.csv");

    let calibration = match quantiles {
        Some(qpath) => {
            manifest.input(qpath);
            let (taus, rows) = read_quantiles_csv(qpath)?;
            let curve = calibration_curve(y, &rows, &taus)?;
            write_curve_csv(
                &dir.join("calibration.csv"),
                ("tau", "empirical_fraction"),
                &curve,
            )?;
            manifest.output("calibration.csv");
            curve
        }
        None => Vec::new(),
    };

    Ok(MetricsReport { picp, mpiw, capture, retention_curve: retention, calibration_curve: calibration })
}

pub fn cmd_demo(args: DemoArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = args.common.seed.or(file.seed).unwrap_or(0);
    let threads = args.common.threads.or(file.threads);
    let data = resolve_data(&file, Some(args.name.clone()), None, None, None)?;
    let trunk_cfg = resolve_trunk(&file, Some(&data.dataset), None, args.epochs, None, None);
    let families = match &args.families {
        Some(list) => Some(
            list.split(',')
                .map(parse_family)
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let config = resolve_vcnn(
        &file,
        UncertaintyOverrides {
            s: args.s,
            alpha: args.alpha,
            truncation_level: args.truncation_level,
            families,
            ..UncertaintyOverrides::default()
        },
        seed,
    )?;
    let dir = prepare_out_dir(args.common.out.as_deref(), &format!("demo-{}", data.dataset), seed)?;

    let mut manifest = Manifest::new(
        "demo",
        seed,
        json!({
            "seed": seed,
            "name": data.dataset,
            "threads": threads,
            "data": data,
            "train": trunk_cfg,
            "uncertainty": config,
        }),
    );

    in_thread_pool(threads, || {
        let (train, test) = generate_datasets(&data, seed)?;
        save_csv(&train, &dir.join("train.csv"), "y")?;
        save_csv(&test, &dir.join("test.csv"), "y")?;
        manifest.output("train.csv");
        manifest.output("test.csv");

        let (trunk, trace) = run_training(&train, &trunk_cfg, seed)?;
        std::fs::write(dir.join("model.json"), trunk.to_json()?)
            .map_err(|e| CliError::io(format!("writing model.json: {e}")))?;
        write_loss_trace(&dir.join("loss_trace.csv"), &trace)?;
        manifest.output("model.json");
        manifest.output("loss_trace.csv");

        run_uncertainty(&dir, trunk, &train, &test, config.clone(), &mut manifest)?;

        let intervals = read_interval_csv(&dir.join("intervals.csv"))?;
        let quantiles_path = dir.join("quantiles.csv");
        let qp = quantiles_path.exists().then_some(quantiles_path);
        let metrics =
            evaluate_intervals(&dir, &test.y, &intervals, qp.as_deref(), &mut manifest)?;
        write_json(&dir, "metrics.json", &metrics)?;
        manifest.output("metrics.json");
        Ok(())
    })?;

    manifest.write(&dir)?;
    println!("{}", dir.display());
    Ok(())
}
