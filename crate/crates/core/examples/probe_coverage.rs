//! Dev probe: PICP / Spearman across fit configurations.

use rand::Rng;
use vcnn_core::matrix::Matrix;
use vcnn_core::net::{train_mlp, LrSchedule, TrainConfig};
use vcnn_core::paircop::FitConfig;
use vcnn_core::rng::derive_rng;
use vcnn_core::vcnn::{aleatoric_interval, fit_vcnn, VcnnConfig};

fn heteroscedastic(n: usize, seed: u64, label: &str) -> (Matrix, Vec<f64>) {
    use std::f64::consts::PI;
    let mut rng = derive_rng(seed, label);
    let normal = rand_distr::StandardNormal;
    let mut rows = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = rng.random_range(-2.0 * PI..2.0 * PI);
        let x2 = x1.sin();
        let x3 = (x1 * x1).sin();
        let eps: f64 = rng.sample(normal);
        rows.push(vec![x1, x2, x3]);
        ys.push(x1 + x2 + x3 + x1 * 0.5 * eps);
    }
    (Matrix::from_rows(&rows).unwrap(), ys)
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let (mut num, mut da, mut db) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        num += (x - mean) * (y - mean);
        da += (x - mean) * (x - mean);
        db += (y - mean) * (y - mean);
    }
    num / (da * db).sqrt()
}

fn main() {
    let configs: Vec<(&str, FitConfig, usize)> = vec![
        ("kernel-0.1 t3", FitConfig::default(), 3),
        (
            "kernel-0.3 t3",
            FitConfig { kernel_bandwidth_multiplier: 0.3, ..FitConfig::default() },
            3,
        ),
        (
            "kernel-1.0 t3",
            FitConfig { kernel_bandwidth_multiplier: 1.0, ..FitConfig::default() },
            3,
        ),
        ("parametric t3", FitConfig::parametric(), 3),
        ("kernel-0.1 t1", FitConfig::default(), 1),
    ];
    for n_train in [280usize, 1000] {
        for (label, fit, trunc) in &configs {
            let mut captured = 0usize;
            let mut total = 0usize;
            let mut widths = Vec::new();
            let mut noise = Vec::new();
            for seed in 0..3u64 {
                let (x_train, y_train) = heteroscedastic(n_train, seed, "cov-train");
                let (x_test, y_test) = heteroscedastic(100, seed, "cov-test");
                let cfg = TrainConfig {
                    epochs: 100,
                    learning_rate: 1e-2,
                    batch_size: 32,
                    seed,
                    schedule: LrSchedule::Constant,
                };
                let (trunk, _) = train_mlp(&x_train, &y_train, &[3, 50, 50, 1], &cfg).unwrap();
                let vc = VcnnConfig {
                    s: 2,
                    truncation_level: *trunc,
                    fit: fit.clone(),
                    head_train: TrainConfig {
                        epochs: 1,
                        learning_rate: 1e-4,
                        batch_size: 32,
                        seed: 0,
                        schedule: LrSchedule::Constant,
                    },
                    seed,
                    ..VcnnConfig::default()
                };
                let model = fit_vcnn(trunk, &x_train, &y_train, vc).unwrap();
                let a = aleatoric_interval(&model, &x_test, 0.05).unwrap();
                for (j, &y) in y_test.iter().enumerate() {
                    total += 1;
                    if a.lower[j] <= y && y <= a.upper[j] {
                        captured += 1;
                    }
                    widths.push(a.upper[j] - a.lower[j]);
                    noise.push(x_test.row(j)[0].abs() * 0.5);
                }
            }
            println!(
                "n={n_train} {label}: PICP {:.3} spearman {:.3}",
                captured as f64 / total as f64,
                spearman(&widths, &noise)
            );
        }
    }
}
