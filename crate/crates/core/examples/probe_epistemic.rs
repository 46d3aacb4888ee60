//! Dev probe: step-decay head training vs the width ratio.

use std::f64::consts::PI;

use vcnn_core::matrix::Matrix;
use vcnn_core::net::{train_mlp, LrSchedule, TrainConfig};
use vcnn_core::paircop::FitConfig;
use vcnn_core::vcnn::{epistemic_interval, fit_vcnn, VcnnConfig};

fn main() {
    let head_decay = TrainConfig {
        epochs: 400,
        learning_rate: 3e-3,
        batch_size: 32,
        seed: 0,
        schedule: LrSchedule::StepDecay { every: 50, factor: 0.5 },
    };
    let configs: Vec<(&str, usize, bool)> = vec![("kernel-t3", 3, false), ("param-t10", 10, true), ("param-untrunc", 50, true)];
    for (label, trunc, parametric) in configs {
        let head_train = head_decay.clone();
        let mut line = format!("{label}:");
        let mut pooled_in = 0.0;
        let mut pooled_out = 0.0;
        for seed in 0..3u64 {
            let (train, _) =
                vcnn_core::data::gen_toy_additive(280, 100, vcnn_core::data::ToyMode::C, seed)
                    .unwrap();
            let cfg = TrainConfig { epochs: 100, learning_rate: 1e-2, batch_size: 32, seed, schedule: LrSchedule::Constant };
            let (trunk, _) = train_mlp(&train.x, &train.y, &[3, 50, 50, 1], &cfg).unwrap();
            let vc = VcnnConfig {
                s: 30,
                truncation_level: trunc,
                head_train: head_train.clone(),
                fit: if parametric { FitConfig::parametric() } else { FitConfig::default() },
                seed,
                ..VcnnConfig::default()
            };
            let model = fit_vcnn(trunk, &train.x, &train.y, vc).unwrap();
            let rows: Vec<Vec<f64>> = (0..100)
                .map(|i| {
                    let x1 = -4.0 * PI + 9.0 * PI * (i as f64 + 0.5) / 100.0;
                    vec![x1, (2.0 * x1).sin(), (x1 * x1).sin()]
                })
                .collect();
            let grid = Matrix::from_rows(&rows).unwrap();
            let e = epistemic_interval(&model, &grid, 0.05).unwrap();
            let (mut win, mut wout, mut nin, mut nout) = (0.0, 0.0, 0, 0);
            for (i, row) in rows.iter().enumerate() {
                let w = e.upper[i] - e.lower[i];
                if row[0].abs() <= 2.0 * PI {
                    win += w;
                    nin += 1;
                } else {
                    wout += w;
                    nout += 1;
                }
            }
            let (wi, wo) = (win / nin as f64, wout / nout as f64);
            pooled_in += wi;
            pooled_out += wo;
            line.push_str(&format!(" s{seed}[in={wi:.2} out={wo:.2} r={:.2}]", wo / wi));
        }
        line.push_str(&format!(" pooled={:.2}", pooled_out / pooled_in));
        println!("{line}");
    }
}
