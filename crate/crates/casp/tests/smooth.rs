//! Transient surrogate-dynamics sweep (deleted before release).

use casp::config::{ExperimentConfig, SubsetCategory};
use casp::runner;
use casp::stream::StreamConfig;

fn with_surrogate(cfg: &ExperimentConfig, batch: usize, lr: f64, momentum: f64) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.casp.batch_size = batch;
    c.casp.sgd.learning_rate = lr;
    c.casp.sgd.momentum = momentum;
    c
}

#[test]
#[ignore]
fn sweep_surrogate_dynamics() {
    // C9-style: single task, 10 classes, uniform spread
    let mut base9 = ExperimentConfig::default();
    base9.stream = StreamConfig {
        tasks: 1,
        classes_per_task: 10,
        train_per_class: 200,
        test_per_class: 100,
        feature_dim: 16,
        center_radius: 3.0,
        spreads: vec![1.2],
        seed: 0,
    };
    base9.cl_sgd.epochs = 20;

    // C7-style: milder heterogeneous profile
    let mut base7 = ExperimentConfig::default();
    base7.stream.spreads = vec![0.3, 1.5, 0.5, 1.3, 0.7, 1.1, 0.4, 1.4, 0.6, 1.2];

    for (batch, lr, momentum) in [
        (10usize, 0.1, 0.9),
        (64, 0.1, 0.9),
        (200, 0.1, 0.9),
        (64, 0.03, 0.9),
        (10, 0.02, 0.0),
        (64, 0.1, 0.0),
    ] {
        let cfg9 = with_surrogate(&base9, batch, lr, momentum);
        let mut means = [0.0f64; 3];
        for seed in 0..10 {
            for (i, cat) in [
                SubsetCategory::Challenging,
                SubsetCategory::Random,
                SubsetCategory::Hard,
            ]
            .iter()
            .enumerate()
            {
                means[i] += runner::run_subset_study(&cfg9, seed, 0.1, *cat).unwrap().avg_end_acc / 10.0;
            }
        }

        let cfg7 = with_surrogate(&base7, batch, lr, momentum);
        let mut d_aea = 0.0;
        let mut d_aef = 0.0;
        let mut wins = 0;
        for seed in 0..10 {
            let (_, er) = runner::run_er(&cfg7, seed).unwrap();
            let (_, ca) = runner::run_er_casp(&cfg7, seed).unwrap();
            d_aea += (ca.avg_end_acc - er.avg_end_acc) / 10.0;
            d_aef += (ca.avg_end_forget.unwrap() - er.avg_end_forget.unwrap()) / 10.0;
            if ca.avg_end_acc > er.avg_end_acc {
                wins += 1;
            }
        }
        println!(
            "batch={batch:3} lr={lr} mom={momentum}: subset chal={:.4} rand={:.4} hard={:.4} | paired d_aea={d_aea:+.4} d_aef={d_aef:+.4} wins={wins}/10",
            means[0], means[1], means[2]
        );
    }
}
