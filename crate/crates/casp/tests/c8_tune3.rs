//! Transient correlation-study tuning, round 3 (deleted before release).

use casp::config::ExperimentConfig;
use casp::runner;
use casp::stream::StreamConfig;

#[test]
#[ignore]
fn c8_fast_surrogate() {
    let spreads = vec![0.2, 0.8, 0.3, 0.7, 0.4, 0.6, 0.25, 0.75, 0.35, 0.65];
    for (d, sbatch, slr) in [
        (32usize, 10usize, 0.1),
        (32, 32, 0.1),
        (32, 64, 0.1),
        (16, 10, 0.1),
        (16, 32, 0.1),
        (32, 32, 0.2),
    ] {
        let mut cfg = ExperimentConfig::default();
        cfg.stream = StreamConfig {
            tasks: 1,
            classes_per_task: 10,
            train_per_class: 200,
            test_per_class: 200,
            feature_dim: d,
            center_radius: 3.0,
            spreads: spreads.clone(),
            seed: 0,
        };
        cfg.buffer_capacity = 100;
        cfg.casp.batch_size = sbatch;
        cfg.casp.sgd.learning_rate = slr;
        let continuation = StreamConfig {
            tasks: 5,
            classes_per_task: 2,
            train_per_class: 200,
            test_per_class: 50,
            feature_dim: d,
            center_radius: 3.0,
            spreads: vec![1.4],
            seed: 1000,
        };
        let mut positive = 0;
        let mut sum = 0.0;
        for seed in 0..20 {
            let s = runner::run_correlation_study(&cfg, &continuation, seed).unwrap();
            if s.pearson > 0.0 {
                positive += 1;
            }
            sum += s.pearson / 20.0;
        }
        println!("d={d} sbatch={sbatch} slr={slr}: positive {positive}/20, mean r = {sum:.3}");
    }
}
