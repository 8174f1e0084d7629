//! Transient correlation-study tuning (deleted before release).

use casp::config::ExperimentConfig;
use casp::runner;
use casp::stream::StreamConfig;

#[test]
#[ignore]
fn c8_spread_ranges() {
    let ranges: Vec<(&str, Vec<f64>)> = vec![
        ("0.2-0.8", vec![0.2, 0.8, 0.3, 0.7, 0.4, 0.6, 0.25, 0.75, 0.35, 0.65]),
        ("0.3-0.9", vec![0.3, 0.9, 0.4, 0.8, 0.5, 0.7, 0.35, 0.85, 0.45, 0.75]),
        ("0.4-1.0", vec![0.4, 1.0, 0.5, 0.9, 0.6, 0.8, 0.45, 0.95, 0.55, 0.85]),
    ];
    for (name, spreads) in &ranges {
        for buffer in [100usize, 200] {
            let mut cfg = ExperimentConfig::default();
            cfg.stream = StreamConfig {
                tasks: 1,
                classes_per_task: 10,
                train_per_class: 200,
                test_per_class: 100,
                feature_dim: 16,
                center_radius: 3.0,
                spreads: spreads.clone(),
                seed: 0,
            };
            cfg.buffer_capacity = buffer;
            cfg.casp.batch_size = 200;
            let continuation = StreamConfig {
                tasks: 5,
                classes_per_task: 2,
                train_per_class: 200,
                test_per_class: 100,
                feature_dim: 16,
                center_radius: 3.0,
                spreads: vec![1.0],
                seed: 1000,
            };
            let mut positive = 0;
            let mut sum = 0.0;
            for seed in 0..20 {
                let study = runner::run_correlation_study(&cfg, &continuation, seed).unwrap();
                if study.pearson > 0.0 {
                    positive += 1;
                }
                sum += study.pearson / 20.0;
            }
            println!("{name} buffer={buffer}: positive {positive}/20, mean r = {sum:.3}");
        }
    }
}

#[test]
#[ignore]
fn c7_final_combo() {
    let trivheavy = vec![0.2, 1.4, 0.25, 1.2, 0.3, 1.0, 0.2, 1.3, 0.25, 1.1];
    for (name, radius, slr) in [
        ("trivheavy-lr.15", 3.0, 0.15),
        ("trivheavy-r2.6-lr.1", 2.6, 0.1),
        ("trivheavy-r2.6-lr.15", 2.6, 0.15),
    ] {
        let mut cfg = ExperimentConfig::default();
        cfg.stream = StreamConfig {
            tasks: 5,
            classes_per_task: 10,
            train_per_class: 100,
            test_per_class: 200,
            feature_dim: 16,
            center_radius: radius,
            spreads: trivheavy.clone(),
            seed: 0,
        };
        cfg.casp.batch_size = 200;
        cfg.casp.sgd.learning_rate = slr;
        let mut er_aea = 0.0;
        let mut d_aea = 0.0;
        let mut d_aef = 0.0;
        let mut wins = 0;
        for seed in 0..20 {
            let (_, er) = runner::run_er(&cfg, seed).unwrap();
            let (_, ca) = runner::run_er_casp(&cfg, seed).unwrap();
            er_aea += er.avg_end_acc / 20.0;
            d_aea += (ca.avg_end_acc - er.avg_end_acc) / 20.0;
            d_aef += (ca.avg_end_forget.unwrap() - er.avg_end_forget.unwrap()) / 20.0;
            if ca.avg_end_acc > er.avg_end_acc {
                wins += 1;
            }
        }
        println!("{name:22} er={er_aea:.4} d_aea={d_aea:+.4} d_aef={d_aef:+.4} wins={wins}/20");
    }
}
