//! Transient correlation-study inspection (deleted before release).

use casp::config::ExperimentConfig;
use casp::metrics;
use casp::runner;
use casp::stream::StreamConfig;

#[test]
#[ignore]
fn inspect_three_seeds() {
    let spreads = vec![0.2, 0.8, 0.3, 0.7, 0.4, 0.6, 0.25, 0.75, 0.35, 0.65];
    let mut cfg = ExperimentConfig::default();
    cfg.stream = StreamConfig {
        tasks: 1,
        classes_per_task: 10,
        train_per_class: 200,
        test_per_class: 200,
        feature_dim: 32,
        center_radius: 3.0,
        spreads: spreads.clone(),
        seed: 0,
    };
    cfg.buffer_capacity = 100;
    cfg.casp.batch_size = 200;
    let continuation = StreamConfig {
        tasks: 5,
        classes_per_task: 2,
        train_per_class: 200,
        test_per_class: 50,
        feature_dim: 32,
        center_radius: 3.0,
        spreads: vec![1.4],
        seed: 1000,
    };
    for seed in 0..3 {
        let s = runner::run_correlation_study(&cfg, &continuation, seed).unwrap();
        println!("seed {seed}: r = {:.3}", s.pearson);
        println!("  class sigma     V  forget");
        for ((c, v), (_, f)) in s.vulnerability.iter().zip(&s.forgetting) {
            println!("  {c:5} {:5.2} {v:.4} {f:+.3}", spreads[c % spreads.len()]);
        }
        let sig: Vec<f64> = s.vulnerability.iter().map(|(c, _)| spreads[c % spreads.len()]).collect();
        let vs: Vec<f64> = s.vulnerability.iter().map(|(_, v)| *v).collect();
        let fs: Vec<f64> = s.forgetting.iter().map(|(_, f)| *f).collect();
        println!(
            "  corr(sigma,V) = {:.3}   corr(sigma,forget) = {:.3}",
            metrics::pearson(&sig, &vs).unwrap(),
            metrics::pearson(&sig, &fs).unwrap()
        );
    }
}
