//! Transient classes-per-task sweep (deleted before release).

use casp::config::ExperimentConfig;
use casp::runner;
use casp::stream::StreamConfig;

fn paired(cfg: &ExperimentConfig, seeds: u64) -> (f64, f64, f64, usize) {
    let mut er_aea = 0.0;
    let mut d_aea = 0.0;
    let mut d_aef = 0.0;
    let mut wins = 0;
    for seed in 0..seeds {
        let (_, er) = runner::run_er(cfg, seed).unwrap();
        let (_, ca) = runner::run_er_casp(cfg, seed).unwrap();
        er_aea += er.avg_end_acc / seeds as f64;
        d_aea += (ca.avg_end_acc - er.avg_end_acc) / seeds as f64;
        d_aef += (ca.avg_end_forget.unwrap() - er.avg_end_forget.unwrap()) / seeds as f64;
        if ca.avg_end_acc > er.avg_end_acc {
            wins += 1;
        }
    }
    (er_aea, d_aea, d_aef, wins)
}

#[test]
#[ignore]
fn k_sweep() {
    // graded spreads cycled over all classes
    let graded = vec![0.3, 1.4, 0.5, 1.2, 0.7, 1.0, 0.4, 1.3, 0.6, 1.1];
    for (k, n_per_class, sbatch) in [
        (5usize, 100usize, 64usize),
        (10, 100, 64),
        (10, 100, 200),
        (10, 200, 64),
        (5, 200, 64),
    ] {
        let mut cfg = ExperimentConfig::default();
        cfg.stream = StreamConfig {
            tasks: 5,
            classes_per_task: k,
            train_per_class: n_per_class,
            test_per_class: 100,
            feature_dim: 16,
            center_radius: 3.0,
            spreads: graded.clone(),
            seed: 0,
        };
        cfg.casp.batch_size = sbatch;
        let (er, da, df, wins) = paired(&cfg, 10);
        println!(
            "K={k:2} n={n_per_class:3} sbatch={sbatch:3}: er_aea={er:.4} d_aea={da:+.4} d_aef={df:+.4} wins={wins}/10"
        );
    }
}

#[test]
#[ignore]
fn k2_last_attempts() {
    for (name, spreads, radius, cl_lr) in [
        ("moderate", vec![0.3, 0.8, 0.35, 0.75, 0.4, 0.7, 0.3, 0.85, 0.45, 0.65], 2.5, 0.1),
        ("moderate-lowlr", vec![0.3, 0.8, 0.35, 0.75, 0.4, 0.7, 0.3, 0.85, 0.45, 0.65], 2.5, 0.03),
        ("bimodal-lowlr", vec![0.15, 1.1, 0.15, 1.0, 0.2, 1.2, 0.15, 0.9, 0.2, 1.05], 3.0, 0.03),
    ] {
        let mut cfg = ExperimentConfig::default();
        cfg.stream.spreads = spreads;
        cfg.stream.center_radius = radius;
        cfg.cl_sgd.learning_rate = cl_lr;
        cfg.casp.batch_size = 64;
        let (er, da, df, wins) = paired(&cfg, 10);
        println!("{name:16} er_aea={er:.4} d_aea={da:+.4} d_aef={df:+.4} wins={wins}/10");
    }
}
