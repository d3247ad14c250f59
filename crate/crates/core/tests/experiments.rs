use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use concentra::experiments::{fit_loglog, run_rate_experiment, EstimatorKind, ExperimentConfig};

fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("concentra-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn noisy_power_laws_recover_their_exponent() {
    let mut rng = ChaCha8Rng::seed_from_u64(525);
    let noise = Normal::new(0.0, 0.05).unwrap();
    for exponent in [-0.5, -0.25, -1.0] {
        for _ in 0..20 {
            let pairs: Vec<(f64, f64)> = (0..10)
                .map(|k| {
                    let n = 16.0 * 2f64.powi(k);
                    (n, 3.0 * n.powf(exponent) * (1.0 + noise.sample(&mut rng)))
                })
                .collect();
            let fit = fit_loglog(&pairs).unwrap();
            assert!((fit.slope - exponent).abs() < 0.05, "{exponent}: {}", fit.slope);
        }
    }
}

#[test]
fn coupling_rate_on_the_symmetric_double_well() {
    let mut cfg = ExperimentConfig::new("double_well_sym", EstimatorKind::Coupling);
    cfg.replicates = 3;
    cfg.sample_count = 1024;
    cfg.master_seed = 515;
    let report = run_rate_experiment(&cfg).unwrap();
    assert!(!report.partial);
    let fit = report.fit.unwrap();
    assert!((fit.slope + 0.5).abs() < 0.1, "slope {}", fit.slope);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch_dir("rerun");
    let mut cfg = ExperimentConfig::new("volcano", EstimatorKind::Coupling);
    cfg.replicates = 3;
    cfg.sample_count = 256;
    cfg.n_grid = vec![16, 32, 64, 128, 256];
    cfg.master_seed = 99;
    let mut outputs = Vec::new();
    for run in 0..2 {
        cfg.output = Some(dir.join(format!("run{run}")));
        run_rate_experiment(&cfg).unwrap();
        outputs.push(std::fs::read(dir.join(format!("run{run}.csv"))).unwrap());
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn incompatible_estimator_is_rejected_up_front() {
    let mut cfg = ExperimentConfig::new("volcano", EstimatorKind::SemiDiscrete);
    cfg.replicates = 3;
    match run_rate_experiment(&cfg) {
        Err(e) => assert!(e.is_validation(), "{e}"),
        Ok(report) => assert!(report.partial && report.cells.is_empty()),
    }
}

#[test]
fn config_files_round_trip() {
    let dir = scratch_dir("config");
    let path = dir.join("cfg.json");
    std::fs::write(
        &path,
        r#"{"problem": "normal1d", "method": "semi_discrete", "n_grid": [16, 32, 64, 128, 256], "replicates": 3}"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.p, 2);
    assert_eq!(cfg.sample_count, 2048);
    std::fs::write(&path, r#"{"problem": "normal1d", "method": "semi_discrete", "bogus": 1}"#).unwrap();
    assert!(ExperimentConfig::load(&path).is_err());
    std::fs::remove_dir_all(dir).unwrap();
}
