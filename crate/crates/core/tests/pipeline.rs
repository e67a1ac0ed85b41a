use std::fs;
use std::path::Path;

use fairgraph::data::{dataset_stats, SbmConfig};
use fairgraph::harness::{
    cmd_experiment, cmd_filter_report, cmd_generate, cmd_spectrum, DatasetSource, ExperimentConfig,
    FilterReport, BASELINE,
};
use fairgraph::Error;

fn sbm_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(DatasetSource::Sbm(SbmConfig {
        group_sizes: (40, 30),
        seed: 2,
        ..SbmConfig::default()
    }));
    cfg.num_splits = 2;
    cfg.train.epochs = 30;
    cfg
}

#[test]
fn spectrum_command_writes_one_row_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let summary = cmd_spectrum(&sbm_config(), dir.path()).unwrap();
    assert_eq!(summary.num_nodes, 70);
    assert!(summary.s_low_energy_fraction > 0.6);
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,abs_s_tilde,abs_y_tilde"));
    let lambdas: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(lambdas.len(), 70);
    assert!(lambdas.windows(2).all(|w| w[0] <= w[1]));
    assert!(dir.path().join("spectrum_summary.json").exists());
}

#[test]
fn filter_report_orders_bounds_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_filter_report(&sbm_config(), 0.05, dir.path()).unwrap();
    assert!(report.k >= 1);
    assert!(report.fair.rho_bound <= report.uniform.rho_bound + 1e-12);
    assert!((report.fair.l1_norm - report.uniform.l1_norm).abs() <= 1e-9);
    assert!(report.fair.rho <= report.fair.rho_bound + 1e-9);
    assert!(report.fair.rho < report.identity.rho);

    let text = fs::read_to_string(dir.path().join("filter_report.json")).unwrap();
    let back: FilterReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);

    let response = fs::read_to_string(dir.path().join("filter_response.csv")).unwrap();
    assert_eq!(response.lines().count(), 71);
    let features = fs::read_to_string(dir.path().join("filtered_features.csv")).unwrap();
    assert_eq!(features.lines().count(), 71);
}

#[test]
fn generated_files_load_back_through_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let stats = cmd_generate(&sbm_config(), dir.path()).unwrap();

    let config_path = dir.path().join("files.toml");
    fs::write(
        &config_path,
        "num_splits = 2\n\n[dataset]\nkind = \"files\"\nnodes = \"nodes.csv\"\nedges = \"edges.txt\"\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&config_path).unwrap();
    let d = cfg.load_dataset().unwrap();
    assert_eq!(dataset_stats(&d), stats);
    assert_eq!(d, sbm_config().load_dataset().unwrap());
}

#[test]
fn generate_needs_a_synthetic_source() {
    let cfg = ExperimentConfig::new(DatasetSource::Files {
        nodes: "n.csv".into(),
        edges: "e.txt".into(),
        schema: Default::default(),
        standardize: false,
        prune_isolated: false,
    });
    let err = cmd_generate(&cfg, Path::new("unused")).unwrap_err();
    assert!(matches!(err, Error::InvalidConfig(_)));
}

#[test]
fn experiment_writes_every_variant_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sbm_config();
    let result = cmd_experiment(&cfg, dir.path()).unwrap();
    assert_eq!(result.variants.len(), 1 + cfg.taus.len());
    assert_eq!(result.variants[0].variant, BASELINE);
    assert!(result.variants.iter().all(|v| v.splits.len() == 2));
    let best = result
        .variants
        .iter()
        .filter(|v| v.variant != BASELINE)
        .map(|v| v.summary.val_accuracy.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(result.selected().summary.val_accuracy.mean, best);

    let csv = fs::read_to_string(dir.path().join("experiment.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("variant,split,accuracy,delta_sp,delta_eo")
    );
    assert_eq!(lines.count(), 2 * (1 + cfg.taus.len()));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains(BASELINE));
}

#[test]
fn path_fixture_filter_report() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let cfg = ExperimentConfig::new(DatasetSource::Files {
        nodes: fixtures.join("path_nodes.csv"),
        edges: fixtures.join("path_edges.txt"),
        schema: Default::default(),
        standardize: false,
        prune_isolated: false,
    });
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_filter_report(&cfg, 0.05, dir.path()).unwrap();
    assert_eq!(report.k, 1);
    assert!((report.identity.rho - 2.0).abs() < 1e-12);
    assert!(report.fair.rho.abs() < 1e-12);
}

#[test]
fn aggregates_recompute_from_splits() {
    let result = cmd_experiment(&sbm_config(), tempfile::tempdir().unwrap().path()).unwrap();
    for v in &result.variants {
        let acc: Vec<f64> = v.splits.iter().map(|s| s.test.accuracy).collect();
        let n = acc.len() as f64;
        let mean = acc.iter().sum::<f64>() / n;
        let std = (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((v.summary.accuracy.mean - mean).abs() <= 1e-12);
        assert!((v.summary.accuracy.std - std).abs() <= 1e-12);
        let baseline = &result.baseline().splits;
        for (a, b) in v.splits.iter().zip(baseline) {
            assert_eq!((a.split_seed, a.model_seed), (b.split_seed, b.model_seed));
        }
    }
}

#[test]
fn single_split_reruns_are_byte_identical() {
    let mut cfg = sbm_config();
    cfg.num_splits = 1;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        cmd_experiment(&cfg, d.path()).unwrap();
        cmd_generate(&cfg, &d.path().join("data")).unwrap();
    }
    for name in [
        "experiment.json",
        "experiment.csv",
        "summary.txt",
        "data/nodes.csv",
        "data/edges.txt",
        "data/stats.json",
    ] {
        assert_eq!(
            fs::read(dirs[0].path().join(name)).unwrap(),
            fs::read(dirs[1].path().join(name)).unwrap(),
            "{name}"
        );
    }
}
