use fairgraph::data::{generate_sbm, split_nodes, SbmConfig};
use fairgraph::gcn::{self, TrainConfig};
use fairgraph::metrics;

fn separable(noise: f64, seed: u64) -> fairgraph::data::Dataset {
    generate_sbm(&SbmConfig {
        group_sizes: (50, 50),
        p_intra: 0.2,
        p_inter: 0.02,
        label_flip: 0.0,
        feature_noise: noise,
        seed,
        ..SbmConfig::default()
    })
    .unwrap()
}

#[test]
fn separable_data_is_fit_within_200_epochs() {
    let d = separable(0.1, 3);
    let masks = split_nodes(&d.label_known, (0.4, 0.3, 0.3), 3).unwrap();
    let a_hat = d.graph.normalized_adjacency().unwrap();
    let cfg = TrainConfig {
        epochs: 200,
        early_stop_patience: 200,
        ..TrainConfig::default()
    };
    let out = gcn::train(
        &a_hat,
        &d.features,
        &d.labels,
        &masks.train,
        &masks.val,
        &cfg,
    )
    .unwrap();
    assert_eq!(out.history.len(), 201);
    let best = out
        .history
        .iter()
        .map(|e| e.train_accuracy)
        .fold(0.0, f64::max);
    assert!(best >= 0.95, "best train accuracy {best}");
}

#[test]
fn noiseless_unflipped_labels_are_recovered_exactly() {
    for seed in 0..3 {
        let d = separable(0.0, seed);
        let masks = split_nodes(&d.label_known, (0.4, 0.3, 0.3), seed).unwrap();
        let a_hat = d.graph.normalized_adjacency().unwrap();
        let out = gcn::train(
            &a_hat,
            &d.features,
            &d.labels,
            &masks.train,
            &masks.val,
            &TrainConfig::default(),
        )
        .unwrap();
        let y_hat = gcn::predict(&out.model, &a_hat, &d.features).unwrap();
        assert_eq!(
            metrics::accuracy(&y_hat, &d.labels, &masks.test).unwrap(),
            1.0
        );
    }
}

#[test]
fn saved_model_predicts_identically() {
    let d = separable(0.3, 5);
    let masks = split_nodes(&d.label_known, (0.4, 0.3, 0.3), 5).unwrap();
    let a_hat = d.graph.normalized_adjacency().unwrap();
    let cfg = TrainConfig {
        epochs: 40,
        ..TrainConfig::default()
    };
    let out = gcn::train(
        &a_hat,
        &d.features,
        &d.labels,
        &masks.train,
        &masks.val,
        &cfg,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    out.model.save_json(&path).unwrap();
    let loaded = gcn::GcnModel::load_json(&path).unwrap();
    assert_eq!(loaded, out.model);
    assert_eq!(
        gcn::predict(&loaded, &a_hat, &d.features).unwrap(),
        gcn::predict(&out.model, &a_hat, &d.features).unwrap()
    );
}
