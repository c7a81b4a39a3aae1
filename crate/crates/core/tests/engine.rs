use std::path::Path;

use memsnn::device::MemristorState;
use memsnn::encoder::SpikeShape;
use memsnn::engine::{predict, test, train, EncodedSample};
use memsnn::experiments::{
    build_network, run_classification, run_pattern_task, test_patterns, Dataset, FaultSpec,
    FeatureEncoder, PatternSet,
};
use memsnn::{EncoderConfig, MemristorParams, ModelFile, Network, NetworkConfig, SpikeTrain, TrainingMode};

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// Two rows, two columns; only the bias drives the neurons, so the
/// post-spike time is fixed by `v_th` and `I_b`.
fn probe_net(v_th: f64) -> Network {
    let cfg = NetworkConfig {
        n: 2,
        m: 2,
        col_gain: 0.0,
        v_th,
        ..NetworkConfig::iris()
    };
    let mut net = Network::new(cfg, MemristorParams::default()).unwrap();
    let p = MemristorParams::default();
    let mid = MemristorState::new(0.5 * p.d);
    for j in 0..2 {
        for i in 0..2 {
            net.crossbar.set_device(j, i, mid);
        }
    }
    net
}

fn train_of(onsets: Vec<Option<f64>>) -> SpikeTrain {
    SpikeTrain::new(onsets, SpikeShape::default(), 1e-3).unwrap()
}

fn post_time(v_th: f64) -> f64 {
    let mut net = probe_net(v_th);
    let r = net.present(&train_of(vec![None, None]), Some(0), true).unwrap();
    r.spike_time.unwrap()
}

/// Conductance change of device (0, 0) for a pre-spike at `onset`.
fn delta_g(v_th: f64, onset: f64) -> f64 {
    let mut net = probe_net(v_th);
    let r = net.present(&train_of(vec![Some(onset), None]), Some(0), true).unwrap();
    assert_eq!(r.winner, Some(0));
    r.delta_g_at(2, 0, 0)
}

#[test]
fn bias_alone_fires_at_rc_charging_time() {
    let t = post_time(1e-3);
    assert!((t - 142.86e-6).abs() / 142.86e-6 < 0.02, "{t}");
}

#[test]
fn stdp_sign_follows_spike_order() {
    let v_th = 5e-3;
    let tp = post_time(v_th);
    for k in 0..10 {
        let onset = k as f64 * 0.1e-3;
        let dg = delta_g(v_th, onset);
        if onset + 2e-6 < tp {
            assert!(dg > 0.0, "pre at {onset} before post at {tp}: dG = {dg}");
        } else if onset > tp + 2e-6 {
            assert!(dg < 0.0, "pre at {onset} after post at {tp}: dG = {dg}");
        }
    }
}

#[test]
fn stdp_magnitude_shrinks_with_spike_distance() {
    let v_th = 5e-3;
    let tp = post_time(v_th);
    let before: Vec<f64> = (1..=6)
        .map(|k| delta_g(v_th, (tp - k as f64 * 0.1e-3).max(0.0)).abs())
        .collect();
    let after: Vec<f64> = (1..=6)
        .map(|k| delta_g(v_th, (tp + k as f64 * 0.04e-3).min(1e-3)).abs())
        .collect();
    for w in before.windows(2).chain(after.windows(2)) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9), "{before:?} / {after:?}");
    }
    assert!(before[0] > 0.0 && after[0] > 0.0);
}

#[test]
fn updates_touch_only_winner_column_and_spiking_rows() {
    let v_th = 5e-3;
    let mut net = probe_net(v_th);
    let r = net.present(&train_of(vec![Some(0.2e-3), None]), Some(1), true).unwrap();
    assert_eq!(r.winner, Some(1));
    assert_ne!(r.delta_g_at(2, 1, 0), 0.0);
    assert_eq!(r.delta_g_at(2, 1, 1), 0.0);
    assert_eq!(r.delta_g_at(2, 0, 0), 0.0);
    assert_eq!(r.delta_g_at(2, 0, 1), 0.0);
}

#[test]
fn inference_leaves_weights_bit_identical() {
    let mut net = probe_net(1e-3);
    net.crossbar.col_gain = 1e6;
    net.config.col_gain = 1e6;
    let before = net.crossbar.conductances().to_vec();
    let r = net.present(&train_of(vec![Some(0.0), Some(0.3e-3)]), None, false).unwrap();
    assert!(r.winner.is_some());
    assert!(r.delta_g.iter().all(|&d| d == 0.0));
    assert_eq!(net.crossbar.conductances(), &before[..]);
}

#[test]
fn one_winner_then_refractory_silence() {
    let cfg = NetworkConfig {
        col_gain: 3e4,
        ..NetworkConfig::iris()
    };
    let mut net = Network::new(cfg.clone(), MemristorParams::default()).unwrap();
    let onsets = (0..12).map(|i| Some(i as f64 * 80e-6)).collect();
    let r = net.present(&train_of(onsets), Some(2), true).unwrap();
    assert_eq!(r.winner, Some(2));
    let width = cfg.refractory_width();
    for pair in r.post_spikes.windows(2) {
        assert!(pair[1].1 - pair[0].1 >= width - 2.0 * cfg.dt, "{:?}", r.post_spikes);
    }
}

#[test]
fn untrained_network_breaks_symmetric_ties_to_index_zero() {
    let net = Network::new(NetworkConfig::iris(), MemristorParams::default()).unwrap();
    let tr = train_of((0..12).map(|i| Some(i as f64 * 50e-6)).collect());
    let r = predict(&net, &[&tr]).unwrap();
    assert_eq!(r[0].winner, Some(0));
    assert!(r[0].tie);

    let d = Dataset::load_csv(&data("iris.csv")).unwrap();
    let fe = FeatureEncoder::fit(&d, EncoderConfig::default(), 1e-3).unwrap();
    let samples = fe.encode_dataset(&d).unwrap();
    let m = test(&net, &samples).unwrap();
    assert!((m.accuracy - 1.0 / 3.0).abs() < 1e-9, "{}", m.accuracy);
}

fn iris_samples(cfg: &NetworkConfig) -> Vec<EncodedSample> {
    let d = Dataset::load_csv(&data("iris.csv")).unwrap();
    let (tr, _) = d.stratified_split(0.7, cfg.seed).unwrap();
    FeatureEncoder::fit(&tr, EncoderConfig::default(), cfg.window)
        .unwrap()
        .encode_dataset(&tr)
        .unwrap()
}

#[test]
fn bias_forces_label_over_a_full_iris_epoch() {
    // Forcing needs the input current to stay small beside I_b.
    let cfg = NetworkConfig {
        col_gain: 1e3,
        ..NetworkConfig::iris()
    };
    let samples = iris_samples(&cfg);
    let mut net = build_network(&cfg, &MemristorParams::default(), &FaultSpec::default()).unwrap();
    for s in &samples {
        let r = net.present(&s.train, Some(s.label), true).unwrap();
        assert_eq!(r.winner, Some(s.label));
    }
}

#[test]
fn zero_epochs_leave_network_unchanged() {
    let cfg = NetworkConfig::iris();
    let samples = iris_samples(&cfg);
    let mut net = build_network(&cfg, &MemristorParams::default(), &FaultSpec::default()).unwrap();
    let before = net.crossbar.conductances().to_vec();
    assert!(train(&mut net, &samples, 0).unwrap().is_empty());
    assert_eq!(net.crossbar.conductances(), &before[..]);
}

#[test]
fn same_config_and_seed_reproduce_weights_and_metrics() {
    let d = Dataset::load_csv(&data("iris.csv")).unwrap();
    let cfg = NetworkConfig {
        epochs: 2,
        ..NetworkConfig::iris()
    };
    let dev = MemristorParams::default();
    let enc = EncoderConfig::default();
    let fault = FaultSpec {
        stuck_fraction: 0.1,
        dispersion_r: 0.05,
        ..FaultSpec::default()
    };
    let a = run_classification(&d, &cfg, &dev, &enc, 0.7, 11, &fault).unwrap();
    let b = run_classification(&d, &cfg, &dev, &enc, 0.7, 11, &fault).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.network.crossbar.conductances(), b.network.crossbar.conductances());
}

#[test]
fn test_is_idempotent() {
    let set = PatternSet::builtin_5x3();
    let enc = EncoderConfig::default();
    let t = run_pattern_task(&set, &NetworkConfig::patterns_5x3(), &MemristorParams::default(), &enc, 5).unwrap();
    let before = t.network.crossbar.conductances().to_vec();
    let m1 = test_patterns(&t.network, &set, &enc).unwrap();
    let m2 = test_patterns(&t.network, &set, &enc).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(t.network.crossbar.conductances(), &before[..]);
}

#[test]
fn model_file_round_trips_bit_exactly() {
    let d = Dataset::load_csv(&data("iris.csv")).unwrap();
    let cfg = NetworkConfig {
        epochs: 1,
        ..NetworkConfig::iris()
    };
    let dev = MemristorParams::default();
    let fault = FaultSpec {
        stuck_fraction: 0.2,
        dispersion_r: 0.1,
        dispersion_vt: 0.05,
        seed: 3,
    };
    let run = run_classification(&d, &cfg, &dev, &EncoderConfig::default(), 0.7, 1, &fault).unwrap();
    let model = ModelFile::from_network(&run.network, dev, EncoderConfig::default(), run.task(), run.log.clone());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let back = ModelFile::load(&path).unwrap();
    assert_eq!(back, model);
    let net = back.to_network().unwrap();
    assert_eq!(net.crossbar.conductances(), run.network.crossbar.conductances());
    assert_eq!(net.crossbar.devices(), run.network.crossbar.devices());
}

#[test]
fn unsupervised_init_is_seeded_and_near_high_rail() {
    let cfg = NetworkConfig {
        mode: TrainingMode::Unsupervised,
        ..NetworkConfig::iris()
    };
    let dev = MemristorParams::default();
    let a = build_network(&cfg, &dev, &FaultSpec::default()).unwrap();
    let b = build_network(&cfg, &dev, &FaultSpec::default()).unwrap();
    let c = build_network(&NetworkConfig { seed: 5, ..cfg }, &dev, &FaultSpec::default()).unwrap();
    assert_eq!(a.crossbar.devices(), b.crossbar.devices());
    assert_ne!(a.crossbar.devices(), c.crossbar.devices());
    assert!(a
        .crossbar
        .devices()
        .iter()
        .all(|s| s.w >= 0.9 * dev.w_max() && s.w <= dev.w_max()));
}

#[test]
fn stuck_devices_survive_training_unchanged() {
    let d = Dataset::load_csv(&data("iris.csv")).unwrap();
    let cfg = NetworkConfig {
        epochs: 2,
        ..NetworkConfig::iris()
    };
    let dev = MemristorParams::default();
    let fault = FaultSpec {
        stuck_fraction: 0.2,
        ..FaultSpec::default()
    };
    let fresh = build_network(&cfg, &dev, &fault).unwrap();
    let run = run_classification(&d, &cfg, &dev, &EncoderConfig::default(), 0.7, cfg.seed, &fault).unwrap();
    let stuck: Vec<usize> = (0..36).filter(|&k| fresh.crossbar.devices()[k].stuck).collect();
    assert_eq!(stuck.len(), 7);
    for k in stuck {
        assert_eq!(run.network.crossbar.devices()[k], fresh.crossbar.devices()[k]);
    }
}
