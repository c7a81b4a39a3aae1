use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::MemristorParams;
use crate::encoder::{
    encode_pattern, encode_temporal, flip_noise, grf_expand, EncoderConfig, MinMaxScaler,
    SpikeTrain,
};
use crate::engine::{test, train, EncodedSample, EpochLog, Network, NetworkConfig, TaskInfo};
use crate::error::{Error, Result};
use crate::experiments::dataset::Dataset;
use crate::experiments::faults::{apply_variation, inject_stuck, FaultSpec};
use crate::experiments::patterns::PatternSet;
use crate::metrics::Metrics;
use crate::seed::{derive_seed, rng_for};

/// Feature vector -> min-max scaling -> GRF expansion -> one spike per input.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEncoder {
    pub scaler: MinMaxScaler,
    pub encoder: EncoderConfig,
    pub window: f64,
}

impl FeatureEncoder {
    pub fn fit(train: &Dataset, encoder: EncoderConfig, window: f64) -> Result<Self> {
        encoder.validate()?;
        Ok(Self {
            scaler: MinMaxScaler::fit(&train.features)?,
            encoder,
            window,
        })
    }

    /// Network inputs produced per sample.
    pub fn inputs(&self) -> usize {
        self.scaler.mins.len() * self.encoder.grf.n2
    }

    pub fn encode(&self, x: &[f64]) -> Result<SpikeTrain> {
        let scaled = self.scaler.transform(x, self.window)?;
        let expanded = grf_expand(&scaled, &self.encoder.grf, self.window);
        encode_temporal(&expanded, self.encoder.spike, self.window)
    }

    pub fn encode_dataset(&self, d: &Dataset) -> Result<Vec<EncodedSample>> {
        d.features
            .iter()
            .zip(&d.labels)
            .map(|(x, &label)| {
                Ok(EncodedSample {
                    train: self.encode(x)?,
                    label,
                })
            })
            .collect()
    }
}

pub fn encode_patterns(set: &PatternSet, enc: &EncoderConfig, window: f64) -> Result<Vec<EncodedSample>> {
    set.items
        .iter()
        .map(|p| {
            Ok(EncodedSample {
                train: encode_pattern(&p.pattern, enc.pattern_t0, enc.pattern_lead, enc.spike, window)?,
                label: p.label,
            })
        })
        .collect()
}

fn check_dims(config: &NetworkConfig, n: usize, m: usize, what: &str) -> Result<()> {
    if config.n != n {
        return Err(Error::config(
            "network.n",
            format!("{what} provides {n} inputs, config has n = {}", config.n),
        ));
    }
    if m > config.m {
        return Err(Error::config(
            "network.m",
            format!("{what} has {m} classes, config has m = {}", config.m),
        ));
    }
    Ok(())
}

/// Fresh network with faults applied in the order variation, weight init,
/// stuck devices.
pub fn build_network(
    config: &NetworkConfig,
    device: &MemristorParams,
    fault: &FaultSpec,
) -> Result<Network> {
    fault.validate()?;
    let mut net = Network::new(config.clone(), *device)?;
    let mut rng = rng_for(fault.seed, "variation");
    apply_variation(&mut net.crossbar, fault.dispersion_r, fault.dispersion_vt, &mut rng)?;
    let mut rng = rng_for(config.seed, "init");
    net.init_weights(config.mode, &mut rng);
    let mut rng = rng_for(fault.seed, "stuck");
    inject_stuck(&mut net.crossbar, fault.stuck_fraction, &mut rng)?;
    Ok(net)
}

#[derive(Debug, Clone)]
pub struct TrainedPatterns {
    pub network: Network,
    pub log: Vec<EpochLog>,
    pub task: TaskInfo,
}

/// Trains on `per_pattern` presentations of every pattern, cycled
/// round-robin, as a single pass.
pub fn run_pattern_task(
    set: &PatternSet,
    config: &NetworkConfig,
    device: &MemristorParams,
    encoder: &EncoderConfig,
    per_pattern: usize,
) -> Result<TrainedPatterns> {
    let (rows, cols) = set.dims();
    check_dims(config, rows * cols, set.classes(), "pattern set")?;
    let mut net = build_network(config, device, &FaultSpec::default())?;
    let base = encode_patterns(set, encoder, config.window)?;
    let schedule: Vec<EncodedSample> = (0..per_pattern)
        .flat_map(|_| base.iter().cloned())
        .collect();
    let log = train(&mut net, &schedule, 1)?;
    Ok(TrainedPatterns {
        network: net,
        log,
        task: TaskInfo::Pattern { rows, cols },
    })
}

pub fn test_patterns(net: &Network, set: &PatternSet, encoder: &EncoderConfig) -> Result<Metrics> {
    test(net, &encode_patterns(set, encoder, net.config.window)?)
}

/// Aggregate of one sweep level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub level: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn check_levels(levels: &[f64]) -> Result<()> {
    match levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        Some(l) => Err(Error::invalid(format!("sweep level {l} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Mean test accuracy per noise level, each trial flipping a fresh
/// random subset of pixels in every pattern.
pub fn run_noise_sweep(
    net: &Network,
    set: &PatternSet,
    encoder: &EncoderConfig,
    levels: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    check_levels(levels)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    levels
        .iter()
        .enumerate()
        .map(|(li, &level)| {
            let accs = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = rng_for(seed, &format!("noise/{li}/{trial}"));
                    let noisy = PatternSet {
                        items: set
                            .items
                            .iter()
                            .map(|p| {
                                Ok(crate::experiments::patterns::LabeledPattern {
                                    label: p.label,
                                    pattern: flip_noise(&p.pattern, level, &mut rng)?,
                                })
                            })
                            .collect::<Result<_>>()?,
                    };
                    Ok(test_patterns(net, &noisy, encoder)?.accuracy)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean, std) = mean_std(&accs);
            Ok(SweepRow {
                level,
                mean,
                std,
                trials,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ClassificationRun {
    pub metrics: Metrics,
    pub network: Network,
    pub encoder: FeatureEncoder,
    pub log: Vec<EpochLog>,
}

impl ClassificationRun {
    pub fn task(&self) -> TaskInfo {
        TaskInfo::Features {
            scaler: self.encoder.scaler.clone(),
        }
    }
}

/// Split, fit the encoder on the training part, train and test.
pub fn run_classification(
    data: &Dataset,
    config: &NetworkConfig,
    device: &MemristorParams,
    encoder: &EncoderConfig,
    train_frac: f64,
    split_seed: u64,
    fault: &FaultSpec,
) -> Result<ClassificationRun> {
    let (tr, te) = data.stratified_split(train_frac, split_seed)?;
    if te.is_empty() || tr.is_empty() {
        return Err(Error::invalid("split leaves an empty train or test set"));
    }
    let fe = FeatureEncoder::fit(&tr, *encoder, config.window)?;
    check_dims(config, fe.inputs(), data.classes, "dataset")?;
    let train_set = fe.encode_dataset(&tr)?;
    let test_set = fe.encode_dataset(&te)?;
    let mut net = build_network(config, device, fault)?;
    let log = train(&mut net, &train_set, config.epochs)?;
    let metrics = test(&net, &test_set)?;
    Ok(ClassificationRun {
        metrics,
        network: net,
        encoder: fe,
        log,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub spec: FaultSpec,
    pub repeats: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub runs: Vec<Metrics>,
}

/// Repeats a faulty classification run with per-repeat fault seeds derived
/// from `spec.seed`; the data split stays fixed.
#[allow(clippy::too_many_arguments)]
pub fn run_fault_campaign(
    data: &Dataset,
    config: &NetworkConfig,
    device: &MemristorParams,
    encoder: &EncoderConfig,
    train_frac: f64,
    split_seed: u64,
    spec: &FaultSpec,
    repeats: usize,
) -> Result<CampaignSummary> {
    spec.validate()?;
    if repeats == 0 {
        return Err(Error::invalid("repeats must be >= 1"));
    }
    let runs = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let f = FaultSpec {
                seed: derive_seed(spec.seed, &format!("repeat/{r}")),
                ..*spec
            };
            run_classification(data, config, device, encoder, train_frac, split_seed, &f)
                .map(|run| run.metrics)
        })
        .collect::<Result<Vec<Metrics>>>()?;
    let accs: Vec<f64> = runs.iter().map(|m| m.accuracy).collect();
    let f1s: Vec<f64> = runs.iter().map(|m| m.f1_macro).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&accs);
    let (mean_f1, std_f1) = mean_std(&f1s);
    Ok(CampaignSummary {
        spec: *spec,
        repeats,
        mean_accuracy,
        std_accuracy,
        mean_f1,
        std_f1,
        runs,
    })
}

/// Which fault parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultAxis {
    Stuck,
    VariationR,
    VariationVt,
}

impl FaultAxis {
    pub fn spec_at(self, base: &FaultSpec, level: f64) -> FaultSpec {
        let mut s = *base;
        match self {
            FaultAxis::Stuck => s.stuck_fraction = level,
            FaultAxis::VariationR => s.dispersion_r = level,
            FaultAxis::VariationVt => s.dispersion_vt = level,
        }
        s
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_fault_sweep(
    data: &Dataset,
    config: &NetworkConfig,
    device: &MemristorParams,
    encoder: &EncoderConfig,
    train_frac: f64,
    split_seed: u64,
    base: &FaultSpec,
    axis: FaultAxis,
    levels: &[f64],
    repeats: usize,
) -> Result<Vec<SweepRow>> {
    check_levels(levels)?;
    levels
        .iter()
        .map(|&level| {
            let spec = axis.spec_at(base, level);
            let s = run_fault_campaign(
                data, config, device, encoder, train_frac, split_seed, &spec, repeats,
            )?;
            Ok(SweepRow {
                level,
                mean: s.mean_accuracy,
                std: s.std_accuracy,
                trials: repeats,
            })
        })
        .collect()
}
