//! Sample presentation, in-situ training and testing.

mod config;
mod model;
mod network;

pub use config::{NetworkConfig, TrainingMode};
pub use model::{ModelFile, TaskInfo, MODEL_SCHEMA_VERSION};
pub use network::{Network, PresentationResult, StepView};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::SpikeTrain;
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, Metrics};

/// An encoded, labeled sample.
#[derive(Debug, Clone)]
pub struct EncodedSample {
    pub train: SpikeTrain,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Fraction of presentations whose winner matched the label.
    pub train_accuracy: f64,
    /// Mean over presentations of the summed |dG| (S).
    pub mean_abs_delta_g: f64,
    /// Presentations in which no neuron fired.
    pub no_spike: usize,
    pub ties: usize,
}

/// Presents every sample once per epoch with learning enabled.
pub fn train(net: &mut Network, samples: &[EncodedSample], epochs: usize) -> Result<Vec<EpochLog>> {
    let mut log = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let mut correct = 0usize;
        let mut no_spike = 0usize;
        let mut ties = 0usize;
        let mut dg_sum = 0.0;
        for s in samples {
            let r = net.present(&s.train, Some(s.label), true)?;
            match r.winner {
                Some(w) if w == s.label => correct += 1,
                Some(_) => {}
                None => no_spike += 1,
            }
            ties += usize::from(r.tie);
            dg_sum += r.delta_g.iter().map(|d| d.abs()).sum::<f64>();
        }
        let count = samples.len().max(1) as f64;
        let entry = EpochLog {
            epoch,
            train_accuracy: correct as f64 / count,
            mean_abs_delta_g: dg_sum / count,
            no_spike,
            ties,
        };
        if no_spike > 0 {
            log::warn!("epoch {epoch}: {no_spike} presentations produced no post-spike");
        }
        log::info!(
            "epoch {epoch}: train accuracy {:.4}, mean |dG| {:.3e} S",
            entry.train_accuracy,
            entry.mean_abs_delta_g
        );
        log.push(entry);
    }
    Ok(log)
}

/// Winner of each sample with learning disabled and no bias current.
/// Samples run in parallel on private copies of the network; results are
/// returned in sample order.
pub fn predict(net: &Network, trains: &[&SpikeTrain]) -> Result<Vec<PresentationResult>> {
    trains
        .par_iter()
        .map_init(
            || net.clone(),
            |local, tr| local.present(tr, None, false),
        )
        .collect()
}

/// Scores the network on labeled samples. The crossbar is not modified.
pub fn test(net: &Network, samples: &[EncodedSample]) -> Result<Metrics> {
    if samples.is_empty() {
        return Err(Error::invalid("test set is empty"));
    }
    let trains: Vec<&SpikeTrain> = samples.iter().map(|s| &s.train).collect();
    let results = predict(net, &trains)?;
    let predictions: Vec<Option<usize>> = results.iter().map(|r| r.winner).collect();
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let mut metrics = compute_metrics(&predictions, &labels, net.m())?;
    metrics.ties = results.iter().filter(|r| r.tie).count() as u64;
    if metrics.no_spike > 0 {
        log::warn!(
            "{} of {} test samples produced no post-spike",
            metrics.no_spike,
            samples.len()
        );
    }
    Ok(metrics)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub col_gain: f64,
    /// Median first-spike time at `col_gain` (s); `None` if most samples
    /// never fired.
    pub median_spike_time: Option<f64>,
    pub iterations: usize,
}

/// Median winner spike time with the given column gain, no-spike counting
/// as later than any spike.
fn median_spike_time(net: &Network, trains: &[&SpikeTrain], gain: f64) -> Result<Option<f64>> {
    let mut probe = net.clone();
    probe.crossbar.col_gain = gain;
    probe.config.col_gain = gain;
    let mut times: Vec<f64> = predict(&probe, trains)?
        .into_iter()
        .map(|r| r.spike_time.unwrap_or(f64::INFINITY))
        .collect();
    times.sort_by(f64::total_cmp);
    let med = times[times.len() / 2];
    Ok(med.is_finite().then_some(med))
}

/// Searches the column gain (log-bisection) until the median inference
/// spike time over `trains` falls in `[lo_frac * T, hi_frac * T]`.
pub fn calibrate_col_gain(
    net: &Network,
    trains: &[&SpikeTrain],
    lo_frac: f64,
    hi_frac: f64,
) -> Result<CalibrationReport> {
    if trains.is_empty() {
        return Err(Error::invalid("calibration needs at least one sample"));
    }
    let window = net.config.window;
    let (lo_t, hi_t) = (lo_frac * window, hi_frac * window);
    let (mut lo, mut hi) = (-3.0f64, 9.0f64);
    for iteration in 1..=80 {
        let gain = 10f64.powf(0.5 * (lo + hi));
        let med = median_spike_time(net, trains, gain)?;
        match med {
            Some(t) if t < lo_t => hi = gain.log10(),
            Some(t) if t <= hi_t => {
                return Ok(CalibrationReport {
                    col_gain: gain,
                    median_spike_time: Some(t),
                    iterations: iteration,
                })
            }
            _ => lo = gain.log10(),
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    Err(Error::Simulation(format!(
        "no column gain in [1e-3, 1e9] puts the median spike time in [{lo_t:.3e}, {hi_t:.3e}] s"
    )))
}
