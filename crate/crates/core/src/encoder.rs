//! Input preprocessing and temporal spike encoding.
//!
//! Feature vectors are min-max scaled to `[0, T]`, optionally expanded by
//! Gaussian receptive fields, and each value `x` becomes one triangular spike
//! with onset `T - x`. Binary patterns skip preprocessing: black pixels fire
//! at `t0`, white pixels a fixed lead later.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Triangular pre-synaptic pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpikeShape {
    /// Peak voltage (V). Kept below the device SET threshold.
    pub amplitude: f64,
    /// Rise time (s).
    pub rise: f64,
    /// Fall time (s).
    pub fall: f64,
}

impl Default for SpikeShape {
    fn default() -> Self {
        Self {
            amplitude: 1.1,
            rise: 1e-6,
            fall: 1e-6,
        }
    }
}

impl SpikeShape {
    pub fn validate(&self) -> Result<()> {
        if !(self.rise > 0.0 && self.fall > 0.0) {
            return Err(Error::config("encoder.spike", "rise and fall must be > 0"));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::config("encoder.spike.amplitude", "must be > 0"));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.rise + self.fall
    }

    /// Pulse voltage `dt` seconds after onset.
    #[inline]
    pub fn value_at(&self, since_onset: f64) -> f64 {
        if since_onset < 0.0 || since_onset > self.rise + self.fall {
            0.0
        } else if since_onset <= self.rise {
            self.amplitude * since_onset / self.rise
        } else {
            self.amplitude * (self.rise + self.fall - since_onset) / self.fall
        }
    }
}

/// Encoding settings shared by training and testing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub spike: SpikeShape,
    /// Receptive fields for feature inputs.
    pub grf: GrfConfig,
    /// How much later white pixels fire than black ones (s).
    pub pattern_lead: f64,
    /// Onset of black pixels (s).
    pub pattern_t0: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            spike: SpikeShape::default(),
            grf: GrfConfig::default(),
            pattern_lead: 0.5e-3,
            pattern_t0: 0.0,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        self.spike.validate()?;
        self.grf.validate()?;
        if !(self.pattern_lead >= 0.0 && self.pattern_t0 >= 0.0) {
            return Err(Error::config(
                "encoder.pattern_lead",
                "pattern_lead and pattern_t0 must be >= 0",
            ));
        }
        Ok(())
    }
}

/// Pre-synaptic spikes for one presented sample: at most one onset per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    onsets: Vec<Option<f64>>,
    pub shape: SpikeShape,
    pub window: f64,
}

impl SpikeTrain {
    pub fn new(onsets: Vec<Option<f64>>, shape: SpikeShape, window: f64) -> Result<Self> {
        for (row, t) in onsets.iter().enumerate() {
            if let Some(t) = t {
                if !(0.0..=window).contains(t) {
                    return Err(Error::invalid(format!(
                        "row {row}: onset {t} outside [0, {window}]"
                    )));
                }
            }
        }
        Ok(Self {
            onsets,
            shape,
            window,
        })
    }

    pub fn rows(&self) -> usize {
        self.onsets.len()
    }

    pub fn onset(&self, row: usize) -> Option<f64> {
        self.onsets[row]
    }

    pub fn onsets(&self) -> &[Option<f64>] {
        &self.onsets
    }

    /// `(row, onset)` pairs in row order.
    pub fn times(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.onsets
            .iter()
            .enumerate()
            .filter_map(|(r, t)| t.map(|t| (r, t)))
    }
}

/// Voltage on `row` at time `t`.
pub fn waveform_at(train: &SpikeTrain, row: usize, t: f64) -> f64 {
    match train.onsets[row] {
        Some(onset) => train.shape.value_at(t - onset),
        None => 0.0,
    }
}

/// Gaussian receptive field layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrfConfig {
    /// Receptive fields per input feature.
    pub n2: usize,
    /// Width factor: `sigma = T / (beta * (n2 - 1))`.
    pub beta: f64,
}

impl Default for GrfConfig {
    fn default() -> Self {
        Self { n2: 3, beta: 1.5 }
    }
}

impl GrfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n2 < 2 {
            return Err(Error::config("encoder.grf.n2", "must be >= 2"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("encoder.grf.beta", "must be > 0"));
        }
        Ok(())
    }

    pub fn centers(&self, window: f64) -> Vec<f64> {
        let step = window / (self.n2 - 1) as f64;
        (0..self.n2).map(|k| k as f64 * step).collect()
    }

    pub fn sigma(&self, window: f64) -> f64 {
        window / (self.beta * (self.n2 - 1) as f64)
    }
}

/// Per-feature affine map onto `[0, T]`, fitted on training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(samples: &[Vec<f64>]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::invalid("cannot fit a scaler on zero samples"))?;
        let mut mins = first.clone();
        let mut maxs = first.clone();
        for s in samples {
            if s.len() != mins.len() {
                return Err(Error::invalid("samples have differing feature counts"));
            }
            for (k, &x) in s.iter().enumerate() {
                mins[k] = mins[k].min(x);
                maxs[k] = maxs[k].max(x);
            }
        }
        for (k, (lo, hi)) in mins.iter().zip(&maxs).enumerate() {
            if lo == hi {
                log::warn!("feature {k} is constant on the training split; it will encode to T/2");
            }
        }
        Ok(Self { mins, maxs })
    }

    pub fn transform(&self, x: &[f64], window: f64) -> Result<Vec<f64>> {
        minmax_scale(x, &self.mins, &self.maxs, window)
    }
}

/// Maps each feature affinely to `[0, T]`, clamping values outside the
/// fitted range. A constant feature maps to `T/2`.
pub fn minmax_scale(x: &[f64], mins: &[f64], maxs: &[f64], window: f64) -> Result<Vec<f64>> {
    if x.len() != mins.len() || x.len() != maxs.len() {
        return Err(Error::invalid(format!(
            "feature count {} does not match scaler ({})",
            x.len(),
            mins.len()
        )));
    }
    Ok(x.iter()
        .zip(mins.iter().zip(maxs))
        .map(|(&v, (&lo, &hi))| {
            if hi > lo {
                ((v - lo) / (hi - lo) * window).clamp(0.0, window)
            } else {
                0.5 * window
            }
        })
        .collect())
}

/// Expands each scaled value into `n2` Gaussian responses, each in `[0, T]`.
///
/// Output is feature-major: responses of feature 0 first.
pub fn grf_expand(x_scaled: &[f64], cfg: &GrfConfig, window: f64) -> Vec<f64> {
    let centers = cfg.centers(window);
    let two_var = 2.0 * cfg.sigma(window).powi(2);
    x_scaled
        .iter()
        .flat_map(|&x| {
            centers
                .iter()
                .map(move |&mu| window * (-(x - mu).powi(2) / two_var).exp())
        })
        .collect()
}

/// One spike per value at onset `T - value`; larger values fire earlier.
pub fn encode_temporal(values: &[f64], shape: SpikeShape, window: f64) -> Result<SpikeTrain> {
    let onsets = values
        .iter()
        .map(|&v| {
            if (0.0..=window).contains(&v) {
                Ok(Some(window - v))
            } else {
                Err(Error::invalid(format!("value {v} outside [0, {window}]")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SpikeTrain::new(onsets, shape, window)
}

/// Binary image, row-major, `true` = black.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryPattern {
    pub rows: usize,
    pub cols: usize,
    pub bits: Vec<bool>,
}

impl BinaryPattern {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::invalid(format!(
                "pattern has {} bits, expected {rows}x{cols}",
                bits.len()
            )));
        }
        Ok(Self { rows, cols, bits })
    }

    /// Parses lines such as `["111", "101"]`.
    pub fn from_rows<S: AsRef<str>>(lines: &[S]) -> Result<Self> {
        let rows = lines.len();
        let cols = lines.first().map_or(0, |l| l.as_ref().trim().len());
        let mut bits = Vec::with_capacity(rows * cols);
        for (r, line) in lines.iter().enumerate() {
            let line = line.as_ref().trim();
            if line.len() != cols {
                return Err(Error::invalid(format!(
                    "pattern row {r} has width {}, expected {cols}",
                    line.len()
                )));
            }
            for ch in line.chars() {
                match ch {
                    '1' => bits.push(true),
                    '0' => bits.push(false),
                    other => {
                        return Err(Error::invalid(format!(
                            "pattern row {r}: unexpected character {other:?}"
                        )))
                    }
                }
            }
        }
        Self::new(rows, cols, bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn black_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Black pixels fire at `t0`, white pixels at `t0 + lead`, row-wise order.
pub fn encode_pattern(
    pattern: &BinaryPattern,
    t0: f64,
    lead: f64,
    shape: SpikeShape,
    window: f64,
) -> Result<SpikeTrain> {
    let onsets = pattern
        .bits
        .iter()
        .map(|&black| Some(if black { t0 } else { t0 + lead }))
        .collect();
    SpikeTrain::new(onsets, shape, window)
}

/// Inverts exactly `round(fraction * rows * cols)` distinct pixels.
pub fn flip_noise<R: Rng + ?Sized>(
    pattern: &BinaryPattern,
    fraction: f64,
    rng: &mut R,
) -> Result<BinaryPattern> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!(
            "noise fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let n = pattern.len();
    let flips = (fraction * n as f64).round() as usize;
    let mut out = pattern.clone();
    for k in index::sample(rng, n, flips.min(n)) {
        out.bits[k] = !out.bits[k];
    }
    Ok(out)
}
