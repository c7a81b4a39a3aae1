//! The run configuration document.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "seed": 2024,
//!   "preset": "iris",
//!   "network": { "col_gain": 30000.0 },
//!   "device": {},
//!   "encoder": {},
//!   "experiment": { "train_frac": 0.7 }
//! }
//! ```
//!
//! `network` keys override the named preset. Every section rejects unknown
//! keys.

use std::path::Path;

use memsnn::experiments::FaultSpec;
use memsnn::seed::derive_seed;
use memsnn::{EncoderConfig, Error, MemristorParams, NetworkConfig, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_preset")]
    preset: String,
    #[serde(default)]
    network: serde_json::Map<String, Value>,
    #[serde(default)]
    device: MemristorParams,
    #[serde(default)]
    encoder: EncoderConfig,
    #[serde(default)]
    experiment: ExperimentConfig,
}

fn default_seed() -> u64 {
    2024
}

fn default_preset() -> String {
    "iris".into()
}

/// Campaign settings. Fractions and dispersions are unitless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Share of each class used for training.
    pub train_frac: f64,
    /// Presentations of each pattern during pattern training.
    pub per_pattern: usize,
    /// Noisy pattern sets drawn per noise level.
    pub noise_trials: usize,
    /// Fault-campaign repeats per level.
    pub repeats: usize,
    pub stuck_fraction: f64,
    #[serde(rename = "dispersion_R")]
    pub dispersion_r: f64,
    #[serde(rename = "dispersion_Vt")]
    pub dispersion_vt: f64,
    /// Sweep levels; `--levels` takes precedence.
    pub levels: Option<Vec<f64>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train_frac: 0.7,
            per_pattern: 25,
            noise_trials: 50,
            repeats: 5,
            stuck_fraction: 0.0,
            dispersion_r: 0.0,
            dispersion_vt: 0.0,
            levels: None,
        }
    }
}

/// A validated configuration with the preset applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub network: NetworkConfig,
    pub device: MemristorParams,
    pub encoder: EncoderConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    /// Preset defaults with no file.
    pub fn from_preset(preset: &str, seed: u64) -> Result<Self> {
        let mut network = NetworkConfig::preset(preset).ok_or_else(|| Error::Config {
            field: "preset".into(),
            message: format!("unknown preset {preset:?}"),
        })?;
        network.seed = seed;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            seed,
            network,
            device: MemristorParams::default(),
            encoder: EncoderConfig::default(),
            experiment: ExperimentConfig::default(),
        })
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let json_err = |e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        };
        let raw: RawConfig = serde_json::from_str(text).map_err(json_err)?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Config {
                field: "schema_version".into(),
                message: format!("expected {SCHEMA_VERSION}, found {}", raw.schema_version),
            });
        }
        let base = Self::from_preset(&raw.preset, raw.seed)?;
        let mut merged = serde_json::to_value(&base.network).map_err(json_err)?;
        merge(&mut merged, Value::Object(raw.network));
        let mut network: NetworkConfig = serde_json::from_value(merged).map_err(json_err)?;
        network.seed = raw.seed;
        let cfg = Self {
            network,
            device: raw.device,
            encoder: raw.encoder,
            experiment: raw.experiment,
            ..base
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text, path)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.network.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.device.validate()?;
        self.encoder.validate()?;
        let e = &self.experiment;
        if !(e.train_frac > 0.0 && e.train_frac < 1.0) {
            return Err(Error::Config {
                field: "experiment.train_frac".into(),
                message: "must lie in (0, 1)".into(),
            });
        }
        if e.repeats == 0 || e.noise_trials == 0 || e.per_pattern == 0 {
            return Err(Error::Config {
                field: "experiment".into(),
                message: "repeats, noise_trials and per_pattern must be >= 1".into(),
            });
        }
        self.faults().validate()
    }

    /// Fault settings with a seed derived from the top-level seed.
    pub fn faults(&self) -> FaultSpec {
        FaultSpec {
            stuck_fraction: self.experiment.stuck_fraction,
            dispersion_r: self.experiment.dispersion_r,
            dispersion_vt: self.experiment.dispersion_vt,
            seed: derive_seed(self.seed, "faults"),
        }
    }
}

/// Overlays `patch` onto `base`, recursing into objects.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("test.json"))
    }

    #[test]
    fn minimal_document_uses_preset() {
        let c = parse(r#"{"schema_version": 1, "preset": "bcw", "seed": 9}"#).unwrap();
        assert_eq!((c.network.n, c.network.m, c.network.seed), (90, 2, 9));
    }

    #[test]
    fn network_keys_override_preset() {
        let c = parse(
            r#"{"schema_version": 1, "network": {"col_gain": 5.0, "peripherals": {"v_switch": 2.0}}}"#,
        )
        .unwrap();
        assert_eq!(c.network.col_gain, 5.0);
        assert_eq!(c.network.peripherals.v_switch, 2.0);
        assert_eq!(c.network.n, 12);
    }

    #[test]
    fn unknown_keys_and_missing_version_are_rejected() {
        assert!(parse(r#"{"seed": 1}"#).is_err());
        assert!(parse(r#"{"schema_version": 1, "extra": 0}"#).is_err());
        assert!(parse(r#"{"schema_version": 1, "network": {"gain": 1}}"#).is_err());
        assert!(parse(r#"{"schema_version": 1, "experiment": {"trials": 1}}"#).is_err());
        assert!(parse(r#"{"schema_version": 2}"#).is_err());
    }

    #[test]
    fn out_of_range_values_name_the_field() {
        let e = parse(r#"{"schema_version": 1, "experiment": {"stuck_fraction": 1.5}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("stuck_fraction"), "{e}");
        let e = parse(r#"{"schema_version": 1, "network": {"dt": 1e-5}}"#).unwrap_err();
        assert!(e.to_string().contains("network.dt"), "{e}");
    }
}
