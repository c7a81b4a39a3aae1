use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::Crossbar;
use crate::device::{MemristorParams, MemristorState};
use crate::encoder::{EncoderConfig, MinMaxScaler};
use crate::engine::{EpochLog, Network, NetworkConfig};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// How raw inputs are turned into spike trains for this model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TaskInfo {
    /// Binary images of `rows x cols` pixels.
    Pattern { rows: usize, cols: usize },
    /// Feature vectors, min-max scaled with the stored training statistics.
    Features { scaler: MinMaxScaler },
}

/// Persisted network. Floats round-trip bit-exactly through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub config: NetworkConfig,
    /// Nominal device parameters.
    pub device: MemristorParams,
    pub encoder: EncoderConfig,
    pub task: TaskInfo,
    /// Per-device parameters, `[column][row]`, including any variation.
    pub device_params: Vec<Vec<MemristorParams>>,
    /// Doped-region widths (m), `[column][row]`.
    pub w: Vec<Vec<f64>>,
    pub stuck: Vec<Vec<bool>>,
    pub training_log: Vec<EpochLog>,
}

impl ModelFile {
    pub fn from_network(
        net: &Network,
        device: MemristorParams,
        encoder: EncoderConfig,
        task: TaskInfo,
        training_log: Vec<EpochLog>,
    ) -> Self {
        let xb = &net.crossbar;
        let (n, m) = (xb.rows(), xb.cols());
        let grid = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            (0..m).map(|j| (0..n).map(|i| f(j, i)).collect()).collect()
        };
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            config: net.config.clone(),
            device,
            encoder,
            task,
            device_params: (0..m)
                .map(|j| (0..n).map(|i| *xb.device_params(j, i)).collect())
                .collect(),
            w: grid(&|j, i| xb.device(j, i).w),
            stuck: (0..m)
                .map(|j| (0..n).map(|i| xb.device(j, i).stuck).collect())
                .collect(),
            training_log,
        }
    }

    pub fn to_network(&self) -> Result<Network> {
        if self.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!(
                    "unsupported model schema {} (expected {MODEL_SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        let (n, m) = (self.config.n, self.config.m);
        let shape_ok = |lens: Vec<usize>| lens.len() == m && lens.iter().all(|&l| l == n);
        if !shape_ok(self.w.iter().map(Vec::len).collect())
            || !shape_ok(self.stuck.iter().map(Vec::len).collect())
            || !shape_ok(self.device_params.iter().map(Vec::len).collect())
        {
            return Err(Error::config("w", format!("weight matrix must be {m}x{n}")));
        }
        let mut devices = Vec::with_capacity(n * m);
        let mut params = Vec::with_capacity(n * m);
        for j in 0..m {
            for i in 0..n {
                let p = self.device_params[j][i];
                if !p.is_physical() {
                    return Err(Error::config(
                        format!("device_params[{j}][{i}]"),
                        "violates R_on < R_off or threshold signs",
                    ));
                }
                let w = self.w[j][i];
                if !(w.is_finite() && w >= 0.0 && w <= p.d) {
                    return Err(Error::config(format!("w[{j}][{i}]"), "outside [0, D]"));
                }
                devices.push(MemristorState {
                    w,
                    stuck: self.stuck[j][i],
                });
                params.push(p);
            }
        }
        let xb = Crossbar::from_parts(n, m, devices, params, self.config.col_gain)?;
        Network::with_crossbar(self.config.clone(), xb)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }
}
