use serde::{Deserialize, Serialize};

use crate::circuit::PeripheralParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    /// Labeled neuron receives the bias current during training.
    Supervised,
    /// No bias current; weights start randomly near the high rail.
    Unsupervised,
}

/// Topology and electrical parameters of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Input rows (pre-spikes).
    pub n: usize,
    /// Output columns (neurons).
    pub m: usize,
    /// Encoding window (s).
    #[serde(rename = "T")]
    pub window: f64,
    /// Simulation timestep (s).
    pub dt: f64,
    /// Membrane capacitance (F).
    #[serde(rename = "C_m")]
    pub c_m: f64,
    /// Membrane leak resistance (Ohm).
    #[serde(rename = "R_leak")]
    pub r_leak: f64,
    /// Resting potential (V).
    pub v_rest: f64,
    /// Firing threshold (V).
    pub v_th: f64,
    /// Supervising bias current (A).
    #[serde(rename = "I_b")]
    pub i_b: f64,
    /// Column read-out gain (unitless).
    pub col_gain: f64,
    /// Column op-amp resistors (Ohm); recorded, not used by the read-out.
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Presentation length (s); defaults to `T + 2 * refractory width`.
    pub sample_duration: Option<f64>,
    pub mode: TrainingMode,
    pub peripherals: PeripheralParams,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::iris()
    }
}

impl NetworkConfig {
    fn base(n: usize, m: usize, r0: f64, r2: f64, c_m: f64, i_b: f64, col_gain: f64) -> Self {
        Self {
            n,
            m,
            window: 1e-3,
            dt: 1e-6,
            c_m,
            r_leak: 50e3,
            v_rest: 0.0,
            v_th: 1e-3,
            i_b,
            col_gain,
            r0,
            r1: 1e3,
            r2,
            epochs: 1,
            seed: 2024,
            sample_duration: None,
            mode: TrainingMode::Supervised,
            peripherals: PeripheralParams::default(),
        }
    }

    /// IRIS: 12 GRF-expanded inputs, 3 classes.
    pub fn iris() -> Self {
        Self {
            epochs: 10,
            ..Self::base(12, 3, 95e3, 500.0, 5e-6, 35e-6, 30e3)
        }
    }

    /// Breast Cancer Wisconsin: 90 GRF-expanded inputs, 2 classes.
    pub fn bcw() -> Self {
        Self {
            epochs: 5,
            ..Self::base(90, 2, 40e3, 500.0, 7e-6, 100e-6, 60e3)
        }
    }

    /// Four 5x3 binary patterns.
    pub fn patterns_5x3() -> Self {
        Self::base(15, 4, 50e3, 1e3, 0.3e-6, 500e-6, 150.0)
    }

    /// Ten 7x3 digits; same electrical values as the 5x3 network.
    pub fn digits_7x3() -> Self {
        Self {
            n: 21,
            m: 10,
            ..Self::patterns_5x3()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "iris" => Some(Self::iris()),
            "bcw" => Some(Self::bcw()),
            "patterns-5x3" => Some(Self::patterns_5x3()),
            "digits-7x3" => Some(Self::digits_7x3()),
            _ => None,
        }
    }

    pub fn refractory_width(&self) -> f64 {
        self.peripherals.refractory_width()
    }

    pub fn sample_duration(&self) -> f64 {
        self.sample_duration
            .unwrap_or(self.window + 2.0 * self.refractory_width())
    }

    pub fn steps_per_sample(&self) -> usize {
        (self.sample_duration() / self.dt).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let err = |f: &str, m: &str| Err(Error::config(format!("network.{f}"), m));
        if self.n == 0 {
            return err("n", "must be >= 1");
        }
        if self.m == 0 {
            return err("m", "must be >= 1");
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return err("T", "must be > 0");
        }
        if !(self.dt > 0.0 && self.dt <= 1e-6 * (1.0 + 1e-9)) {
            return err("dt", "must lie in (0, 1e-6] s to resolve spike ramps");
        }
        if !(self.c_m > 0.0 && self.r_leak > 0.0) {
            return err("C_m", "C_m and R_leak must be > 0");
        }
        if !(self.v_th > self.v_rest) {
            return err("v_th", "must exceed v_rest");
        }
        if !(self.i_b >= 0.0 && self.col_gain >= 0.0) {
            return err("I_b", "I_b and col_gain must be >= 0");
        }
        self.peripherals.validate()?;
        let min_duration = self.window + self.refractory_width();
        if let Some(d) = self.sample_duration {
            if !(d > min_duration) {
                return err(
                    "sample_duration",
                    &format!("must exceed T + refractory width ({min_duration:.3e} s)"),
                );
            }
        }
        Ok(())
    }
}
