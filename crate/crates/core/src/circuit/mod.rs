//! Behavioral models of the crossbar and its peripheral blocks.

mod crossbar;
mod latch;
mod lif;

pub use crossbar::{crossbar_apply_update, crossbar_currents, Crossbar, RowSource};
pub use latch::{dcc_output, dcc_step, scc_output, lic_step, scc_step, ucc_output, RcLatch, RcParams, UccParams};
pub use lif::{lif_step, LifState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Component values for the control blocks around the crossbar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeripheralParams {
    /// Lateral inhibition: `v_l`, `R_inh`, `C_inh`.
    pub lic: RcParams,
    /// Synapse control per column: `v_e`, `R_e`, `C_e`.
    pub scc: RcParams,
    /// Dual-switch control per row: `v_w`, `R_w`, `C_w`.
    pub dcc: RcParams,
    /// Update control per row: `v_u`, `R_u`, `C_u`.
    pub ucc: RcParams,
    pub ucc_rails: UccParams,
    /// Switching voltage of the logic gates (V).
    pub v_switch: f64,
    /// Post-spike output level of a firing neuron (V).
    pub v_post_spike: f64,
}

impl Default for PeripheralParams {
    fn default() -> Self {
        let rc = |c, thr| RcParams {
            v_src: 5.0,
            r: 1e3,
            c,
            switch_threshold: thr,
        };
        Self {
            lic: rc(1.5e-6, 0.4),
            scc: rc(1.7e-6, 0.4),
            dcc: rc(1.5e-6, 1.1),
            ucc: rc(1.5e-6, 1.1),
            ucc_rails: UccParams::default(),
            v_switch: 2.5,
            v_post_spike: 1.0,
        }
    }
}

impl PeripheralParams {
    pub fn validate(&self) -> Result<()> {
        for (name, rc) in [
            ("lic", &self.lic),
            ("scc", &self.scc),
            ("dcc", &self.dcc),
            ("ucc", &self.ucc),
        ] {
            if !(rc.r > 0.0 && rc.c > 0.0) {
                return Err(Error::config(
                    format!("network.peripherals.{name}"),
                    "r and c must be > 0",
                ));
            }
            if !(rc.v_src > self.v_switch && self.v_switch > 0.0) {
                return Err(Error::config(
                    format!("network.peripherals.{name}.v_src"),
                    "supply must exceed the gate switching voltage",
                ));
            }
        }
        if self.ucc_rails.v_plus <= 0.0 || self.ucc_rails.v_minus >= 0.0 {
            return Err(Error::config(
                "network.peripherals.ucc_rails",
                "need v_plus > 0 > v_minus",
            ));
        }
        Ok(())
    }

    /// Width of the inhibition pulse, i.e. the refractory period.
    pub fn refractory_width(&self) -> f64 {
        RcLatch::new(&self.lic, self.v_switch).recovery_time()
    }
}
