use serde::{Deserialize, Serialize};

use crate::device::{MemristorParams, MemristorState};
use crate::error::{Error, Result};

/// What a row's dual switch connects to the crossbar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSource {
    Spike,
    Update,
}

/// `n x m` array of 1T1M cells. Row `i` carries pre-spike `i`; column `j`
/// feeds neuron `j`. Storage is column-major: cell `(j, i)` at `j * n + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossbar {
    n: usize,
    m: usize,
    devices: Vec<MemristorState>,
    params: Vec<MemristorParams>,
    conductance: Vec<f64>,
    pub col_active: Vec<bool>,
    pub row_source: Vec<RowSource>,
    pub col_gain: f64,
}

impl Crossbar {
    /// All cells share `params` and start at the high-conductance rail.
    pub fn new(n: usize, m: usize, params: MemristorParams, col_gain: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid(format!(
                "crossbar needs n, m >= 1 (got {n}x{m})"
            )));
        }
        let devices = vec![MemristorState::at_g_max(&params); n * m];
        let params = vec![params; n * m];
        let mut xb = Self {
            n,
            m,
            devices,
            params,
            conductance: vec![0.0; n * m],
            col_active: vec![true; m],
            row_source: vec![RowSource::Spike; n],
            col_gain,
        };
        xb.refresh_all();
        Ok(xb)
    }

    /// Builds from explicit per-cell state, column-major.
    pub fn from_parts(
        n: usize,
        m: usize,
        devices: Vec<MemristorState>,
        params: Vec<MemristorParams>,
        col_gain: f64,
    ) -> Result<Self> {
        if n == 0 || m == 0 || devices.len() != n * m || params.len() != n * m {
            return Err(Error::invalid(format!(
                "crossbar parts do not match {n}x{m}: {} devices, {} params",
                devices.len(),
                params.len()
            )));
        }
        let mut xb = Self {
            n,
            m,
            devices,
            params,
            conductance: vec![0.0; n * m],
            col_active: vec![true; m],
            row_source: vec![RowSource::Spike; n],
            col_gain,
        };
        xb.refresh_all();
        Ok(xb)
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    #[inline]
    fn idx(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.m && row < self.n);
        col * self.n + row
    }

    pub fn device(&self, col: usize, row: usize) -> &MemristorState {
        &self.devices[self.idx(col, row)]
    }

    pub fn device_params(&self, col: usize, row: usize) -> &MemristorParams {
        &self.params[self.idx(col, row)]
    }

    pub fn devices(&self) -> &[MemristorState] {
        &self.devices
    }

    pub fn params(&self) -> &[MemristorParams] {
        &self.params
    }

    pub fn set_device(&mut self, col: usize, row: usize, state: MemristorState) {
        let k = self.idx(col, row);
        self.devices[k] = state;
        self.conductance[k] = state.conductance(&self.params[k]);
    }

    /// Replaces one cell's parameters, clamping its state into the new rails.
    pub fn set_device_params(&mut self, col: usize, row: usize, params: MemristorParams) {
        let k = self.idx(col, row);
        self.params[k] = params;
        let w = self.devices[k].w.clamp(params.w_min(), params.w_max());
        self.devices[k].w = w;
        self.conductance[k] = self.devices[k].conductance(&params);
    }

    /// `G[j][i]` in siemens.
    pub fn conductance(&self, col: usize, row: usize) -> f64 {
        self.conductance[self.idx(col, row)]
    }

    /// All conductances, column-major.
    pub fn conductances(&self) -> &[f64] {
        &self.conductance
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.conductance[col * self.n..(col + 1) * self.n]
    }

    fn refresh_all(&mut self) {
        for k in 0..self.devices.len() {
            self.conductance[k] = self.devices[k].conductance(&self.params[k]);
        }
    }

    /// Column currents `I_j = col_gain * sum_i v_i * G[j][i]`; inactive
    /// columns and rows switched to the update source contribute nothing.
    pub fn currents(&self, row_voltages: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.currents_into(row_voltages, &mut out);
        out
    }

    pub fn currents_into(&self, row_voltages: &[f64], out: &mut [f64]) {
        assert_eq!(row_voltages.len(), self.n, "row voltage count");
        assert_eq!(out.len(), self.m, "column count");
        for (j, slot) in out.iter_mut().enumerate() {
            if !self.col_active[j] {
                *slot = 0.0;
                continue;
            }
            let g = self.column(j);
            let mut sum = 0.0;
            for i in 0..self.n {
                let v = row_voltages[i];
                if v != 0.0 && self.row_source[i] == RowSource::Spike {
                    sum += v * g[i];
                }
            }
            *slot = self.col_gain * sum;
        }
    }

    /// Applies each update-mode row's voltage across every cell of the
    /// active columns for `dt`. Spike-mode rows and inactive columns are left
    /// untouched.
    pub fn apply_update(&mut self, row_update_voltages: &[f64], dt: f64) {
        assert_eq!(row_update_voltages.len(), self.n, "row voltage count");
        for j in 0..self.m {
            if !self.col_active[j] {
                continue;
            }
            for i in 0..self.n {
                if self.row_source[i] != RowSource::Update {
                    continue;
                }
                let k = j * self.n + i;
                let before = self.devices[k].w;
                self.devices[k].advance(row_update_voltages[i], dt, &self.params[k]);
                if self.devices[k].w != before {
                    self.conductance[k] = self.devices[k].conductance(&self.params[k]);
                }
            }
        }
    }

    /// Restores the idle switch configuration: all columns on, all rows
    /// passing spikes.
    pub fn reset_switches(&mut self) {
        self.col_active.iter_mut().for_each(|a| *a = true);
        self.row_source.iter_mut().for_each(|s| *s = RowSource::Spike);
    }
}

/// Functional forms of the crossbar operations.
pub fn crossbar_currents(xb: &Crossbar, row_voltages: &[f64]) -> Vec<f64> {
    xb.currents(row_voltages)
}

pub fn crossbar_apply_update(mut xb: Crossbar, row_update_voltages: &[f64], dt: f64) -> Crossbar {
    xb.apply_update(row_update_voltages, dt);
    xb
}
