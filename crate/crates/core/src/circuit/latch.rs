//! RC capacitor latches and the control blocks built from them.
//!
//! Every control block has the same shape: a capacitor charged from a supply
//! through a resistor, discharged instantly when its switch closes. The block
//! output is a logic level derived from whether the capacitor voltage sits
//! below the gate switching voltage.

use serde::{Deserialize, Serialize};

/// Component values of one RC block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcParams {
    /// Supply (V).
    pub v_src: f64,
    /// Charging resistance (Ohm).
    pub r: f64,
    /// Capacitance (F).
    pub c: f64,
    /// Control voltage at or above which the discharge switch closes (V).
    pub switch_threshold: f64,
}

impl RcParams {
    pub fn tau(&self) -> f64 {
        self.r * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcLatch {
    pub v_c: f64,
    pub v_src: f64,
    pub r: f64,
    pub c: f64,
    pub trigger_threshold: f64,
    /// Gate switching voltage; the latch output is high while `v_c` is below it.
    pub output_threshold: f64,
}

impl RcLatch {
    /// A fully charged latch.
    pub fn new(params: &RcParams, output_threshold: f64) -> Self {
        Self {
            v_c: params.v_src,
            v_src: params.v_src,
            r: params.r,
            c: params.c,
            trigger_threshold: params.switch_threshold,
            output_threshold,
        }
    }

    pub fn tau(&self) -> f64 {
        self.r * self.c
    }

    /// Whether a control voltage closes the discharge switch.
    pub fn triggers(&self, control_v: f64) -> bool {
        control_v >= self.trigger_threshold
    }

    /// Discharges on `trigger`, otherwise relaxes toward the supply.
    ///
    /// Relaxation uses the exact exponential for a constant supply.
    #[inline]
    pub fn step(&mut self, trigger: bool, dt: f64) {
        if trigger {
            self.v_c = 0.0;
        } else if self.v_c != self.v_src {
            let decay = (-dt / self.tau()).exp();
            self.v_c = (self.v_src + (self.v_c - self.v_src) * decay).clamp(0.0, self.v_src);
        }
    }

    /// Discharge at an event `elapsed` seconds before the end of the
    /// current step, followed by recharge for the rest of the step.
    pub fn fire(&mut self, elapsed: f64) {
        self.v_c = 0.0;
        if elapsed > 0.0 {
            self.step(false, elapsed);
        }
    }

    /// Logic output: high while the capacitor is below the switching voltage.
    #[inline]
    pub fn output_high(&self) -> bool {
        self.v_c < self.output_threshold
    }

    pub fn reset(&mut self) {
        self.v_c = self.v_src;
    }

    /// Time for a fully discharged capacitor to recharge to the switching
    /// voltage: `tau * ln(v_src / (v_src - v_switch))`.
    pub fn recovery_time(&self) -> f64 {
        self.tau() * (self.v_src / (self.v_src - self.output_threshold)).ln()
    }
}

/// Update-voltage rails of the comparator in each row's update control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UccParams {
    pub v_plus: f64,
    pub v_minus: f64,
}

impl Default for UccParams {
    fn default() -> Self {
        Self {
            v_plus: 1.4,
            v_minus: -2.6,
        }
    }
}

/// Lateral inhibition: any post-spike discharges `C_inh`; `v_inh` is high
/// until it recharges past the inverter switching point.
///
/// Returns `(v_inh_high, v_C_inh)`.
pub fn lic_step(lic: &mut RcLatch, any_post_spike: bool, dt: f64) -> (bool, f64) {
    lic.step(any_post_spike, dt);
    (lic.output_high(), lic.v_c)
}

/// Synapse control for one column. Returns `v_e` high (column ON).
///
/// `v_e` is low exactly when inhibition is active and this column's own
/// post-spike latch is not set.
pub fn scc_step(scc: &mut RcLatch, post_spike: bool, v_inh_high: bool, dt: f64) -> bool {
    scc.step(post_spike, dt);
    scc_output(scc, v_inh_high)
}

pub fn scc_output(scc: &RcLatch, v_inh_high: bool) -> bool {
    !(!scc.output_high() && v_inh_high)
}

/// Dual-switch control for one row. Returns `v_s-bar` high (row passes
/// spikes); low selects the update voltage.
pub fn dcc_step(dcc: &mut RcLatch, pre_spike: bool, v_inh_high: bool, dt: f64) -> bool {
    dcc.step(pre_spike, dt);
    dcc_output(dcc, v_inh_high)
}

pub fn dcc_output(dcc: &RcLatch, v_inh_high: bool) -> bool {
    !(dcc.output_high() && v_inh_high)
}

/// Comparator of the update control: positive rail when the row's
/// capacitor has recharged further than the inhibition capacitor, i.e. the
/// pre-spike came first. Ties go to the negative rail.
pub fn ucc_output(v_c_u: f64, v_c_inh: f64, p: &UccParams) -> f64 {
    if v_c_u > v_c_inh {
        p.v_plus
    } else {
        if v_c_u == v_c_inh {
            log::debug!("update comparator tie at {v_c_u} V");
        }
        p.v_minus
    }
}
