use serde::{Deserialize, Serialize};

/// Leaky integrate-and-fire membrane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifState {
    /// Membrane voltage (V).
    pub v_m: f64,
    /// Membrane capacitance (F).
    pub c_m: f64,
    /// Leak resistance to `v_rest` (Ohm).
    pub r_leak: f64,
    pub v_rest: f64,
    pub v_th: f64,
    pub spiked_this_step: bool,
    /// Fraction of the last step elapsed at the threshold crossing, by
    /// linear interpolation of the membrane voltage. Meaningful only when
    /// `spiked_this_step`.
    pub crossing: f64,
}

impl LifState {
    pub fn new(c_m: f64, r_leak: f64, v_rest: f64, v_th: f64) -> Self {
        Self {
            v_m: v_rest,
            c_m,
            r_leak,
            v_rest,
            v_th,
            spiked_this_step: false,
            crossing: 0.0,
        }
    }

    /// Advances one step and reports whether the neuron crossed threshold.
    ///
    /// Inhibition clamps the membrane to rest and blocks integration. A
    /// threshold crossing discharges the membrane to rest.
    #[inline]
    pub fn step(&mut self, i_in: f64, i_bias: f64, inhibited: bool, dt: f64) -> bool {
        if inhibited {
            self.v_m = self.v_rest;
            self.spiked_this_step = false;
            return false;
        }
        let v_old = self.v_m;
        let leak = (v_old - self.v_rest) / (self.r_leak * self.c_m);
        self.v_m += dt * ((i_in + i_bias) / self.c_m - leak);
        self.spiked_this_step = self.v_m >= self.v_th;
        if self.spiked_this_step {
            self.crossing = if self.v_m > v_old {
                ((self.v_th - v_old) / (self.v_m - v_old)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            self.v_m = self.v_rest;
        }
        self.spiked_this_step
    }

    pub fn reset(&mut self) {
        self.v_m = self.v_rest;
        self.spiked_this_step = false;
    }
}

/// Functional form of [`LifState::step`].
pub fn lif_step(
    st: LifState,
    i_in: f64,
    i_bias: f64,
    inhibited: bool,
    dt: f64,
) -> (LifState, bool) {
    let mut next = st;
    let spiked = next.step(i_in, i_bias, inhibited, dt);
    (next, spiked)
}
