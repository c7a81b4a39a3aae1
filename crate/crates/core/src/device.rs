//! Voltage-controlled threshold memristor.
//!
//! The device state is the doped-region width `w` in `[0, D]`. Memristance
//! mixes `R_on` and `R_off` linearly in `w / D`; `w` only moves while the
//! applied voltage is outside `[V_T-, V_T+]`, at a rate shaped by the window
//! function `1 - (2w/D - 1)^(2p)`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominator floor for the SET-branch rate, as a fraction of `i_0`.
///
/// The SET rate `i_off / (i - i_0)` is singular where the device current
/// equals `i_0`; the magnitude `|i - i_0|` is floored here.
const SET_DENOM_FLOOR_FRAC: f64 = 1e-3;

/// Device constants. Field names in JSON match the device model's symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemristorParams {
    /// Device thickness (m).
    #[serde(rename = "D")]
    pub d: f64,
    /// Average ion mobility (m^2 s^-1 Ohm^-1).
    pub mu_v: f64,
    #[serde(rename = "R_on")]
    pub r_on: f64,
    #[serde(rename = "R_off")]
    pub r_off: f64,
    #[serde(rename = "V_T_pos")]
    pub v_t_pos: f64,
    #[serde(rename = "V_T_neg")]
    pub v_t_neg: f64,
    pub i_on: f64,
    pub i_off: f64,
    pub i_0: f64,
    /// Window exponent.
    pub p: u32,
    /// Rail margin as a fraction of `D`; `w` is kept in `[delta, D - delta]`.
    pub delta_frac: f64,
}

impl Default for MemristorParams {
    fn default() -> Self {
        Self {
            d: 3e-9,
            mu_v: 3.2e-15,
            r_on: 1e6,
            r_off: 6e7,
            v_t_pos: 1.2,
            v_t_neg: -2.4,
            i_on: 1.0,
            i_off: 1.4e-14,
            i_0: 3e-8,
            p: 1,
            delta_frac: 1e-3,
        }
    }
}

impl MemristorParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("device.{field}"), msg))
            }
        };
        let all_finite = [
            self.d,
            self.mu_v,
            self.r_on,
            self.r_off,
            self.v_t_pos,
            self.v_t_neg,
            self.i_on,
            self.i_off,
            self.i_0,
            self.delta_frac,
        ]
        .iter()
        .all(|x| x.is_finite());
        check(all_finite, "*", "all device parameters must be finite")?;
        check(self.d > 0.0, "D", "must be > 0")?;
        check(self.mu_v > 0.0, "mu_v", "must be > 0")?;
        check(self.r_on > 0.0, "R_on", "must be > 0")?;
        check(self.r_on < self.r_off, "R_off", "must exceed R_on")?;
        check(self.v_t_pos > 0.0, "V_T_pos", "must be > 0")?;
        check(self.v_t_neg < 0.0, "V_T_neg", "must be < 0")?;
        check(self.i_on > 0.0, "i_on", "must be > 0")?;
        check(self.i_off >= 0.0, "i_off", "must be >= 0")?;
        check(self.i_0 >= 0.0, "i_0", "must be >= 0")?;
        check(self.p >= 1, "p", "must be >= 1")?;
        check(
            self.delta_frac > 0.0 && self.delta_frac < 0.5,
            "delta_frac",
            "must lie in (0, 0.5)",
        )
    }

    /// The three physical invariants a per-device draw must satisfy.
    pub fn is_physical(&self) -> bool {
        self.r_on > 0.0 && self.r_on < self.r_off && self.v_t_neg < 0.0 && self.v_t_pos > 0.0
    }

    pub fn delta(&self) -> f64 {
        self.delta_frac * self.d
    }

    pub fn w_min(&self) -> f64 {
        self.delta()
    }

    pub fn w_max(&self) -> f64 {
        self.d - self.delta()
    }

    pub fn resistance_at(&self, w: f64) -> f64 {
        let x = w / self.d;
        self.r_on * x + self.r_off * (1.0 - x)
    }

    /// Largest reachable conductance, at `w = D - delta` (S).
    pub fn g_max(&self) -> f64 {
        1.0 / self.resistance_at(self.w_max())
    }

    /// Smallest reachable conductance, at `w = delta` (S).
    pub fn g_min(&self) -> f64 {
        1.0 / self.resistance_at(self.w_min())
    }

    /// Rate dw/dt (m/s) at state `w` under applied voltage `v`.
    pub fn dw_dt(&self, w: f64, v: f64) -> f64 {
        if v >= self.v_t_neg && v <= self.v_t_pos {
            return 0.0;
        }
        let i = v / self.resistance_at(w);
        let scale = self.mu_v * self.r_on / self.d * window(w, self);
        if v > self.v_t_pos {
            let floor = (SET_DENOM_FLOOR_FRAC * self.i_0).max(f64::MIN_POSITIVE);
            scale * self.i_off / (i - self.i_0).abs().max(floor)
        } else {
            scale * i / self.i_on
        }
    }
}

/// Window function `1 - (2w/D - 1)^(2p)`; zero at both rails, one at `D/2`.
pub fn window(w: f64, params: &MemristorParams) -> f64 {
    let u = 2.0 * w / params.d - 1.0;
    (1.0 - u.powi(2 * params.p as i32)).clamp(0.0, 1.0)
}

/// Dynamic state of one device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemristorState {
    /// Doped-region width (m).
    pub w: f64,
    /// A stuck device ignores every applied voltage.
    pub stuck: bool,
}

impl MemristorState {
    pub fn new(w: f64) -> Self {
        Self { w, stuck: false }
    }

    /// High-conductance state, `w = D - delta`.
    pub fn at_g_max(params: &MemristorParams) -> Self {
        Self::new(params.w_max())
    }

    /// Low-conductance state, `w = delta`.
    pub fn at_g_min(params: &MemristorParams) -> Self {
        Self::new(params.w_min())
    }

    pub fn conductance(&self, params: &MemristorParams) -> f64 {
        1.0 / memristance(self, params)
    }

    /// One explicit-Euler step without input checks. `dt` must be positive.
    #[inline]
    pub(crate) fn advance(&mut self, v: f64, dt: f64, params: &MemristorParams) {
        if self.stuck {
            return;
        }
        let rate = params.dw_dt(self.w, v);
        if rate != 0.0 {
            self.w = (self.w + dt * rate).clamp(params.w_min(), params.w_max());
        }
    }
}

/// Memristance `R_on * w/D + R_off * (1 - w/D)` (Ohm).
pub fn memristance(state: &MemristorState, params: &MemristorParams) -> f64 {
    params.resistance_at(state.w)
}

/// Advances a device by one timestep under `v_applied` (V).
///
/// Positive voltage above `V_T+` raises conductance; below `V_T-` lowers it.
pub fn step_device(
    state: MemristorState,
    v_applied: f64,
    dt: f64,
    params: &MemristorParams,
) -> Result<MemristorState> {
    if !v_applied.is_finite() {
        return Err(Error::invalid(format!(
            "applied voltage must be finite, got {v_applied}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let mut next = state;
    next.advance(v_applied, dt, params);
    Ok(next)
}

/// Draws per-device parameters with relative dispersion on the resistance
/// bounds and on the switching thresholds.
///
/// Each of `R_on`, `R_off`, `V_T+`, `V_T-` is scaled independently by
/// `1 + N(0, dispersion)`. Draws that break the device invariants are
/// redrawn.
pub fn perturb_params<R: Rng + ?Sized>(
    params: &MemristorParams,
    dispersion_r: f64,
    dispersion_vt: f64,
    rng: &mut R,
) -> Result<MemristorParams> {
    if !(dispersion_r >= 0.0 && dispersion_vt >= 0.0) {
        return Err(Error::invalid(format!(
            "dispersions must be >= 0, got R={dispersion_r} Vt={dispersion_vt}"
        )));
    }
    if dispersion_r == 0.0 && dispersion_vt == 0.0 {
        return Ok(*params);
    }
    let nr = Normal::new(0.0, dispersion_r).map_err(|e| Error::invalid(e.to_string()))?;
    let nv = Normal::new(0.0, dispersion_vt).map_err(|e| Error::invalid(e.to_string()))?;
    loop {
        let mut out = *params;
        out.r_on *= 1.0 + nr.sample(rng);
        out.r_off *= 1.0 + nr.sample(rng);
        out.v_t_pos *= 1.0 + nv.sample(rng);
        out.v_t_neg *= 1.0 + nv.sample(rng);
        if out.is_physical() {
            return Ok(out);
        }
    }
}
