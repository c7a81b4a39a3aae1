use rand::Rng;

use crate::circuit::{
    dcc_output, scc_output, ucc_output, Crossbar, LifState, RcLatch, RowSource,
};
use crate::device::{MemristorParams, MemristorState};
use crate::encoder::SpikeTrain;
use crate::engine::config::{NetworkConfig, TrainingMode};
use crate::error::{Error, Result};

/// Outcome of presenting one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentationResult {
    /// First neuron to fire, if any.
    pub winner: Option<usize>,
    /// Time of the winner's spike (s).
    pub spike_time: Option<f64>,
    /// Another neuron crossed threshold in the same step as the winner.
    pub tie: bool,
    /// Conductance change (S), column-major `m x n`.
    pub delta_g: Vec<f64>,
    /// Every emitted post-spike `(neuron, time)`, in order.
    pub post_spikes: Vec<(usize, f64)>,
}

impl PresentationResult {
    pub fn delta_g_at(&self, n: usize, col: usize, row: usize) -> f64 {
        self.delta_g[col * n + row]
    }
}

/// Signals of one simulated step, handed to a trace observer.
#[derive(Debug)]
pub struct StepView<'a> {
    pub t: f64,
    pub v_m: &'a [f64],
    pub v_inh_high: bool,
    pub v_c_inh: f64,
    pub v_e_high: &'a [bool],
    pub v_sbar_high: &'a [bool],
    pub v_updt: &'a [f64],
    /// Neuron that emitted a post-spike in this step.
    pub post_spike: Option<usize>,
}

/// A crossbar together with its neurons and control blocks.
#[derive(Debug, Clone)]
pub struct Network {
    pub config: NetworkConfig,
    pub crossbar: Crossbar,
    lifs: Vec<LifState>,
    lic: RcLatch,
    scc: Vec<RcLatch>,
    dcc: Vec<RcLatch>,
    ucc: Vec<RcLatch>,
}

impl Network {
    /// A fresh network; every cell starts at the high-conductance rail.
    pub fn new(config: NetworkConfig, device: MemristorParams) -> Result<Self> {
        config.validate()?;
        device.validate()?;
        let crossbar = Crossbar::new(config.n, config.m, device, config.col_gain)?;
        Self::with_crossbar(config, crossbar)
    }

    pub fn with_crossbar(config: NetworkConfig, crossbar: Crossbar) -> Result<Self> {
        config.validate()?;
        if crossbar.rows() != config.n || crossbar.cols() != config.m {
            return Err(Error::invalid(format!(
                "crossbar is {}x{}, config wants {}x{}",
                crossbar.rows(),
                crossbar.cols(),
                config.n,
                config.m
            )));
        }
        let p = &config.peripherals;
        let lif = LifState::new(config.c_m, config.r_leak, config.v_rest, config.v_th);
        Ok(Self {
            lifs: vec![lif; config.m],
            lic: RcLatch::new(&p.lic, p.v_switch),
            scc: vec![RcLatch::new(&p.scc, p.v_switch); config.m],
            dcc: vec![RcLatch::new(&p.dcc, p.v_switch); config.n],
            ucc: vec![RcLatch::new(&p.ucc, p.v_switch); config.n],
            crossbar,
            config,
        })
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    /// Returns every latch, membrane and switch to its idle condition.
    fn reset_dynamics(&mut self) {
        self.lifs.iter_mut().for_each(LifState::reset);
        self.lic.reset();
        self.scc.iter_mut().for_each(RcLatch::reset);
        self.dcc.iter_mut().for_each(RcLatch::reset);
        self.ucc.iter_mut().for_each(RcLatch::reset);
        self.crossbar.reset_switches();
    }

    /// Simulates one sample over the configured presentation length.
    ///
    /// With `learning`, winner-column devices in rows switched to the update
    /// source are driven by their row's update voltage; without it, the
    /// crossbar is read-only. In supervised mode the bias current goes to
    /// `label` from t = 0 until inhibition asserts.
    pub fn present(
        &mut self,
        train: &SpikeTrain,
        label: Option<usize>,
        learning: bool,
    ) -> Result<PresentationResult> {
        self.present_traced(train, label, learning, None)
    }

    pub fn present_traced(
        &mut self,
        train: &SpikeTrain,
        label: Option<usize>,
        learning: bool,
        mut trace: Option<&mut dyn FnMut(&StepView<'_>)>,
    ) -> Result<PresentationResult> {
        let (n, m) = (self.n(), self.m());
        if train.rows() != n {
            return Err(Error::invalid(format!(
                "spike train has {} rows, network has {n}",
                train.rows()
            )));
        }
        if let Some(l) = label {
            if l >= m {
                return Err(Error::invalid(format!("label {l} >= class count {m}")));
            }
        }
        let supervised = self.config.mode == TrainingMode::Supervised;
        if learning && supervised && label.is_none() {
            return Err(Error::invalid("supervised learning needs a label"));
        }

        self.reset_dynamics();
        let dt = self.config.dt;
        let steps = self.config.steps_per_sample();
        let shape = train.shape;
        let periph = self.config.peripherals;
        let g_before = learning.then(|| self.crossbar.conductances().to_vec());

        // Step containing each row's pre-spike onset, and the time from the
        // onset to the end of that step.
        let pre_event: Vec<Option<(usize, f64)>> = train
            .onsets()
            .iter()
            .map(|t| {
                t.map(|t| {
                    let k = ((t / dt) + 1e-9).floor().max(0.0) as usize;
                    (k, ((k + 1) as f64 * dt - t).clamp(0.0, dt))
                })
            })
            .collect();
        let spike_end = shape.duration();

        let mut bias_target = if learning && supervised { label } else { None };
        let mut v_row = vec![0.0; n];
        let mut currents = vec![0.0; m];
        let mut v_m = vec![0.0; m];
        let mut v_e = vec![true; m];
        let mut v_sbar = vec![true; n];
        let mut v_updt = vec![0.0; n];
        let mut v_inh_high = false;
        let mut winner = None;
        let mut spike_time = None;
        let mut tie = false;
        let mut post_spikes = Vec::new();

        for k in 0..steps {
            let t = k as f64 * dt;

            // Row voltages seen by the crossbar.
            let mut any_row = false;
            for (i, v) in v_row.iter_mut().enumerate() {
                *v = match train.onset(i) {
                    Some(onset) if t >= onset && t - onset <= spike_end => {
                        any_row = true;
                        shape.value_at(t - onset)
                    }
                    _ => 0.0,
                };
            }
            if any_row {
                self.crossbar.currents_into(&v_row, &mut currents);
            } else {
                currents.iter_mut().for_each(|c| *c = 0.0);
            }

            // Neurons. Of several crossings in one step the earliest
            // interpolated crossing wins, then the lowest index.
            let mut fired: Option<(usize, f64)> = None;
            let mut crossings = 0usize;
            for j in 0..m {
                let bias = if bias_target == Some(j) {
                    self.config.i_b
                } else {
                    0.0
                };
                if self.lifs[j].step(currents[j], bias, v_inh_high, dt) {
                    crossings += 1;
                    let c = self.lifs[j].crossing;
                    match fired {
                        Some((_, cw)) if cw <= c => self.lifs[j].spiked_this_step = false,
                        Some((w, _)) => {
                            self.lifs[w].spiked_this_step = false;
                            fired = Some((j, c));
                        }
                        None => fired = Some((j, c)),
                    }
                }
                v_m[j] = self.lifs[j].v_m;
            }
            if crossings > 1 && winner.is_none() {
                tie = true;
            }
            let t_end = t + dt;
            // Time from the post-spike to the end of the step.
            let post_elapsed = fired.map(|(_, c)| (1.0 - c) * dt);
            let fired = fired.map(|(j, _)| j);
            if let (Some(j), Some(e)) = (fired, post_elapsed) {
                let t_spike = t_end - e;
                post_spikes.push((j, t_spike));
                if winner.is_none() {
                    winner = Some(j);
                    spike_time = Some(t_spike);
                }
                bias_target = None;
            }

            // Inhibition, then column and row controls.
            match post_elapsed {
                Some(e) if self.lic.triggers(periph.v_post_spike) => self.lic.fire(e),
                _ => self.lic.step(false, dt),
            }
            v_inh_high = self.lic.output_high();
            let v_c_inh = self.lic.v_c;
            for j in 0..m {
                match post_elapsed {
                    Some(e) if fired == Some(j) && self.scc[j].triggers(periph.v_post_spike) => {
                        self.scc[j].fire(e)
                    }
                    _ => self.scc[j].step(false, dt),
                }
                v_e[j] = scc_output(&self.scc[j], v_inh_high);
                self.crossbar.col_active[j] = v_e[j];
            }
            let mut any_update = false;
            for i in 0..n {
                let pre = match pre_event[i] {
                    Some((step, elapsed)) if step == k => Some(elapsed),
                    _ => None,
                };
                match pre {
                    Some(e) if self.dcc[i].triggers(shape.amplitude) => self.dcc[i].fire(e),
                    _ => self.dcc[i].step(false, dt),
                }
                match pre {
                    Some(e) if self.ucc[i].triggers(shape.amplitude) => self.ucc[i].fire(e),
                    _ => self.ucc[i].step(false, dt),
                }
                v_sbar[i] = dcc_output(&self.dcc[i], v_inh_high);
                v_updt[i] = ucc_output(self.ucc[i].v_c, v_c_inh, &periph.ucc_rails);
                self.crossbar.row_source[i] = if v_sbar[i] {
                    RowSource::Spike
                } else {
                    any_update = true;
                    RowSource::Update
                };
            }

            if learning && any_update {
                self.crossbar.apply_update(&v_updt, dt);
            }

            if let Some(obs) = trace.as_deref_mut() {
                obs(&StepView {
                    t: t_end,
                    v_m: &v_m,
                    v_inh_high,
                    v_c_inh,
                    v_e_high: &v_e,
                    v_sbar_high: &v_sbar,
                    v_updt: &v_updt,
                    post_spike: fired,
                });
            }
        }
        self.crossbar.reset_switches();

        let delta_g = match g_before {
            Some(before) => self
                .crossbar
                .conductances()
                .iter()
                .zip(before)
                .map(|(a, b)| a - b)
                .collect(),
            None => vec![0.0; n * m],
        };
        Ok(PresentationResult {
            winner,
            spike_time,
            tie,
            delta_g,
            post_spikes,
        })
    }

    /// Initial weights: the high-conductance rail for supervised training;
    /// uniformly within the top 10% of the state range for unsupervised.
    pub fn init_weights<R: Rng + ?Sized>(&mut self, mode: TrainingMode, rng: &mut R) {
        let (n, m) = (self.n(), self.m());
        for j in 0..m {
            for i in 0..n {
                let p = *self.crossbar.device_params(j, i);
                let stuck = self.crossbar.device(j, i).stuck;
                if stuck {
                    continue;
                }
                let w = match mode {
                    TrainingMode::Supervised => p.w_max(),
                    TrainingMode::Unsupervised => {
                        let hi = p.w_max();
                        rng.random_range(0.9 * hi..=hi)
                    }
                };
                self.crossbar.set_device(j, i, MemristorState { w, stuck: false });
            }
        }
    }
}
