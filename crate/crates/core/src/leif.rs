//! Leaky integrate-and-fire neurons, difference-of-exponentials synapses and
//! the set-point sensor currents.

use serde::{Deserialize, Serialize};

use crate::ase::heaviside;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeifParams {
    /// Membrane capacitance (arbitrary units, consistent with currents).
    pub c_mem: f64,
    /// Leak conductance.
    pub g_leak: f64,
    /// Resting potential (mV).
    pub v0: f64,
    /// Firing threshold (mV).
    pub v_t: f64,
    /// Potential reported on a spike step (mV).
    pub v_max: f64,
}

impl Default for LeifParams {
    fn default() -> Self {
        LeifParams {
            c_mem: 0.2,
            g_leak: 1.0,
            v0: -70.0,
            v_t: -55.0,
            v_max: 30.0,
        }
    }
}

impl LeifParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_mem > 0.0 && self.g_leak > 0.0) {
            return Err(Error::config(format!(
                "LEIF c_mem and g_leak must be > 0, got {} / {}",
                self.c_mem, self.g_leak
            )));
        }
        if !(self.v0 < self.v_t && self.v_t < self.v_max) {
            return Err(Error::config(format!(
                "LEIF potentials must satisfy v0 < v_t < v_max, got {} / {} / {}",
                self.v0, self.v_t, self.v_max
            )));
        }
        Ok(())
    }

    pub fn tau_m(&self) -> f64 {
        self.c_mem / self.g_leak
    }

    /// Smallest constant current that eventually reaches threshold.
    pub fn rheobase(&self) -> f64 {
        self.g_leak * (self.v_t - self.v0)
    }

    /// Closed-form firing rate (Hz) under constant current, ignoring the
    /// one-step reset.
    pub fn analytic_rate(&self, current: f64) -> f64 {
        let rheobase = self.rheobase();
        if current <= rheobase {
            0.0
        } else {
            1.0 / (self.tau_m() * (current / (current - rheobase)).ln())
        }
    }
}

/// Result of one LEIF step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeifStep {
    /// Potential reported for this step (`v_max` on a spike).
    pub potential: f64,
    /// Potential the next step integrates from.
    pub next: f64,
    pub spiked: bool,
}

/// One Euler step of `C dV/dt = -g_L (V - V0) + I_app + I_syn`.
pub fn step_leif(v: f64, i_app: f64, i_syn: f64, p: &LeifParams, dt: f64) -> LeifStep {
    let dv = (-p.g_leak * (v - p.v0) + i_app + i_syn) / p.c_mem;
    let v = v + dt * dv;
    if v >= p.v_t {
        LeifStep {
            potential: p.v_max,
            next: p.v0,
            spiked: true,
        }
    } else {
        LeifStep {
            potential: v,
            next: v,
            spiked: false,
        }
    }
}

/// A LEIF neuron with its own parameters and constant bias current.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeifNeuron {
    pub params: LeifParams,
    pub bias: f64,
    pub v: f64,
}

impl LeifNeuron {
    pub fn new(params: LeifParams, bias: f64) -> Self {
        let v = params.v0;
        LeifNeuron { params, bias, v }
    }

    pub fn step(&mut self, i_app: f64, i_syn: f64, dt: f64) -> LeifStep {
        let out = step_leif(self.v, i_app + self.bias, i_syn, &self.params, dt);
        self.v = out.next;
        out
    }
}

/// The seven neurons of the navigation network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NeuronId {
    N1,
    N2,
    N3,
    N4,
    N5,
    N6,
    N7,
}

impl NeuronId {
    pub const ALL: [NeuronId; 7] = [
        NeuronId::N1,
        NeuronId::N2,
        NeuronId::N3,
        NeuronId::N4,
        NeuronId::N5,
        NeuronId::N6,
        NeuronId::N7,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }
}

impl std::fmt::Display for NeuronId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "N{}", self.number())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Synapse {
    pub source: NeuronId,
    pub target: NeuronId,
    /// Signed strength; negative for inhibitory synapses.
    pub weight: f64,
    pub i0: f64,
    /// Slow (decay) time constant (s).
    pub tau: f64,
    /// Fast (rise) time constant (s).
    pub tau_s: f64,
}

impl Synapse {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > self.tau_s && self.tau_s > 0.0) {
            return Err(Error::config(format!(
                "synapse {}->{}: need tau > tau_s > 0, got {} / {}",
                self.source, self.target, self.tau, self.tau_s
            )));
        }
        if self.weight == 0.0 || !self.weight.is_finite() {
            return Err(Error::config(format!(
                "synapse {}->{}: weight must be nonzero, got {}",
                self.source, self.target, self.weight
            )));
        }
        Ok(())
    }

    /// Single-spike kernel `e^{-s/tau} - e^{-s/tau_s}` at `s` seconds after
    /// the spike (zero before it).
    pub fn kernel(&self, since: f64) -> f64 {
        if since < 0.0 {
            0.0
        } else {
            (-since / self.tau).exp() - (-since / self.tau_s).exp()
        }
    }

    /// Time after a spike at which the kernel peaks.
    pub fn kernel_peak_time(&self) -> f64 {
        self.tau * self.tau_s / (self.tau - self.tau_s) * (self.tau / self.tau_s).ln()
    }

    /// Spikes older than this contribute less than `e^-10` of the kernel
    /// scale and are ignored.
    pub fn horizon(&self) -> f64 {
        10.0 * self.tau
    }
}

/// Spike times of one neuron, strictly increasing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    times: Vec<f64>,
}

impl SpikeTrain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("spike times must be strictly increasing"));
        }
        Ok(SpikeTrain { times })
    }

    /// Appends a spike; times that do not advance the train are rejected.
    pub fn push(&mut self, t: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::config(format!(
                    "spike at {t} s does not follow previous spike at {last} s"
                )));
            }
        }
        self.times.push(t);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Superposed synaptic current at time `t` from every spike at or before
/// `t` within the synapse horizon.
pub fn synaptic_current(t: f64, train: &SpikeTrain, syn: &Synapse) -> f64 {
    let horizon = syn.horizon();
    let times = train.times();
    let end = times.partition_point(|&tk| tk <= t);
    let start = times[..end].partition_point(|&tk| t - tk > horizon);
    let sum: f64 = times[start..end].iter().map(|&tk| syn.kernel(t - tk)).sum();
    syn.i0 * syn.weight * sum
}

/// Recursive form of [`synaptic_current`] for fixed-step simulation: the two
/// exponential sums decay geometrically between steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynapticTrace {
    slow: f64,
    fast: f64,
    slow_decay: f64,
    fast_decay: f64,
}

impl SynapticTrace {
    pub fn new(syn: &Synapse, dt: f64) -> Self {
        SynapticTrace {
            slow: 0.0,
            fast: 0.0,
            slow_decay: (-dt / syn.tau).exp(),
            fast_decay: (-dt / syn.tau_s).exp(),
        }
    }

    /// Advance one step, then register a spike emitted at the new time.
    pub fn advance(&mut self, spiked: bool) {
        self.slow *= self.slow_decay;
        self.fast *= self.fast_decay;
        if spiked {
            self.slow += 1.0;
            self.fast += 1.0;
        }
    }

    pub fn current(&self, syn: &Synapse) -> f64 {
        syn.i0 * syn.weight * (self.slow - self.fast)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorChannel {
    /// Active while the concentration is above the set-point.
    Above,
    /// Active while the concentration is below the set-point.
    Below,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    /// Set-point concentration (mM).
    pub c_track: f64,
    /// Current applied while the sensor condition holds.
    pub i_app0: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            c_track: 55.0,
            i_app0: 25.0,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.i_app0 > 0.0) {
            return Err(Error::config(format!(
                "sensor i_app0 must be > 0, got {}",
                self.i_app0
            )));
        }
        if !self.c_track.is_finite() {
            return Err(Error::config("sensor c_track must be finite"));
        }
        Ok(())
    }
}

pub fn sensor_current(c: f64, cfg: &SensorConfig, channel: SensorChannel) -> f64 {
    match channel {
        SensorChannel::Above => cfg.i_app0 * heaviside(c - cfg.c_track),
        SensorChannel::Below => cfg.i_app0 * heaviside(cfg.c_track - c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn syn() -> Synapse {
        Synapse {
            source: NeuronId::N1,
            target: NeuronId::N5,
            weight: 1.5,
            i0: 2.0,
            tau: 0.5,
            tau_s: 0.1,
        }
    }

    #[test]
    fn rest_is_fixed_point() {
        let p = LeifParams::default();
        let out = step_leif(p.v0, 0.0, 0.0, &p, 1e-3);
        assert_eq!(out.potential, p.v0);
        assert!(!out.spiked);
    }

    #[test]
    fn subthreshold_current_never_spikes() {
        let p = LeifParams::default();
        let mut n = LeifNeuron::new(p.clone(), 0.0);
        let i = 0.99 * p.rheobase();
        for _ in 0..200_000 {
            assert!(!n.step(i, 0.0, 1e-3).spiked);
        }
    }

    #[test]
    fn spike_then_reset() {
        let p = LeifParams::default();
        let mut n = LeifNeuron::new(p.clone(), 0.0);
        let mut after_spike = false;
        for _ in 0..10_000 {
            let out = n.step(2.0 * p.rheobase(), 0.0, 1e-3);
            if after_spike {
                assert!(out.potential < p.v_t && out.potential > p.v0);
            }
            if out.spiked {
                assert_eq!(out.potential, p.v_max);
                assert_eq!(n.v, p.v0);
            }
            after_spike = out.spiked;
        }
    }

    #[test]
    fn empty_train_gives_no_current() {
        assert_eq!(synaptic_current(3.0, &SpikeTrain::new(), &syn()), 0.0);
    }

    #[test]
    fn current_is_zero_at_spike_time() {
        let train = SpikeTrain::from_times(vec![1.25]).unwrap();
        assert_eq!(synaptic_current(1.25, &train, &syn()), 0.0);
        assert_eq!(synaptic_current(1.0, &train, &syn()), 0.0);
    }

    #[test]
    fn kernel_peak_matches_closed_form() {
        let s = syn();
        // Dense scan as the oracle.
        let (best_t, _) = (0..200_000)
            .map(|k| k as f64 * 1e-5)
            .map(|t| (t, s.kernel(t)))
            .fold((0.0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert_abs_diff_eq!(best_t, s.kernel_peak_time(), epsilon = 2e-5);
    }

    #[test]
    fn trace_agrees_with_direct_sum() {
        let s = syn();
        let dt = 1e-3;
        let spike_steps = [10usize, 250, 260, 900, 1500];
        let mut trace = SynapticTrace::new(&s, dt);
        let mut train = SpikeTrain::new();
        for step in 1..3000usize {
            let t = step as f64 * dt;
            let spiked = spike_steps.contains(&step);
            if spiked {
                train.push(t).unwrap();
            }
            trace.advance(spiked);
            let direct = synaptic_current(t, &train, &s);
            assert_abs_diff_eq!(trace.current(&s), direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn train_rejects_unordered_times() {
        assert!(SpikeTrain::from_times(vec![1.0, 1.0]).is_err());
        let mut t = SpikeTrain::new();
        t.push(2.0).unwrap();
        assert!(t.push(1.5).is_err());
    }

    #[test]
    fn sensor_currents() {
        let cfg = SensorConfig {
            c_track: 55.0,
            i_app0: 7.0,
        };
        assert_eq!(sensor_current(60.0, &cfg, SensorChannel::Above), 7.0);
        assert_eq!(sensor_current(60.0, &cfg, SensorChannel::Below), 0.0);
        assert_eq!(sensor_current(55.0, &cfg, SensorChannel::Above), 0.0);
        assert_eq!(sensor_current(55.0, &cfg, SensorChannel::Below), 0.0);
    }

    #[test]
    fn neuron_ids_round_trip() {
        for id in NeuronId::ALL {
            assert_eq!(NeuronId::from_number(id.number()), Some(id));
        }
        assert_eq!(NeuronId::from_number(0), None);
        assert_eq!(NeuronId::from_number(8), None);
    }
}
