//! The seven-neuron navigation network and the worm's motor/kinematic model.
//!
//! ```text
//!   C ──> N1 (C > C_track) ──┬──(+)──> N5 ── clockwise turn, slow
//!   C ──> N3 (dC/dt > 0) ────┤(+)
//!   C ──> N2 (C < C_track) ──┼──(+)──> N6 ── anticlockwise turn, slow
//!   C ──> N4 (dC/dt < 0) ────┤(+)
//!                            └──N1,N2 (+) / N3,N4 (-)──> N7 ── random turn, fast
//! ```
//!
//! Each step updates the sensors, then the gradient detectors, then the logic
//! neurons from synaptic currents that include the current step's upstream
//! spikes.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ase::{AseParams, AseState, Side};
use crate::environment::Arena;
use crate::error::{Error, Result};
use crate::leif::{
    sensor_current, LeifNeuron, LeifParams, NeuronId, SensorChannel, SensorConfig, Synapse,
    SynapticTrace,
};

/// The eight connections of the network as (source, target, excitatory).
pub const WIRING: [(NeuronId, NeuronId, bool); 8] = [
    (NeuronId::N1, NeuronId::N5, true),
    (NeuronId::N3, NeuronId::N5, true),
    (NeuronId::N2, NeuronId::N6, true),
    (NeuronId::N4, NeuronId::N6, true),
    (NeuronId::N1, NeuronId::N7, true),
    (NeuronId::N2, NeuronId::N7, true),
    (NeuronId::N3, NeuronId::N7, false),
    (NeuronId::N4, NeuronId::N7, false),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub sensor: SensorConfig,
    pub n1: LeifParams,
    pub n2: LeifParams,
    /// Positive-gradient detector (left-type ASE).
    pub n3: AseParams,
    /// Negative-gradient detector (right-type ASE).
    pub n4: AseParams,
    pub n5: LeifParams,
    pub n6: LeifParams,
    pub n7: LeifParams,
    pub bias5: f64,
    pub bias6: f64,
    pub synapses: Vec<Synapse>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        let sensor_neuron = LeifParams::default();
        let logic = LeifParams {
            c_mem: 0.05,
            g_leak: 1.0,
            ..LeifParams::default()
        };
        let syn = |source, target, weight| Synapse {
            source,
            target,
            weight,
            i0: 10.0,
            tau: 0.4,
            tau_s: 0.1,
        };
        use NeuronId::*;
        NetworkConfig {
            sensor: SensorConfig::default(),
            n1: sensor_neuron.clone(),
            n2: sensor_neuron,
            n3: AseParams::default(),
            n4: AseParams::default(),
            n5: logic.clone(),
            n6: logic,
            n7: LeifParams {
                c_mem: 0.35,
                g_leak: 1.0,
                ..LeifParams::default()
            },
            bias5: -8.0,
            bias6: -8.0,
            synapses: vec![
                syn(N1, N5, 1.3),
                syn(N3, N5, 1.0),
                syn(N2, N6, 1.3),
                syn(N4, N6, 1.0),
                syn(N1, N7, 1.2),
                syn(N2, N7, 1.2),
                syn(N3, N7, -3.0),
                syn(N4, N7, -3.0),
            ],
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        for p in [&self.n1, &self.n2, &self.n5, &self.n6, &self.n7] {
            p.validate()?;
        }
        self.n3.validate()?;
        self.n4.validate()?;
        if !(self.bias5 < 0.0 && self.bias6 < 0.0) {
            return Err(Error::config(format!(
                "bias currents must be negative, got bias5 = {} and bias6 = {}",
                self.bias5, self.bias6
            )));
        }
        if self.synapses.len() != WIRING.len() {
            return Err(Error::config(format!(
                "expected {} synapses, got {}",
                WIRING.len(),
                self.synapses.len()
            )));
        }
        for &(source, target, excitatory) in &WIRING {
            let matching: Vec<&Synapse> = self
                .synapses
                .iter()
                .filter(|s| s.source == source && s.target == target)
                .collect();
            let syn = match matching.as_slice() {
                [one] => *one,
                [] => return Err(Error::config(format!("missing synapse {source}->{target}"))),
                _ => {
                    return Err(Error::config(format!(
                        "duplicate synapse {source}->{target}"
                    )))
                }
            };
            syn.validate()?;
            if excitatory != (syn.weight > 0.0) {
                return Err(Error::config(format!(
                    "synapse {source}->{target} must be {}, got weight {}",
                    if excitatory {
                        "excitatory"
                    } else {
                        "inhibitory"
                    },
                    syn.weight
                )));
            }
            if !(syn.i0 > 0.0) {
                return Err(Error::config(format!(
                    "synapse {source}->{target}: i0 must be > 0"
                )));
            }
        }
        Ok(())
    }

    pub fn synapse(&self, source: NeuronId, target: NeuronId) -> Option<&Synapse> {
        self.synapses
            .iter()
            .find(|s| s.source == source && s.target == target)
    }
}

/// Which of the seven neurons spiked in one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeVector(pub [bool; 7]);

impl SpikeVector {
    pub fn get(&self, id: NeuronId) -> bool {
        self.0[id.index()]
    }

    pub fn set(&mut self, id: NeuronId, spiked: bool) {
        self.0[id.index()] = spiked;
    }

    pub fn any(&self) -> bool {
        self.0.iter().any(|&s| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = NeuronId> + '_ {
        NeuronId::ALL.into_iter().filter(|id| self.get(*id))
    }
}

/// Override applied to a neuron's output for stimulation protocols.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Clamp {
    #[default]
    Free,
    /// The neuron is integrated but its spikes are discarded.
    Silent,
    /// The neuron's output is replaced by a regular spike train.
    Tonic { rate_hz: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Clamps(pub [Clamp; 7]);

impl Clamps {
    pub fn with(mut self, id: NeuronId, clamp: Clamp) -> Self {
        self.0[id.index()] = clamp;
        self
    }

    fn apply(&self, id: NeuronId, spiked: bool, step: u64, dt: f64) -> bool {
        match self.0[id.index()] {
            Clamp::Free => spiked,
            Clamp::Silent => false,
            Clamp::Tonic { rate_hz } => {
                let before = (step as f64 * dt * rate_hz).floor();
                let after = ((step + 1) as f64 * dt * rate_hz).floor();
                after > before
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Network {
    cfg: NetworkConfig,
    dt: f64,
    step: u64,
    n1: LeifNeuron,
    n2: LeifNeuron,
    n3: AseState,
    n4: AseState,
    n5: LeifNeuron,
    n6: LeifNeuron,
    n7: LeifNeuron,
    traces: Vec<SynapticTrace>,
}

impl Network {
    /// Builds the network with its gradient detectors adapted to
    /// `c_initial`.
    pub fn build(cfg: &NetworkConfig, dt: f64, c_initial: f64) -> Result<Self> {
        cfg.validate()?;
        if !(dt > 0.0) {
            return Err(Error::config(format!("dt must be > 0, got {dt}")));
        }
        let traces = cfg
            .synapses
            .iter()
            .map(|s| SynapticTrace::new(s, dt))
            .collect();
        Ok(Network {
            n1: LeifNeuron::new(cfg.n1.clone(), 0.0),
            n2: LeifNeuron::new(cfg.n2.clone(), 0.0),
            n3: AseState::adapted(Side::Left, c_initial, &cfg.n3),
            n4: AseState::adapted(Side::Right, c_initial, &cfg.n4),
            n5: LeifNeuron::new(cfg.n5.clone(), cfg.bias5),
            n6: LeifNeuron::new(cfg.n6.clone(), cfg.bias6),
            n7: LeifNeuron::new(cfg.n7.clone(), 0.0),
            traces,
            cfg: cfg.clone(),
            dt,
            step: 0,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn synapse_count(&self) -> usize {
        self.cfg.synapses.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Simulated time after the steps taken so far (s).
    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn gradient_detector(&self, id: NeuronId) -> Option<&AseState> {
        match id {
            NeuronId::N3 => Some(&self.n3),
            NeuronId::N4 => Some(&self.n4),
            _ => None,
        }
    }

    /// Total synaptic current currently flowing into `target`.
    pub fn synaptic_input(&self, target: NeuronId) -> f64 {
        self.cfg
            .synapses
            .iter()
            .zip(&self.traces)
            .filter(|(s, _)| s.target == target)
            .map(|(s, tr)| tr.current(s))
            .sum()
    }

    pub fn step(&mut self, c: f64) -> Result<SpikeVector> {
        self.step_clamped(c, &Clamps::default())
    }

    pub fn step_clamped(&mut self, c: f64, clamps: &Clamps) -> Result<SpikeVector> {
        use NeuronId::*;
        let dt = self.dt;
        let k = self.step;
        let mut spikes = SpikeVector::default();

        let i1 = sensor_current(c, &self.cfg.sensor, SensorChannel::Above);
        let i2 = sensor_current(c, &self.cfg.sensor, SensorChannel::Below);
        spikes.set(
            N1,
            clamps.apply(N1, self.n1.step(i1, 0.0, dt).spiked, k, dt),
        );
        spikes.set(
            N2,
            clamps.apply(N2, self.n2.step(i2, 0.0, dt).spiked, k, dt),
        );

        let s3 = self.n3.step(c, &self.cfg.n3, dt)?.spiked;
        let s4 = self.n4.step(c, &self.cfg.n4, dt)?.spiked;
        spikes.set(N3, clamps.apply(N3, s3, k, dt));
        spikes.set(N4, clamps.apply(N4, s4, k, dt));

        for (syn, trace) in self.cfg.synapses.iter().zip(self.traces.iter_mut()) {
            trace.advance(spikes.get(syn.source));
        }

        let i5 = self.synaptic_input(N5);
        let i6 = self.synaptic_input(N6);
        let i7 = self.synaptic_input(N7);
        spikes.set(
            N5,
            clamps.apply(N5, self.n5.step(0.0, i5, dt).spiked, k, dt),
        );
        spikes.set(
            N6,
            clamps.apply(N6, self.n6.step(0.0, i6, dt).spiked, k, dt),
        );
        spikes.set(
            N7,
            clamps.apply(N7, self.n7.step(0.0, i7, dt).spiked, k, dt),
        );

        self.step += 1;
        Ok(spikes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MotorNeuron {
    N5,
    N6,
    N7,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorParams {
    /// Turn per N5/N6 spike (degrees).
    pub turn_deterministic_deg: f64,
    /// Half-width of the uniform N7 turn (degrees).
    pub turn_random_halfwidth_deg: f64,
    /// Exploration speed (mm/s).
    pub v1: f64,
    /// Tracking speed (mm/s).
    pub v2: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        MotorParams {
            turn_deterministic_deg: 3.33,
            turn_random_halfwidth_deg: 22.5,
            v1: 0.3,
            v2: 0.09,
        }
    }
}

impl MotorParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.turn_deterministic_deg,
            self.turn_random_halfwidth_deg,
            self.v1,
            self.v2,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::config(format!(
                "motor parameters must be > 0: {self:?}"
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WormState {
    pub x: f64,
    pub y: f64,
    /// Heading (rad), counter-clockwise from +x, kept in (-pi, pi].
    pub heading: f64,
    /// Current speed (mm/s); always `v1` or `v2`.
    pub speed: f64,
    pub last_motor: Option<MotorNeuron>,
}

impl WormState {
    pub fn new(pos: [f64; 2], heading: f64, speed: f64) -> Self {
        WormState {
            x: pos[0],
            y: pos[1],
            heading: wrap_angle(heading),
            speed,
            last_motor: None,
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Maps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Moves `(x, y)` by `(dx, dy)` inside the arena, mirroring position and
/// heading at each wall that is crossed.
pub(crate) fn reflect_move(
    arena: &Arena,
    x: f64,
    y: f64,
    heading: f64,
    distance: f64,
) -> (f64, f64, f64) {
    let mut nx = x + distance * heading.cos();
    let mut ny = y + distance * heading.sin();
    let mut h = heading;
    if nx < 0.0 {
        nx = -nx;
        h = PI - h;
    } else if nx > arena.width {
        nx = 2.0 * arena.width - nx;
        h = PI - h;
    }
    if ny < 0.0 {
        ny = -ny;
        h = -h;
    } else if ny > arena.height {
        ny = 2.0 * arena.height - ny;
        h = -h;
    }
    (
        nx.clamp(0.0, arena.width),
        ny.clamp(0.0, arena.height),
        wrap_angle(h),
    )
}

/// Applies the turns and speed changes requested by this step's motor
/// spikes, then advances the worm by `speed * dt`.
pub fn apply_motor<R: Rng + ?Sized>(
    w: &WormState,
    spikes: &SpikeVector,
    mp: &MotorParams,
    rng: &mut R,
    dt: f64,
    arena: &Arena,
) -> WormState {
    let mut next = w.clone();
    let mut turn = 0.0;
    if spikes.get(NeuronId::N5) {
        turn -= mp.turn_deterministic_deg;
    }
    if spikes.get(NeuronId::N6) {
        turn += mp.turn_deterministic_deg;
    }
    if spikes.get(NeuronId::N7) {
        let hw = mp.turn_random_halfwidth_deg;
        turn += rng.gen_range(-hw..=hw);
    }
    next.heading = wrap_angle(w.heading + turn.to_radians());

    let fired = if spikes.get(NeuronId::N5) {
        Some(MotorNeuron::N5)
    } else if spikes.get(NeuronId::N6) {
        Some(MotorNeuron::N6)
    } else if spikes.get(NeuronId::N7) {
        Some(MotorNeuron::N7)
    } else {
        None
    };
    if let Some(m) = fired {
        next.last_motor = Some(m);
        next.speed = match m {
            MotorNeuron::N7 => mp.v1,
            MotorNeuron::N5 | MotorNeuron::N6 => mp.v2,
        };
    }

    let (x, y, heading) = reflect_move(arena, next.x, next.y, next.heading, next.speed * dt);
    next.x = x;
    next.y = y;
    next.heading = heading;
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spikes(ids: &[NeuronId]) -> SpikeVector {
        let mut s = SpikeVector::default();
        for &id in ids {
            s.set(id, true);
        }
        s
    }

    #[test]
    fn default_network_has_eight_synapses() {
        let net = Network::build(&NetworkConfig::default(), 1e-3, 40.0).unwrap();
        assert_eq!(net.synapse_count(), 8);
    }

    #[test]
    fn positive_bias_is_rejected() {
        let cfg = NetworkConfig {
            bias5: 1.0,
            ..NetworkConfig::default()
        };
        assert!(matches!(
            Network::build(&cfg, 1e-3, 40.0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn wrong_sign_synapse_is_rejected() {
        let mut cfg = NetworkConfig::default();
        for s in &mut cfg.synapses {
            if s.source == NeuronId::N3 && s.target == NeuronId::N7 {
                s.weight = 1.0;
            }
        }
        assert!(Network::build(&cfg, 1e-3, 40.0).is_err());
        let mut cfg = NetworkConfig::default();
        cfg.synapses.pop();
        assert!(Network::build(&cfg, 1e-3, 40.0).is_err());
    }

    #[test]
    fn no_spikes_moves_straight() {
        let arena = Arena::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = WormState::new([10.0, 10.0], 0.5, 0.3);
        let next = apply_motor(
            &w,
            &SpikeVector::default(),
            &MotorParams::default(),
            &mut rng,
            0.1,
            &arena,
        );
        assert_abs_diff_eq!(next.x, 10.0 + 0.03 * 0.5f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(next.y, 10.0 + 0.03 * 0.5f64.sin(), epsilon = 1e-12);
        assert_eq!(next.heading, 0.5);
        assert_eq!(next.speed, 0.3);
    }

    #[test]
    fn n5_turns_clockwise_and_slows() {
        let arena = Arena::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mp = MotorParams::default();
        let w = WormState::new([50.0, 50.0], 0.0, mp.v1);
        let next = apply_motor(&w, &spikes(&[NeuronId::N5]), &mp, &mut rng, 1e-3, &arena);
        assert_abs_diff_eq!(next.heading, -3.33f64.to_radians(), epsilon = 1e-12);
        assert_eq!(next.speed, mp.v2);
        assert_eq!(next.last_motor, Some(MotorNeuron::N5));
        let next = apply_motor(&w, &spikes(&[NeuronId::N6]), &mp, &mut rng, 1e-3, &arena);
        assert_abs_diff_eq!(next.heading, 3.33f64.to_radians(), epsilon = 1e-12);
    }

    #[test]
    fn n7_sets_exploration_speed() {
        let arena = Arena::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mp = MotorParams::default();
        let w = WormState::new([50.0, 50.0], 0.0, mp.v2);
        for _ in 0..100 {
            let next = apply_motor(&w, &spikes(&[NeuronId::N7]), &mp, &mut rng, 1e-3, &arena);
            assert_eq!(next.speed, 0.3);
            assert!(next.heading.to_degrees().abs() <= 22.5 + 1e-9);
        }
    }

    #[test]
    fn simultaneous_motor_spikes_prefer_n5() {
        let arena = Arena::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mp = MotorParams::default();
        let w = WormState::new([50.0, 50.0], 0.0, mp.v1);
        let next = apply_motor(
            &w,
            &spikes(&[NeuronId::N5, NeuronId::N6]),
            &mp,
            &mut rng,
            1e-3,
            &arena,
        );
        assert_eq!(next.last_motor, Some(MotorNeuron::N5));
        assert_abs_diff_eq!(next.heading, 0.0, epsilon = 1e-12);
        let next = apply_motor(
            &w,
            &spikes(&[NeuronId::N6, NeuronId::N7]),
            &mp,
            &mut rng,
            1e-3,
            &arena,
        );
        assert_eq!(next.last_motor, Some(MotorNeuron::N6));
        assert_eq!(next.speed, mp.v2);
    }

    #[test]
    fn walls_reflect() {
        let arena = Arena::default();
        let (x, y, h) = reflect_move(&arena, 0.1, 50.0, PI, 0.3);
        assert_abs_diff_eq!(x, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h.abs(), 0.0, epsilon = 1e-12);
        let (x, y, h) = reflect_move(&arena, 99.9, 99.9, PI / 4.0, 1.0);
        assert!(arena.contains(x, y));
        assert_abs_diff_eq!(h, -3.0 * PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn tonic_clamp_rate() {
        let clamps = Clamps::default().with(NeuronId::N1, Clamp::Tonic { rate_hz: 5.0 });
        let dt = 1e-3;
        let n = (0..10_000u64)
            .filter(|&k| clamps.apply(NeuronId::N1, false, k, dt))
            .count();
        assert_eq!(n, 50);
    }
}
