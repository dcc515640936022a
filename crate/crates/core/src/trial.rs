//! Single closed-loop trials: sense, step the network, move, record.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{ConcentrationField, NoiseModel, DEFAULT_START};
use crate::error::{Error, Result};
use crate::leif::NeuronId;
use crate::network::{apply_motor, MotorParams, Network, NetworkConfig, WormState};

/// Half-width of the success band around the set-point (mM).
pub const LOCK_BAND: f64 = 0.5;

/// RNG stream used for motor turns.
pub(crate) const MOTOR_STREAM: u64 = 1;
/// RNG stream used for sensor noise.
pub(crate) const NOISE_STREAM: u64 = 2;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    /// Integration step (s).
    pub dt: f64,
    /// Simulated duration per trial (s).
    pub duration: f64,
    /// Trajectory sampling interval (s).
    pub record_interval: f64,
    /// Start position (mm).
    pub start: [f64; 2],
    /// Initial heading (rad); drawn uniformly per seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_heading: Option<f64>,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt: 1e-3,
            duration: 1500.0,
            record_interval: 0.1,
            start: DEFAULT_START,
            start_heading: None,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.duration >= 0.0) {
            return Err(Error::config(format!(
                "duration must be >= 0, got {}",
                self.duration
            )));
        }
        if !(self.record_interval >= self.dt) {
            return Err(Error::config(format!(
                "record_interval {} must be at least dt {}",
                self.record_interval, self.dt
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }

    fn record_every(&self) -> u64 {
        ((self.record_interval / self.dt).round() as u64).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    /// Concentration reported by the sensor (mM).
    pub c_sensed: f64,
    /// Noiseless field value at the same position (mM).
    pub c_true: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub t: f64,
    pub neuron: NeuronId,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub raster: Vec<SpikeEvent>,
}

impl Trajectory {
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spike_count(&self, id: NeuronId) -> usize {
        self.raster.iter().filter(|e| e.neuron == id).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub success: bool,
    /// First time the worm came within the lock band (s).
    pub time_to_target: Option<f64>,
    /// Mean |C - C_track| after lock, on the noiseless field (mM).
    pub post_lock_mean_deviation: Option<f64>,
    pub duration: f64,
}

impl TrialResult {
    pub fn failure(seed: u64, duration: f64) -> Self {
        TrialResult {
            seed,
            success: false,
            time_to_target: None,
            post_lock_mean_deviation: None,
            duration,
        }
    }
}

/// Incremental lock detection and post-lock deviation.
#[derive(Clone, Debug)]
pub struct LockTracker {
    c_track: f64,
    lock_time: Option<f64>,
    deviation_sum: f64,
    deviation_count: u64,
}

impl LockTracker {
    pub fn new(c_track: f64) -> Self {
        LockTracker {
            c_track,
            lock_time: None,
            deviation_sum: 0.0,
            deviation_count: 0,
        }
    }

    /// `c_lock` decides the lock, `c_true` feeds the deviation.
    pub fn observe(&mut self, t: f64, c_lock: f64, c_true: f64) {
        match self.lock_time {
            None => {
                if (c_lock - self.c_track).abs() <= LOCK_BAND {
                    self.lock_time = Some(t);
                }
            }
            Some(lock) if t > lock => {
                self.deviation_sum += (c_true - self.c_track).abs();
                self.deviation_count += 1;
            }
            Some(_) => {}
        }
    }

    pub fn lock_time(&self) -> Option<f64> {
        self.lock_time
    }

    pub fn mean_deviation(&self) -> Option<f64> {
        (self.deviation_count > 0).then(|| self.deviation_sum / self.deviation_count as f64)
    }

    pub fn finish(&self, seed: u64, duration: f64) -> TrialResult {
        match self.lock_time {
            Some(t) if t <= duration => TrialResult {
                seed,
                success: true,
                time_to_target: Some(t),
                post_lock_mean_deviation: self.mean_deviation(),
                duration,
            },
            _ => TrialResult::failure(seed, duration),
        }
    }
}

/// Lock time and mean post-lock deviation of a recorded trajectory. The lock
/// is the first sample whose sensed concentration lies within the band.
pub fn lock_and_deviation(traj: &Trajectory, c_track: f64) -> (Option<f64>, Option<f64>) {
    let mut tracker = LockTracker::new(c_track);
    for s in &traj.samples {
        tracker.observe(s.t, s.c_sensed, s.c_true);
    }
    (tracker.lock_time(), tracker.mean_deviation())
}

/// Everything a closed-loop trial needs besides the seed.
#[derive(Clone, Debug)]
pub struct TrialSetup<'a> {
    pub network: &'a NetworkConfig,
    pub motor: &'a MotorParams,
    pub field: &'a ConcentrationField,
    pub noise: &'a NoiseModel,
    pub sim: &'a SimParams,
}

impl TrialSetup<'_> {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.motor.validate()?;
        self.field.validate()?;
        self.noise.validate()?;
        self.sim.validate()
    }
}

/// Runs one seeded trial of the spiking navigator. Lock and deviation are
/// evaluated on the noiseless field at every integration step.
pub fn run_trial(setup: &TrialSetup<'_>, seed: u64) -> Result<(Trajectory, TrialResult)> {
    setup.validate()?;
    let sim = setup.sim;
    let field = setup.field;
    let c_track = setup.network.sensor.c_track;
    let mut traj = Trajectory::default();
    if sim.steps() == 0 {
        return Ok((traj, TrialResult::failure(seed, sim.duration)));
    }

    let c0 = field.concentration_at(sim.start)?;
    let mut net = Network::build(setup.network, sim.dt, c0)?;
    let mut motor_rng = stream_rng(seed, MOTOR_STREAM);
    let heading = match sim.start_heading {
        Some(h) => h,
        None => motor_rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    };
    let mut worm = WormState::new(sim.start, heading, setup.motor.v1);
    let mut noise_rng = stream_rng(seed, NOISE_STREAM);
    let mut tracker = LockTracker::new(c_track);
    let record_every = sim.record_every();

    for k in 0..sim.steps() {
        let t = k as f64 * sim.dt;
        let pos = worm.position();
        let c_true = field.concentration_at(pos)?;
        let c_sensed = setup.noise.apply(c_true, &mut noise_rng);
        tracker.observe(t, c_true, c_true);
        if k % record_every == 0 {
            traj.samples.push(TrajectorySample {
                t,
                x: worm.x,
                y: worm.y,
                heading: worm.heading,
                speed: worm.speed,
                c_sensed,
                c_true,
            });
        }

        let spikes = net.step(c_sensed)?;
        let t_spike = (k + 1) as f64 * sim.dt;
        traj.raster.extend(
            spikes
                .iter()
                .map(|neuron| SpikeEvent { t: t_spike, neuron }),
        );
        worm = apply_motor(
            &worm,
            &spikes,
            setup.motor,
            &mut motor_rng,
            sim.dt,
            &field.arena,
        );
    }
    Ok((traj, tracker.finish(seed, sim.duration)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, c: f64) -> TrajectorySample {
        TrajectorySample {
            t,
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            speed: 0.3,
            c_sensed: c,
            c_true: c,
        }
    }

    #[test]
    fn never_locked() {
        let traj = Trajectory {
            samples: (0..100).map(|k| sample(k as f64, 40.0)).collect(),
            raster: vec![],
        };
        assert_eq!(lock_and_deviation(&traj, 55.0), (None, None));
    }

    #[test]
    fn pinned_after_lock() {
        let mut samples: Vec<_> = (0..10)
            .map(|k| sample(k as f64, 50.0 + k as f64 * 0.5))
            .collect();
        samples.extend((10..50).map(|k| sample(k as f64, 55.0)));
        let traj = Trajectory {
            samples,
            raster: vec![],
        };
        let (lock, dev) = lock_and_deviation(&traj, 55.0);
        assert_eq!(lock, Some(9.0));
        assert_eq!(dev, Some(0.0));
    }

    #[test]
    fn alternating_deviation() {
        let mut samples = vec![sample(0.0, 55.0)];
        samples.extend((1..=40).map(|k| {
            let c = if k % 2 == 0 { 56.0 } else { 54.0 };
            sample(k as f64, c)
        }));
        let traj = Trajectory {
            samples,
            raster: vec![],
        };
        let (lock, dev) = lock_and_deviation(&traj, 55.0);
        assert_eq!(lock, Some(0.0));
        assert!((dev.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_duration_trial_is_empty_failure() {
        let cfg = crate::config::Config::default();
        let sim = SimParams {
            duration: 0.0,
            ..cfg.sim.clone()
        };
        let setup = TrialSetup {
            network: &cfg.network,
            motor: &cfg.motor,
            field: &cfg.field,
            noise: &cfg.noise,
            sim: &sim,
        };
        let (traj, res) = run_trial(&setup, 4).unwrap();
        assert!(traj.is_empty());
        assert!(!res.success);
        assert_eq!(res.time_to_target, None);
    }
}
