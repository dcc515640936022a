//! Batch experiments, aggregate statistics and the stimulus protocols used to
//! characterize the gradient detectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ase::{AseParams, AseState, Side};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::levy::run_levy_trial;
use crate::trial::{run_trial, TrialResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialKind {
    Snn,
    Levy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub n_trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean time to target over successful trials (s).
    pub mean_time_to_target: Option<f64>,
    /// Mean of the per-trial post-lock deviations (mM).
    pub mean_deviation: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl BatchStats {
    pub fn from_results(results: &[TrialResult]) -> Self {
        let successes = results.iter().filter(|r| r.success).count();
        BatchStats {
            n_trials: results.len(),
            successes,
            success_rate: if results.is_empty() {
                0.0
            } else {
                successes as f64 / results.len() as f64
            },
            mean_time_to_target: mean(results.iter().filter_map(|r| r.time_to_target)),
            mean_deviation: mean(results.iter().filter_map(|r| r.post_lock_mean_deviation)),
        }
    }

    /// Fraction of all trials that reached the target within `cutoff` seconds.
    pub fn fraction_under(results: &[TrialResult], cutoff: f64) -> f64 {
        if results.is_empty() {
            return 0.0;
        }
        let n = results
            .iter()
            .filter(|r| r.time_to_target.is_some_and(|t| t <= cutoff))
            .count();
        n as f64 / results.len() as f64
    }
}

/// Per-trial records plus their aggregate and the configuration that
/// produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub kind: TrialKind,
    pub base_seed: u64,
    pub stats: BatchStats,
    pub trials: Vec<TrialResult>,
    pub config: Config,
}

impl BatchReport {
    pub fn fraction_under(&self, cutoff: f64) -> f64 {
        BatchStats::fraction_under(&self.trials, cutoff)
    }
}

pub fn run_single(kind: TrialKind, cfg: &Config, seed: u64) -> Result<TrialResult> {
    match kind {
        TrialKind::Snn => run_trial(&cfg.setup(), seed).map(|(_, r)| r),
        TrialKind::Levy => run_levy_trial(
            &cfg.field,
            cfg.sim.start,
            cfg.network.sensor.c_track,
            cfg.sim.duration,
            cfg.sim.dt,
            &cfg.levy,
            seed,
        ),
    }
}

/// Runs trials with seeds `base_seed .. base_seed + n`, in parallel.
pub fn run_batch(kind: TrialKind, n: usize, base_seed: u64, cfg: &Config) -> Result<BatchReport> {
    if n == 0 {
        return Err(Error::config("a batch needs at least one trial"));
    }
    cfg.validate()?;
    let trials = (0..n)
        .into_par_iter()
        .map(|index| {
            let seed = base_seed + index as u64;
            run_single(kind, cfg, seed).map_err(|e| Error::Trial {
                index,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BatchReport {
        kind,
        base_seed,
        stats: BatchStats::from_results(&trials),
        trials,
        config: cfg.clone(),
    })
}

/// Constant-gradient stimulus used to measure steady detector firing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampProtocol {
    /// Concentration the detector is adapted to, and where rising ramps
    /// start and falling ramps end (mM).
    pub baseline: f64,
    /// Time allowed for the response to settle (s).
    pub settle: f64,
    /// Window over which spikes are counted (s).
    pub measure: f64,
    pub dt: f64,
}

impl Default for RampProtocol {
    fn default() -> Self {
        RampProtocol {
            baseline: 40.0,
            settle: 30.0,
            measure: 20.0,
            dt: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqPoint {
    pub side: Side,
    /// |dC/dt| (mM/s).
    pub gradient: f64,
    pub v_t: f64,
    pub rate_hz: f64,
}

/// Steady spike rate of one detector under a constant ramp of magnitude
/// `gradient`, rising for the left side and falling for the right side.
pub fn ramp_rate(side: Side, gradient: f64, p: &AseParams, proto: &RampProtocol) -> Result<f64> {
    let total = proto.settle + proto.measure;
    let (c_start, slope) = match side {
        Side::Left => (proto.baseline, gradient),
        Side::Right => (proto.baseline + gradient * total, -gradient),
    };
    let mut state = AseState::adapted(side, c_start, p);
    let steps = (total / proto.dt).round() as u64;
    let settle_steps = (proto.settle / proto.dt).round() as u64;
    let mut spikes = 0u64;
    for k in 0..steps {
        let c = c_start + slope * (k as f64 * proto.dt);
        if state.step(c, p, proto.dt)?.spiked && k >= settle_steps {
            spikes += 1;
        }
    }
    Ok(spikes as f64 / proto.measure)
}

/// Spike-rate table over every (side, V_T, gradient) combination.
pub fn freq_curve(
    params_left: &AseParams,
    params_right: &AseParams,
    gradients: &[f64],
    v_ts: &[f64],
    proto: &RampProtocol,
) -> Result<Vec<FreqPoint>> {
    let mut jobs = Vec::new();
    for (side, base) in [(Side::Left, params_left), (Side::Right, params_right)] {
        for &v_t in v_ts {
            for &gradient in gradients {
                if !(gradient >= 0.0) {
                    return Err(Error::config(format!(
                        "gradients must be >= 0, got {gradient}"
                    )));
                }
                let p = AseParams {
                    v_t,
                    ..base.clone()
                };
                p.validate()?;
                jobs.push((side, gradient, p));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(side, gradient, p)| {
            Ok(FreqPoint {
                side,
                gradient,
                v_t: p.v_t,
                rate_hz: ramp_rate(side, gradient, &p, proto)?,
            })
        })
        .collect()
}

/// Internal state of one neuron at a recorded instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AseSnapshot {
    pub u_d: f64,
    pub b_d: f64,
    pub i_d: f64,
    pub u_h: f64,
    pub b_h: f64,
    pub threshold: f64,
    pub v: f64,
}

impl From<&AseState> for AseSnapshot {
    fn from(s: &AseState) -> Self {
        AseSnapshot {
            u_d: s.depol.unbound,
            b_d: s.depol.bound,
            i_d: s.depol.inactive,
            u_h: s.hyper.unbound,
            b_h: s.hyper.bound,
            threshold: s.threshold,
            v: s.v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResponseRow {
    pub t: f64,
    pub c: f64,
    pub left: AseSnapshot,
    pub right: AseSnapshot,
}

/// Piecewise-constant concentration schedule: `(start time, value)` pairs
/// sorted by time; the first entry applies from t = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub segments: Vec<(f64, f64)>,
    pub duration: f64,
}

impl Schedule {
    pub fn step(baseline: f64, step_at: f64, level: f64, duration: f64) -> Self {
        Schedule {
            segments: vec![(0.0, baseline), (step_at, level)],
            duration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.segments.first() {
            Some(&(t0, _)) if t0 == 0.0 => {}
            _ => return Err(Error::config("schedule must start with a segment at t = 0")),
        }
        if self.segments.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::config("schedule times must be strictly increasing"));
        }
        if !(self.duration >= 0.0) {
            return Err(Error::config("schedule duration must be >= 0"));
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|&(start, _)| start <= t);
        self.segments[idx.saturating_sub(1)].1
    }
}

/// Graded (non-spiking) response of both neurons to a concentration
/// schedule, starting adapted to the first level. One row per
/// `record_every` steps.
pub fn step_response(
    params_left: &AseParams,
    params_right: &AseParams,
    schedule: &Schedule,
    dt: f64,
    record_every: usize,
) -> Result<Vec<StepResponseRow>> {
    schedule.validate()?;
    if !(dt > 0.0) {
        return Err(Error::config(format!("dt must be > 0, got {dt}")));
    }
    let record_every = record_every.max(1) as u64;
    let c0 = schedule.value_at(0.0);
    let mut left = AseState::adapted(Side::Left, c0, params_left);
    let mut right = AseState::adapted(Side::Right, c0, params_right);
    let steps = (schedule.duration / dt).round() as u64;
    let mut rows = Vec::with_capacity((steps / record_every + 1) as usize);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let c = schedule.value_at(t);
        if k % record_every == 0 {
            rows.push(StepResponseRow {
                t,
                c,
                left: (&left).into(),
                right: (&right).into(),
            });
        }
        if k < steps {
            left.step_graded(c, params_left, dt)?;
            right.step_graded(c, params_right, dt)?;
        }
    }
    Ok(rows)
}

/// Largest |V - V0| over the rows, for one side.
pub fn peak_deviation(rows: &[StepResponseRow], side: Side, v0: f64) -> f64 {
    rows.iter()
        .map(|r| match side {
            Side::Left => r.left.v,
            Side::Right => r.right.v,
        })
        .map(|v| (v - v0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(seed: u64, t: Option<f64>, dev: Option<f64>) -> TrialResult {
        TrialResult {
            seed,
            success: t.is_some(),
            time_to_target: t,
            post_lock_mean_deviation: dev,
            duration: 1500.0,
        }
    }

    #[test]
    fn stats_from_records() {
        let rs = vec![
            result(0, Some(100.0), Some(0.5)),
            result(1, None, None),
            result(2, Some(600.0), Some(1.5)),
            result(3, Some(300.0), None),
        ];
        let s = BatchStats::from_results(&rs);
        assert_eq!(s.n_trials, 4);
        assert_eq!(s.successes, 3);
        assert_eq!(s.success_rate, 0.75);
        assert_eq!(s.mean_deviation, Some(1.0));
        assert_eq!(s.mean_time_to_target, Some(1000.0 / 3.0));
        assert_eq!(BatchStats::fraction_under(&rs, 530.0), 0.5);
    }

    #[test]
    fn single_trial_batch_matches_trial() {
        let mut cfg = Config::default();
        cfg.sim.duration = 30.0;
        let report = run_batch(TrialKind::Levy, 1, 42, &cfg).unwrap();
        let single = run_single(TrialKind::Levy, &cfg, 42).unwrap();
        assert_eq!(report.trials, vec![single.clone()]);
        assert_eq!(report.stats, BatchStats::from_results(&[single]));
    }

    #[test]
    fn empty_batch_rejected() {
        assert!(run_batch(TrialKind::Snn, 0, 0, &Config::default()).is_err());
    }

    #[test]
    fn zero_gradient_gives_zero_rate() {
        let p = AseParams::default();
        let proto = RampProtocol {
            settle: 5.0,
            measure: 5.0,
            ..RampProtocol::default()
        };
        let pts = freq_curve(&p, &p, &[0.0], &[p.v_t, p.v_t - 2.0], &proto).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().all(|pt| pt.rate_hz == 0.0));
    }

    #[test]
    fn constant_schedule_stays_at_rest() {
        let p = AseParams::default();
        let sched = Schedule {
            segments: vec![(0.0, 40.0)],
            duration: 20.0,
        };
        let rows = step_response(&p, &p, &sched, 1e-3, 100).unwrap();
        assert_eq!(rows.len(), 201);
        // The left threshold hovers a few uM below C, leaving a
        // residual drive of a few microvolts.
        for r in &rows {
            assert!((r.left.v - p.v0).abs() < 0.01, "{r:?}");
            assert!((r.left.threshold - 40.0).abs() < 0.01, "{r:?}");
            assert_eq!(r.right.v, p.v0, "{r:?}");
        }
    }

    #[test]
    fn schedule_lookup() {
        let s = Schedule::step(40.0, 10.0, 50.0, 30.0);
        assert_eq!(s.value_at(0.0), 40.0);
        assert_eq!(s.value_at(9.999), 40.0);
        assert_eq!(s.value_at(10.0), 50.0);
        assert!(Schedule {
            segments: vec![(1.0, 40.0)],
            duration: 5.0
        }
        .validate()
        .is_err());
    }
}
