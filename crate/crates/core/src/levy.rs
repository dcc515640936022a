//! Memoryless truncated Lévy-walk forager used as a search baseline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::ConcentrationField;
use crate::error::{Error, Result};
use crate::network::reflect_move;
use crate::trial::{stream_rng, LockTracker, TrialResult, MOTOR_STREAM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyParams {
    /// Shortest (and most probable) flight (mm).
    pub s_min: f64,
    /// Longest flight (mm).
    pub s_max: f64,
    /// Walking speed (mm/s).
    pub speed: f64,
}

impl Default for LevyParams {
    fn default() -> Self {
        LevyParams {
            s_min: 0.2649,
            s_max: 40.0,
            speed: 0.3,
        }
    }
}

impl LevyParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.s_min && self.s_min < self.s_max) {
            return Err(Error::config(format!(
                "Lévy lengths must satisfy 0 < s_min < s_max, got {} / {}",
                self.s_min, self.s_max
            )));
        }
        if !(self.speed > 0.0) {
            return Err(Error::config(format!(
                "Lévy speed must be > 0, got {}",
                self.speed
            )));
        }
        Ok(())
    }

    /// CDF of the truncated `l^-2` law.
    pub fn cdf(&self, l: f64) -> f64 {
        if l <= self.s_min {
            0.0
        } else if l >= self.s_max {
            1.0
        } else {
            (1.0 / self.s_min - 1.0 / l) / (1.0 / self.s_min - 1.0 / self.s_max)
        }
    }
}

/// Inverse-CDF draw from the truncated `l^-2` law; `u` in [0, 1].
pub fn sample_flight_length(u: f64, p: &LevyParams) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let inv_min = 1.0 / p.s_min;
    let inv_max = 1.0 / p.s_max;
    // Pin the endpoints so they come back exactly.
    if u == 0.0 {
        p.s_min
    } else if u == 1.0 {
        p.s_max
    } else {
        1.0 / (inv_min - u * (inv_min - inv_max))
    }
}

/// One seeded Lévy-walk trial. The walker picks a uniform heading and a
/// flight length, walks it at constant speed (reflecting off walls without
/// shortening the flight), and checks the success band at every step.
pub fn run_levy_trial(
    field: &ConcentrationField,
    start: [f64; 2],
    c_track: f64,
    duration: f64,
    dt: f64,
    p: &LevyParams,
    seed: u64,
) -> Result<TrialResult> {
    p.validate()?;
    if !(dt > 0.0) {
        return Err(Error::config(format!("dt must be > 0, got {dt}")));
    }
    let steps = (duration / dt).round() as u64;
    if steps == 0 {
        return Ok(TrialResult::failure(seed, duration));
    }
    let mut rng = stream_rng(seed, MOTOR_STREAM);
    let mut tracker = LockTracker::new(c_track);
    let [mut x, mut y] = start;
    let mut heading = 0.0;
    let mut remaining = 0.0;
    let step_len = p.speed * dt;

    for k in 0..steps {
        let t = k as f64 * dt;
        let c = field.concentration_at([x, y])?;
        tracker.observe(t, c, c);
        if remaining <= 0.0 {
            heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            remaining = sample_flight_length(rng.gen::<f64>(), p);
        }
        let d = step_len.min(remaining);
        (x, y, heading) = reflect_move(&field.arena, x, y, heading, d);
        remaining -= d;
    }
    Ok(tracker.finish(seed, duration))
}
