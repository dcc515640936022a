//! Static 2-D concentration field: a baseline plus Gaussian hills and
//! valleys, clipped to a fixed range, with optional bounded sensor noise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    /// Extent along x (mm).
    pub width: f64,
    /// Extent along y (mm).
    pub height: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Arena {
            width: 100.0,
            height: 100.0,
        }
    }
}

impl Arena {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }

    fn check(&self, x: f64, y: f64) -> Result<()> {
        if self.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutOfArena {
                x,
                y,
                width: self.width,
                height: self.height,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    /// Center (mm).
    pub center: [f64; 2],
    /// Peak height (mM); negative for a valley.
    pub amplitude: f64,
    /// Standard deviation (mm).
    pub width: f64,
}

impl GaussianBump {
    fn value(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        self.amplitude * (-(dx * dx + dy * dy) / (2.0 * self.width * self.width)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationField {
    pub arena: Arena,
    /// Background concentration (mM).
    pub baseline: f64,
    pub bumps: Vec<GaussianBump>,
    /// Sampled values are clipped into this range (mM).
    pub clip: [f64; 2],
}

impl Default for ConcentrationField {
    fn default() -> Self {
        default_arena()
    }
}

/// Suggested start point for the default arena (mm).
pub const DEFAULT_START: [f64; 2] = [15.0, 15.0];

/// 100 x 100 mm plate at 40 mM with one broad hill in the far corner, a
/// narrow secondary hill and a valley. The start corner sits at 40.2 mM and
/// is flat to within a few hundredths of a millimolar per millimetre.
pub fn default_arena() -> ConcentrationField {
    ConcentrationField {
        arena: Arena::default(),
        baseline: 40.0,
        bumps: vec![
            GaussianBump {
                center: [70.0, 70.0],
                amplitude: 30.0,
                width: 25.0,
            },
            GaussianBump {
                center: [85.0, 20.0],
                amplitude: 17.0,
                width: 8.0,
            },
            GaussianBump {
                center: [20.0, 80.0],
                amplitude: -20.0,
                width: 10.0,
            },
        ],
        clip: [10.0, 70.0],
    }
}

impl ConcentrationField {
    pub fn validate(&self) -> Result<()> {
        if !(self.arena.width > 0.0 && self.arena.height > 0.0) {
            return Err(Error::config("arena dimensions must be > 0"));
        }
        if !(self.clip[0] <= self.clip[1]) {
            return Err(Error::config(format!(
                "clip range [{}, {}] is empty",
                self.clip[0], self.clip[1]
            )));
        }
        if let Some(b) = self.bumps.iter().find(|b| !(b.width > 0.0)) {
            return Err(Error::config(format!(
                "bump at {:?} has non-positive width {}",
                b.center, b.width
            )));
        }
        Ok(())
    }

    /// Clipped field value, without checking the arena bounds.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let raw = self.baseline + self.bumps.iter().map(|b| b.value(x, y)).sum::<f64>();
        raw.clamp(self.clip[0], self.clip[1])
    }

    pub fn concentration_at(&self, pos: [f64; 2]) -> Result<f64> {
        self.arena.check(pos[0], pos[1])?;
        Ok(self.value(pos[0], pos[1]))
    }

    pub fn noisy_sample<R: Rng + ?Sized>(
        &self,
        pos: [f64; 2],
        noise: &NoiseModel,
        rng: &mut R,
    ) -> Result<f64> {
        let c = self.concentration_at(pos)?;
        Ok(noise.apply(c, rng))
    }

    /// Samples on a regular grid with `n` points per side, row-major in y.
    pub fn grid(&self, n: usize) -> Vec<[f64; 3]> {
        let n = n.max(2);
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            let y = self.arena.height * j as f64 / (n - 1) as f64;
            for i in 0..n {
                let x = self.arena.width * i as f64 / (n - 1) as f64;
                out.push([x, y, self.value(x, y)]);
            }
        }
        out
    }
}

/// Additive zero-mean sensor noise, uniform on `[-amplitude, amplitude]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Half-width of the noise distribution (mM).
    pub amplitude: f64,
    pub enabled: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            amplitude: 12.0,
            enabled: false,
        }
    }
}

impl NoiseModel {
    pub fn off() -> Self {
        NoiseModel {
            amplitude: 0.0,
            enabled: false,
        }
    }

    pub fn uniform(amplitude: f64) -> Self {
        NoiseModel {
            amplitude,
            enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) {
            return Err(Error::config(format!(
                "noise amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.enabled && self.amplitude > 0.0
    }

    /// Noisy reading of a true value; never negative.
    pub fn apply<R: Rng + ?Sized>(&self, c: f64, rng: &mut R) -> f64 {
        if !self.is_active() {
            return c;
        }
        let n = rng.gen_range(-self.amplitude..=self.amplitude);
        (c + n).max(0.0)
    }
}
