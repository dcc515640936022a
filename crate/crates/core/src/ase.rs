//! ASE-style gradient detector neurons.
//!
//! Each neuron carries a graded membrane potential driven by two channel
//! populations:
//!
//! ```text
//! tau_m dV/dt = (V0 - V) + k_d (Vd - V) + k_h (Vh - V)
//! k_{d,h}     = k_m * b_{d,h}^2
//! ```
//!
//! Depolarizing channels cycle unbound -> bound -> inactive -> unbound, with
//! the binding rate set by how far the sensed concentration has moved past an
//! adaptive threshold. Hyperpolarizing channels (right neuron only) are a
//! two-state population gated by a fixed concentration level.
//!
//! The left neuron responds to rising concentration, the right neuron to
//! falling concentration. Adding a threshold/reset rule on `V` turns either
//! one into a spiking gradient detector whose rate encodes `|dC/dt|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractions are allowed to drift this far outside [0, 1] before a step is
/// reported as unstable.
pub const GUARD_BAND: f64 = 1e-6;

/// Step function with `H(0) = 0`.
#[inline]
pub fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Sign function with `sgn(0) = 0`.
#[inline]
pub fn signum(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Responds to concentration up-steps.
    Left,
    /// Responds to concentration down-steps.
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AseParams {
    /// Membrane time constant (s).
    pub tau_m: f64,
    /// Resting potential (mV).
    pub v0: f64,
    /// Depolarizing reversal potential (mV).
    pub vd: f64,
    /// Hyperpolarizing reversal potential (mV).
    pub vh: f64,
    /// Conductance scale, dimensionless.
    pub k_m: f64,
    /// Bound -> unbound rate of depolarizing channels (1/s).
    pub beta_d: f64,
    /// Bound -> inactive rate (1/s).
    pub gamma_d: f64,
    /// Inactive -> unbound rate (1/s).
    pub delta_d: f64,
    /// Bound -> unbound rate of hyperpolarizing channels (1/s).
    pub beta_h: f64,
    /// Binding rate per mM above the left threshold (1/(s mM)).
    pub alpha_l0_d: f64,
    /// Binding rate per mM below the right threshold (1/(s mM)).
    pub alpha_r0_d: f64,
    /// Hyperpolarizing binding rate when active (1/s).
    pub alpha_0_h: f64,
    /// Left threshold adaptation time constant (s).
    pub tau_l: f64,
    /// Right threshold adaptation time constant (s).
    pub tau_r: f64,
    /// Floor on the right threshold (mM).
    pub c_r_min: f64,
    /// Concentration above which hyperpolarizing channels bind (mM).
    pub eta_r: f64,
    /// Spike threshold (mV).
    pub v_t: f64,
    /// Potential reported on a spike step (mV).
    pub v_max: f64,
}

impl Default for AseParams {
    fn default() -> Self {
        AseParams {
            tau_m: 0.2,
            v0: -70.0,
            vd: 50.0,
            vh: -90.0,
            k_m: 4.0,
            beta_d: 1.0,
            gamma_d: 0.2,
            delta_d: 0.05,
            beta_h: 0.5,
            alpha_l0_d: 1.0,
            alpha_r0_d: 1.0,
            alpha_0_h: 0.5,
            tau_l: 10.0,
            tau_r: 10.0,
            c_r_min: 1.0,
            eta_r: 60.0,
            v_t: -64.0,
            v_max: 30.0,
        }
    }
}

impl AseParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau_m", self.tau_m),
            ("tau_l", self.tau_l),
            ("tau_r", self.tau_r),
            ("c_r_min", self.c_r_min),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("ASE {name} must be > 0, got {v}")));
            }
        }
        let rates = [
            ("k_m", self.k_m),
            ("beta_d", self.beta_d),
            ("gamma_d", self.gamma_d),
            ("delta_d", self.delta_d),
            ("beta_h", self.beta_h),
            ("alpha_l0_d", self.alpha_l0_d),
            ("alpha_r0_d", self.alpha_r0_d),
            ("alpha_0_h", self.alpha_0_h),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(format!("ASE {name} must be >= 0, got {v}")));
            }
        }
        if !(self.v0 < self.v_t && self.v_t < self.v_max) {
            return Err(Error::config(format!(
                "ASE potentials must satisfy v0 < v_t < v_max, got {} / {} / {}",
                self.v0, self.v_t, self.v_max
            )));
        }
        Ok(())
    }

    fn alpha_scale(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.alpha_l0_d,
            Side::Right => self.alpha_r0_d,
        }
    }
}

/// Depolarizing channel population: unbound, bound (conducting), inactive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepolChannels {
    pub unbound: f64,
    pub bound: f64,
    pub inactive: f64,
}

impl Default for DepolChannels {
    fn default() -> Self {
        DepolChannels {
            unbound: 1.0,
            bound: 0.0,
            inactive: 0.0,
        }
    }
}

impl DepolChannels {
    pub fn total(&self) -> f64 {
        self.unbound + self.bound + self.inactive
    }

    /// One explicit Euler step of the three-state transition system.
    pub fn step(self, alpha: f64, p: &AseParams, dt: f64) -> Result<Self> {
        let Self {
            unbound: u,
            bound: b,
            inactive: i,
        } = self;
        let to_bound = alpha * u;
        let unbinding = p.beta_d * b;
        let inactivation = p.gamma_d * b;
        let recovery = p.delta_d * i;
        let next = DepolChannels {
            unbound: u + dt * (unbinding + recovery - to_bound),
            bound: b + dt * (to_bound - unbinding - inactivation),
            inactive: i + dt * (inactivation - recovery),
        };
        check_fraction("depolarizing unbound", next.unbound, dt, alpha)?;
        check_fraction("depolarizing bound", next.bound, dt, alpha)?;
        check_fraction("depolarizing inactive", next.inactive, dt, alpha)?;
        Ok(next)
    }
}

/// Hyperpolarizing channel population: unbound, bound (conducting).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperChannels {
    pub unbound: f64,
    pub bound: f64,
}

impl Default for HyperChannels {
    fn default() -> Self {
        HyperChannels {
            unbound: 1.0,
            bound: 0.0,
        }
    }
}

impl HyperChannels {
    pub fn total(&self) -> f64 {
        self.unbound + self.bound
    }

    /// One explicit Euler step of the two-state transition system.
    pub fn step(self, alpha: f64, p: &AseParams, dt: f64) -> Result<Self> {
        let flux = alpha * self.unbound - p.beta_h * self.bound;
        let next = HyperChannels {
            unbound: self.unbound - dt * flux,
            bound: self.bound + dt * flux,
        };
        check_fraction("hyperpolarizing unbound", next.unbound, dt, alpha)?;
        check_fraction("hyperpolarizing bound", next.bound, dt, alpha)?;
        Ok(next)
    }
}

fn check_fraction(what: &'static str, value: f64, dt: f64, rate: f64) -> Result<()> {
    if value.is_finite() && (-GUARD_BAND..=1.0 + GUARD_BAND).contains(&value) {
        Ok(())
    } else {
        Err(Error::Instability {
            what,
            value,
            dt,
            rate,
        })
    }
}

/// Depolarizing binding rate. The left neuron binds when `c` exceeds its
/// threshold, the right neuron when `c` drops below it; both rates are
/// non-negative.
pub fn alpha_depol(c: f64, threshold: f64, side: Side, scale: f64) -> f64 {
    match side {
        Side::Left => scale * (c - threshold) * heaviside(c - threshold),
        Side::Right => scale * (threshold - c) * heaviside(threshold - c),
    }
}

/// Hyperpolarizing binding rate, switched on above `eta_r`.
pub fn alpha_hyper(c: f64, eta_r: f64, alpha_0_h: f64) -> f64 {
    alpha_0_h * heaviside(c - eta_r)
}

#[inline]
pub fn channel_conductance(bound: f64, k_m: f64) -> f64 {
    k_m * bound * bound
}

/// Time derivative of the adaptive threshold (mM/s).
pub fn threshold_rate(side: Side, threshold: f64, c: f64, p: &AseParams) -> f64 {
    match side {
        Side::Left => (c * heaviside(c - threshold) - threshold) / p.tau_l,
        Side::Right => (c * heaviside(threshold - c) - signum(threshold - c) * threshold) / p.tau_r,
    }
}

/// Euler step of the threshold; the right threshold is floored at `c_r_min`
/// after every step.
pub fn adapt_threshold(side: Side, threshold: f64, c: f64, p: &AseParams, dt: f64) -> f64 {
    let next = threshold + dt * threshold_rate(side, threshold, c, p);
    match side {
        Side::Left => next,
        Side::Right => next.max(p.c_r_min),
    }
}

/// Resting-plus-channel drive fixed point for constant conductances.
pub fn membrane_fixed_point(k_d: f64, k_h: f64, p: &AseParams) -> f64 {
    (p.v0 + k_d * p.vd + k_h * p.vh) / (1.0 + k_d + k_h)
}

pub fn step_membrane(v: f64, k_d: f64, k_h: f64, p: &AseParams, dt: f64) -> f64 {
    let drive = (p.v0 - v) + k_d * (p.vd - v) + k_h * (p.vh - v);
    v + dt * drive / p.tau_m
}

/// Potential reported by one step, and whether it was a spike.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AseOutput {
    pub potential: f64,
    pub spiked: bool,
}

/// Full state of one ASE neuron.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AseState {
    pub side: Side,
    pub v: f64,
    pub depol: DepolChannels,
    /// Stays at its unbound default for the left neuron.
    pub hyper: HyperChannels,
    pub threshold: f64,
}

impl AseState {
    /// Resting state fully adapted to a constant concentration `c`.
    pub fn adapted(side: Side, c: f64, p: &AseParams) -> Self {
        let threshold = match side {
            Side::Left => c,
            Side::Right => c.max(p.c_r_min),
        };
        let mut state = AseState {
            side,
            v: p.v0,
            depol: DepolChannels::default(),
            hyper: HyperChannels::default(),
            threshold,
        };
        if side == Side::Right {
            let a = alpha_hyper(c, p.eta_r, p.alpha_0_h);
            if a + p.beta_h > 0.0 {
                let bound = a / (a + p.beta_h);
                state.hyper = HyperChannels {
                    unbound: 1.0 - bound,
                    bound,
                };
            }
            let k_h = channel_conductance(state.hyper.bound, p.k_m);
            state.v = membrane_fixed_point(0.0, k_h, p);
        }
        state
    }

    /// Current depolarizing binding rate.
    pub fn alpha_d(&self, c: f64, p: &AseParams) -> f64 {
        alpha_depol(c, self.threshold, self.side, p.alpha_scale(self.side))
    }

    /// Graded (non-spiking) update: all derivatives are evaluated on the
    /// pre-step state.
    pub fn step_graded(&mut self, c: f64, p: &AseParams, dt: f64) -> Result<f64> {
        let alpha_d = self.alpha_d(c, p);
        let k_d = channel_conductance(self.depol.bound, p.k_m);
        let (k_h, next_hyper) = match self.side {
            Side::Left => (0.0, self.hyper),
            Side::Right => {
                let alpha_h = alpha_hyper(c, p.eta_r, p.alpha_0_h);
                (
                    channel_conductance(self.hyper.bound, p.k_m),
                    self.hyper.step(alpha_h, p, dt)?,
                )
            }
        };
        let next_depol = self.depol.step(alpha_d, p, dt)?;
        self.v = step_membrane(self.v, k_d, k_h, p, dt);
        self.threshold = adapt_threshold(self.side, self.threshold, c, p, dt);
        self.depol = next_depol;
        self.hyper = next_hyper;
        Ok(self.v)
    }

    /// Spiking update: a crossing of `v_t` is reported as `v_max` and the
    /// stored potential restarts from `v0` on the next step. Channel and
    /// threshold states are not reset.
    pub fn step(&mut self, c: f64, p: &AseParams, dt: f64) -> Result<AseOutput> {
        let v = self.step_graded(c, p, dt)?;
        if v >= p.v_t {
            self.v = p.v0;
            Ok(AseOutput {
                potential: p.v_max,
                spiked: true,
            })
        } else {
            Ok(AseOutput {
                potential: v,
                spiked: false,
            })
        }
    }
}
