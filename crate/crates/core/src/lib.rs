//! Spiking chemotaxis navigator.
//!
//! A seven-neuron network steers a simulated worm toward a target
//! concentration on a 2-D plate. Two leaky integrate-and-fire sensors report
//! whether the local concentration is above or below the set-point, two
//! ASE-style neurons detect rising and falling concentration, and three
//! logic neurons turn the combination into turns and speed changes.
//!
//! Modules:
//! - [`ase`]: gradient detector dynamics (channel kinetics, adaptive
//!   thresholds, graded membrane, spiking wrapper)
//! - [`leif`]: LEIF neurons, synapse kernels, sensor currents
//! - [`network`]: wiring, per-step update, motor model
//! - [`environment`]: concentration field and sensor noise
//! - [`levy`]: truncated Lévy-walk baseline
//! - [`trial`], [`harness`]: single trials, batches, stimulus protocols
//! - [`export`], [`config`]: file formats

pub mod ase;
pub mod config;
pub mod environment;
pub mod error;
pub mod export;
pub mod harness;
pub mod leif;
pub mod levy;
pub mod network;
pub mod trial;

pub use config::Config;
pub use error::{Error, Result};
