//! Structured TOML configuration shared by every subsystem.
//!
//! Units: times in seconds, potentials in mV, concentrations in mM, lengths
//! in mm, speeds in mm/s, angles in degrees (motor) or radians (headings),
//! rates in 1/s (or 1/(s mM) for concentration-proportional rates).
//! Any section left out of a file takes its built-in default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environment::{ConcentrationField, NoiseModel};
use crate::error::{Error, Result};
use crate::levy::LevyParams;
use crate::network::{MotorParams, NetworkConfig};
use crate::trial::{SimParams, TrialSetup};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub sim: SimParams,
    pub network: NetworkConfig,
    pub motor: MotorParams,
    pub field: ConcentrationField,
    pub noise: NoiseModel,
    pub levy: LevyParams,
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidConfig(message) => Error::Format {
                path: path.to_owned(),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.setup().validate()?;
        self.levy.validate()?;
        self.field.concentration_at(self.sim.start)?;
        Ok(())
    }

    pub fn setup(&self) -> TrialSetup<'_> {
        TrialSetup {
            network: &self.network,
            motor: &self.motor,
            field: &self.field,
            noise: &self.noise,
            sim: &self.sim,
        }
    }
}
