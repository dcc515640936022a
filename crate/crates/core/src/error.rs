use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A channel fraction left the guard band around [0, 1]; the step size is
    /// too large for the current transition rates.
    #[error("unstable channel integration: {what} = {value:e} (dt = {dt} s, rate = {rate} 1/s)")]
    Instability {
        what: &'static str,
        value: f64,
        dt: f64,
        rate: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("position ({x:.4}, {y:.4}) mm lies outside the {width} x {height} mm arena")]
    OutOfArena {
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },

    #[error("trial {index} (seed {seed}) failed: {source}")]
    Trial {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
