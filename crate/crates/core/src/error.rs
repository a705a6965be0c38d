use thiserror::Error;

use crate::models::ChainFamily;
use crate::operators::Axis;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid site: {0}")]
    InvalidSite(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("cannot calibrate drive: target A = {target} outside [{min:.6}, 1]")]
    Calibration { target: f64, min: f64 },

    #[error("no effective Hamiltonian for {family:?} chain under a {axis:?} drive")]
    UnsupportedTransform { family: ChainFamily, axis: Axis },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("Hamiltonian does not conserve the excitation number (commutator norm {0:.3e})")]
    NotExcitationConserving(f64),

    #[error("line {line}: `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("run `{run}`: {source}")]
    Run {
        run: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
