use std::path::PathBuf;

use thiserror::Error;
use vibladder::curves::CurveError;
use vibladder::dvr::SpectrumError;
use vibladder::ga::GaError;
use vibladder::propagator::PropagationError;
use vibladder::pulse::PulseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Ga(#[from] GaError),
}
