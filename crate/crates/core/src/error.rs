use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("value iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("posterior undefined: model assigns zero probability to ({s}, {a}) -> {s_next}")]
    UndefinedPosterior { s: usize, a: usize, s_next: usize },

    /// Log-likelihood or ELBO would be -inf.
    #[error("zero-probability observation ({s}, {a}) -> {s_next}: objective is -inf")]
    NegativeInfinity { s: usize, a: usize, s_next: usize },

    #[error("behavior second moment is singular along direction {direction:?} (target mass {target_mass:e})")]
    SingularCoverage { direction: Vec<f64>, target_mass: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("episode {episode}: {source}")]
    Episode { episode: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    /// Whether the failure is numerical (as opposed to bad input or configuration).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric(_)
            | Error::NotConverged { .. }
            | Error::UndefinedPosterior { .. }
            | Error::NegativeInfinity { .. }
            | Error::SingularCoverage { .. } => true,
            Error::Episode { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    pub(crate) fn in_episode(self, episode: usize) -> Self {
        Error::Episode {
            episode,
            source: Box::new(self),
        }
    }
}
