use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration diverged at step {step}")]
    IntegrationDiverged { step: usize },

    #[error("prediction diverged at step {step}")]
    PredictionDiverged { step: usize },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("no principal matrix logarithm: eigenvalue {re} + {im}i lies on the closed negative real axis")]
    NoPrincipalLogarithm { re: f64, im: f64 },

    #[error("eigenvector matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("rejection sampling gave up after {0} attempts")]
    SamplingFailed(usize),

    #[error("cannot parse expression `{input}`: {msg}")]
    Parse { input: String, msg: String },

    #[error("{}: row {row}: {msg}", path.display())]
    Csv { path: PathBuf, row: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerics (divergence, decompositions,
    /// conditioning) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::IntegrationDiverged { .. }
            | Error::PredictionDiverged { .. }
            | Error::SvdFailed
            | Error::Eigen(_)
            | Error::NoPrincipalLogarithm { .. }
            | Error::IllConditioned(_)
            | Error::Singular(_)
            | Error::SamplingFailed(_) => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
