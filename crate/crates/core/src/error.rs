use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("invalid tricluster: {0}")]
    InvalidTricluster(String),

    #[error("value {value:?} is outside the domain of variable `{var}`")]
    DomainMismatch { var: String, value: String },

    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },

    #[error("tricluster cell (i={obs}, j={var}, k={ctx}) is missing")]
    MissingData { obs: usize, var: usize, ctx: usize },

    #[error("no non-missing support for {0}")]
    EmptySupport(String),

    #[error("unsupported assumption profile: {0}")]
    UnsupportedProfile(String),

    #[error("variable {0} is not ordinal; discretize it first")]
    NotOrdinal(usize),

    #[error("variable {0} is not real-valued")]
    NotReal(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("planting conflict after {attempts} attempts: {detail}")]
    PlantingConflict { attempts: usize, detail: String },

    #[error("search space too large: {0} candidate subspaces")]
    SearchSpaceTooLarge(u128),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            locus: locus.into(),
            message: message.into(),
        }
    }
}
