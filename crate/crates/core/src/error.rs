use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("degenerate graph: node {node} has zero degree")]
    DegenerateGraph { node: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix columns are not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("empty interval [{a}, {b}]")]
    EmptyInterval { a: f64, b: f64 },

    #[error("problem too large: N = {n} exceeds the limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("singular relative-error equation: eigenvalues {i} and {j} sum to {sum:e}")]
    SingularEquation { i: usize, j: usize, sum: f64 },

    #[error("no permutation admits a valid relative error matrix")]
    NoValidErrorMatrix,

    #[error("missing forward cache")]
    MissingCache,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("movie {movie_id} has {raters} raters, at least {required} required")]
    TooFewRaters {
        movie_id: u32,
        raters: usize,
        required: usize,
    },

    #[error("unknown movie id {0}")]
    UnknownMovie(u32),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid value: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
