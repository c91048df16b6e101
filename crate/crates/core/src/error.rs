use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}: {1}")]
    InvalidDimension(usize, &'static str),

    #[error("degenerate vector (norm {0:e} < 1e-9)")]
    DegenerateVector(f64),

    #[error("vector is not unit length (norm {0})")]
    NotUnit(f64),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("state is not among the states prepared by this model")]
    NotPrepared,

    #[error("states {0} and {1} coincide up to a global phase")]
    DuplicateState(usize, usize),

    #[error("{what} too coarse: {got} < {min}")]
    TooCoarse { what: &'static str, min: usize, got: usize },

    #[error("invalid region [{0}, {1}]")]
    InvalidRegion(f64, f64),

    #[error("density invalid: {0}")]
    InvalidDensity(String),

    #[error("effect set does not span the Hermitian operators: rank {rank}, need {needed}")]
    DeficientSpan { rank: usize, needed: usize },

    #[error("operator reconstruction failed at ontic point {point}: {source}")]
    Reconstruction {
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("ill-conditioned basis in simplex")]
    IllConditioned,

    #[error("invalid linear program: {0}")]
    InvalidLp(String),

    #[error("invalid ray set: {0}")]
    InvalidRaySet(String),

    #[error("odd prime required, got {0}")]
    NotOddPrime(usize),

    #[error("operator trace must be 1, got {0}")]
    InvalidTrace(f64),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid document: {0}")]
    Document(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
