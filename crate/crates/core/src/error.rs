use thiserror::Error;

/// Errors for observable construction, measure evaluation and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("degenerate spectrum: smallest eigenvalue gap {0:.3e} is below 1e-9")]
    DegenerateSpectrum(f64),

    #[error("Bloch vector is not unit length (norm {0})")]
    NonUnitBloch(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("dimension {0} is not prime")]
    NonPrimeDimension(usize),

    #[error("requested {requested} bases but dimension {dim} admits at most {max}")]
    TooManyBases {
        requested: usize,
        dim: usize,
        max: usize,
    },

    #[error("invalid commuting-subspace dimension {d_c} for total dimension {d}")]
    InvalidSubspaceDim { d: usize, d_c: usize },

    #[error("entropy order must be positive, got {0}")]
    InvalidOrder(f64),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("POVM ascent diverged: completeness residual {0:.3e}")]
    AscentDiverged(f64),

    #[error("SDP solver stalled after {0} barrier iterations")]
    SolverStalled(usize),

    #[error("no reconstruction state for outcome {0}")]
    MissingReconstruction(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
