use thiserror::Error;

/// Errors raised by the spectral pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {limit:e}")]
    NotHermitian { asymmetry: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Jacobi sweep limit reached with off-diagonal norm {off_norm:e}")]
    NoConvergence { off_norm: f64 },

    #[error("parameter {value:?} lies outside the domain box")]
    OutOfDomain { value: Vec<f64> },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("z = {re}{im:+}i is within {distance:e} of the spectrum")]
    SpectrumTooClose { re: f64, im: f64, distance: f64 },

    #[error("contour passes within {distance:e} of eigenvalue {eigenvalue}")]
    ContourHitsSpectrum { eigenvalue: f64, distance: f64 },

    #[error("projector rank is ambiguous: singular value {sigma} in [0.25, 0.75]")]
    RankAmbiguous { sigma: f64 },

    #[error("projector rank changed from {expected} to {found} at t = {t}")]
    RankChanged { expected: usize, found: usize, t: f64 },

    #[error("ambiguous crossing between t = {t_lo} and t = {t_hi}")]
    AmbiguousCrossing { t_lo: f64, t_hi: f64 },

    #[error("grid is degenerate at node {index}: nodes must be strictly ascending")]
    DegenerateGrid { index: usize },

    #[error("branch is not Lipschitz: quotient grows from {coarse} to {fine} under refinement")]
    NotLipschitz { coarse: f64, fine: f64 },

    #[error("malformed family spec: field `{field}`: {reason}")]
    BadSpec { field: String, reason: String },
}

pub type Result<T> = std::result::Result<T, SpectraError>;

impl SpectraError {
    /// Whether the error comes from malformed input rather than from a
    /// numerical check that failed.
    pub fn is_bad_input(&self) -> bool {
        matches!(
            self,
            SpectraError::NotSquare { .. }
                | SpectraError::EmptyMatrix
                | SpectraError::NonFinite { .. }
                | SpectraError::NotHermitian { .. }
                | SpectraError::DimensionMismatch { .. }
                | SpectraError::OutOfDomain { .. }
                | SpectraError::InvalidArgument { .. }
                | SpectraError::DegenerateGrid { .. }
                | SpectraError::BadSpec { .. }
        )
    }
}
