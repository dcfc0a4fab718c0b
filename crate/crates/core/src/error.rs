use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Vacuum wavelength outside the medium's transparency window.
    #[error("wavelength {lambda_m:.4e} m outside transparency window of medium '{medium}'")]
    OutOfWindow { medium: String, lambda_m: f64 },

    /// sin^2(theta_ext) >= n^2: total-reflection / evanescent regime.
    #[error("evanescent propagation in medium '{medium}' (n = {n}, external angle {theta_ext_rad} rad)")]
    Evanescent {
        medium: String,
        n: f64,
        theta_ext_rad: f64,
    },

    /// A quantity left its mathematical domain (division by zero wave vector etc.).
    #[error("domain error: {0}")]
    Domain(String),

    /// (1 + V) turned negative: the first-order surface treatment is not trustworthy.
    #[error("perturbative validity breakdown: 1 + V = {factor} < 0 for the {field} field")]
    PerturbativeBreakdown { field: String, factor: f64 },

    /// Two kernels or maps were combined across different grids.
    #[error("frequency-grid mismatch: {0}")]
    GridMismatch(String),

    /// A structure or grid description violated its invariants.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// Degenerate collinear interaction is already phase matched; no poling period exists.
    #[error("interaction already phase matched (delta k = 0); poling not needed")]
    AlreadyPhaseMatched,

    /// Media fixture could not be read or parsed.
    #[error("media fixture error: {0}")]
    MediaFixture(String),

    /// A named medium is not present in the loaded fixture set.
    #[error("unknown medium '{0}'")]
    UnknownMedium(String),
}

pub type Result<T> = std::result::Result<T, Error>;
