//! Error type shared across the crate.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// The CLI maps these onto its exit-status taxonomy, so variants are grouped
/// by *kind of fault* (caller mistake, data defect, numeric breakdown)
/// rather than by module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A dataset schema referenced a column that does not exist, or is
    /// internally inconsistent (duplicate columns, label == protected, ...).
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell failed to parse. `row` is the 1-based data row (header
    /// excluded).
    #[error("parse error at data row {row}: {message}")]
    Parse { row: usize, message: String },

    /// An input file contained no usable rows.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A caller-supplied argument was out of range or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The data cannot support the requested construction (e.g. a label
    /// class is entirely absent when building equalized-odds constraints).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A numeric input or intermediate value was NaN/infinite.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The requested operation does not apply to this input shape (e.g.
    /// grid search with a non-binary protected attribute).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A model artifact or constraint file failed to parse or validate.
    #[error("artifact error: {0}")]
    Artifact(String),

    /// A learner call inside the solver failed; carries the iteration.
    #[error("learner failed at solver iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable one-word category used in machine-parseable CLI output.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Schema(_) | Error::Argument(_) => "usage",
            Error::NotApplicable(_) => "not-applicable",
            Error::Parse { .. }
            | Error::EmptyInput(_)
            | Error::DegenerateData(_)
            | Error::Artifact(_)
            | Error::Io(_) => "parse",
            Error::Numeric(_) | Error::Solver { .. } => "numeric",
        }
    }
}
