//! Crate-wide error type.

use std::fmt;
use std::io;
use std::path::PathBuf;

/// Error conditions raised by the reconstruction library.
#[derive(Debug)]
pub enum Error {
    /// Input length or shape does not match what the operation expects.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// Frequency selection contains duplicates or out-of-range indices.
    InvalidSelection(String),
    /// A size parameter (grid size, patch size) is out of range.
    InvalidSize(String),
    /// Generic invalid argument (empty sample list, non-finite values, ...).
    InvalidInput(String),
    /// Root finder was given endpoints that do not bracket a sign change.
    InvalidBracket { a: f64, b: f64, fa: f64, fb: f64 },
    /// Iterative routine hit its iteration cap; carries the best iterate seen.
    NonConvergence {
        best: f64,
        residual: f64,
        iterations: usize,
    },
    /// Normal matrix is singular or numerically near-singular.
    SingularSystem(String),
    /// Filesystem failure with the offending path.
    Io { path: PathBuf, source: io::Error },
    /// A file's contents could not be parsed.
    Parse(String),
    /// Experiment configuration failed validation.
    Config(String),
    /// A solver failure inside a sweep, tagged with the offending lambda.
    Solver { lambda: f64, source: Box<Error> },
    /// Failure wrapped with the pipeline stage it occurred in.
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                context,
                expected,
                got,
            } => write!(f, "{context}: expected length {expected}, got {got}"),
            Error::InvalidSelection(msg) => write!(f, "invalid frequency selection: {msg}"),
            Error::InvalidSize(msg) => write!(f, "invalid size: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InvalidBracket { a, b, fa, fb } => write!(
                f,
                "no sign change on bracket [{a}, {b}]: f(a) = {fa}, f(b) = {fb}"
            ),
            Error::NonConvergence {
                best,
                residual,
                iterations,
            } => write!(
                f,
                "no convergence after {iterations} iterations; best x = {best} with residual {residual}"
            ),
            Error::SingularSystem(msg) => write!(f, "singular normal system: {msg}"),
            Error::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Solver { lambda, source } => {
                write!(f, "solver failed at lambda = {lambda}: {source}")
            }
            Error::Stage { stage, source } => write!(f, "[{stage}] {source}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            Error::Solver { source, .. } | Error::Stage { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
