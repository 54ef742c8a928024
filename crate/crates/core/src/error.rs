//! Error types shared across the library.

use std::fmt;

/// Everything that can go wrong while building laws, integrating, or
/// post-processing a run.
#[derive(Debug)]
pub enum Error {
    /// A scalar argument is out of its documented range (non-finite,
    /// wrong sign, ...).
    InvalidParameter(String),
    /// The adiabatic window (gamma_lo, gamma_hi) violates the admissibility
    /// inequalities, so no exponent pair (alpha_lo, alpha_hi) exists.
    WindowInadmissible { gamma_lo: f64, gamma_hi: f64 },
    /// The chosen exponents fall outside the admissible intervals or give
    /// nonpositive derived exponents (eta, sigma).
    InadmissibleAlpha(String),
    /// A density argument or cell is zero or negative.
    VacuumInput { rho: f64, cell: Option<usize> },
    /// A pressure argument is zero or negative.
    InvalidPressure(f64),
    /// Initial data violates positivity or finiteness.
    InvalidInitialData(String),
    /// A numerical routine failed to reach its accuracy budget.
    NumericFailure(String),
    /// The time integration produced NaN/Inf or hit the density floor.
    SimulationDiverged { t: f64, cell: usize, field: &'static str },
    /// A convergence study did not behave as required.
    VerificationFailure(String),
    /// Post-processing input is malformed (mismatched grids, bad series, ...).
    InvalidInput(String),
    /// Config file syntax or schema error, with the offending line.
    Parse { line: usize, msg: String },
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid-parameter: {msg}"),
            Error::WindowInadmissible { gamma_lo, gamma_hi } => write!(
                f,
                "window-inadmissible: gamma window ({gamma_lo}, {gamma_hi}) violates the \
                 admissibility inequalities"
            ),
            Error::InadmissibleAlpha(msg) => write!(f, "inadmissible-alpha: {msg}"),
            Error::VacuumInput { rho, cell: Some(i) } => {
                write!(f, "vacuum-input: rho = {rho} at cell {i}")
            }
            Error::VacuumInput { rho, cell: None } => write!(f, "vacuum-input: rho = {rho}"),
            Error::InvalidPressure(p) => write!(f, "invalid-pressure: p = {p}"),
            Error::InvalidInitialData(msg) => write!(f, "invalid-initial-data: {msg}"),
            Error::NumericFailure(msg) => write!(f, "numeric-failure: {msg}"),
            Error::SimulationDiverged { t, cell, field } => write!(
                f,
                "simulation-diverged: field {field} at cell {cell}, t = {t}"
            ),
            Error::VerificationFailure(msg) => write!(f, "verification-failure: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid-input: {msg}"),
            Error::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
