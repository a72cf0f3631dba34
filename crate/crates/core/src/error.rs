use std::fmt;

use thiserror::Error;

/// A violated [`PanelDatasheet`](crate::PanelDatasheet) invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    /// The invariant as written, e.g. `0 < vmp_stc < voc_stc`.
    pub invariant: &'static str,
    pub detail: String,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant `{}` violated ({})", self.invariant, self.detail)
    }
}

impl std::error::Error for InvariantViolation {}

/// Failures of the estimation and simulation math.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("numerical range error: {0}")]
    NumericalRange(String),

    #[error("inconsistent datasheet: {0}")]
    InconsistentDatasheet(String),

    #[error("Newton iteration did not converge after {iterations} iterations (last n = {last_n})")]
    NonConvergence { iterations: usize, last_n: f64 },

    #[error("Newton iterate left (0, 10) at iteration {iteration}: n = {n}")]
    Divergence { iteration: usize, n: f64 },

    #[error("singular Newton step: f'(n) = {slope} at n = {n}")]
    SingularStep { n: f64, slope: f64 },

    #[error("out of model range: {0}")]
    OutOfModelRange(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl SimError {
    /// Short, stable name of the failure class, used in diagnostics and API responses.
    pub fn class(&self) -> &'static str {
        match self {
            SimError::NumericalRange(_) => "numerical-range",
            SimError::InconsistentDatasheet(_) => "inconsistent-datasheet",
            SimError::NonConvergence { .. } => "non-convergence",
            SimError::Divergence { .. } => "divergence",
            SimError::SingularStep { .. } => "singular-step",
            SimError::OutOfModelRange(_) => "out-of-model-range",
            SimError::Domain(_) => "domain",
            SimError::InvalidArgument(_) => "invalid-argument",
        }
    }
}

impl From<InvariantViolation> for SimError {
    fn from(v: InvariantViolation) -> Self {
        SimError::InconsistentDatasheet(v.to_string())
    }
}

/// Failures while reading a datasheet document or looking up a bundled panel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasheetError {
    #[error("malformed datasheet document: {0}")]
    Syntax(String),

    #[error("missing required key `{0}`")]
    MissingKey(&'static str),

    #[error("key `{key}` has non-numeric value `{value}`")]
    NotNumeric { key: String, value: String },

    #[error("key `{key}` must be a positive integer, got `{value}`")]
    NotInteger { key: String, value: String },

    #[error("key `name` must be text, got `{0}`")]
    NameNotText(String),

    #[error("unknown key(s): {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error(transparent)]
    Invariant(#[from] InvariantViolation),

    #[error("unknown bundled panel `{name}` (available: {})", .available.join(", "))]
    UnknownPanel {
        name: String,
        available: Vec<&'static str>,
    },
}

impl DatasheetError {
    pub fn class(&self) -> &'static str {
        match self {
            DatasheetError::Invariant(_) => "invariant-violation",
            DatasheetError::UnknownPanel { .. } => "unknown-panel",
            _ => "invalid-datasheet",
        }
    }
}
