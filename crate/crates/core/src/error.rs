use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in the numerical pipeline.
///
/// Blow-up is a variant rather than a panic: the Dirac-pair experiment
/// exists to observe it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("atomic kernel has no density")]
    AtomicKernel,

    #[error("window hypothesis violated: {0}")]
    WindowViolated(String),

    #[error("non-finite argument {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: ({p1}, {n1}) vs ({p2}, {n2})")]
    GridMismatch { p1: f64, n1: usize, p2: f64, n2: usize },

    #[error(
        "Dirac-pair shift {shift} is not a multiple of the grid spacing {spacing}; refine the grid so that shift/h is an integer"
    )]
    MisalignedShift { shift: f64, spacing: f64 },

    #[error("field is not even about x = 0 (measured asymmetry {asymmetry:e})")]
    NotEven { asymmetry: f64 },

    #[error("mode {k0} not destabilizable: phi_hat(k0/L) = {value:e} >= 0")]
    NotDestabilizable { k0: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("newton did not converge in {steps} steps (residual history {history:?})")]
    NoConvergence { steps: usize, history: Vec<f64> },

    #[error("iterate left the positive cone at newton step {step} (min u = {min_u:e})")]
    LeftPositiveCone { step: usize, min_u: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("blow-up at t = {t}: sup |u| = {sup_u:e}")]
    BlowUp { t: f64, sup_u: f64 },

    #[error("under-resolved at t = {t}: spectral tail {tail:e} exceeds {limit:e}")]
    UnderResolved { t: f64, tail: f64, limit: f64 },

    #[error("nonnegativity lost at t = {t}: min u = {min_u:e}")]
    Negative { t: f64, min_u: f64 },

    #[error("certificate inapplicable: {0}")]
    CertificateInapplicable(String),

    #[error("no front: max u = {max_u} does not exceed level {level}")]
    NoFront { level: f64, max_u: f64 },

    #[error("insufficient samples: {have} available, {need} required")]
    InsufficientSamples { have: usize, need: usize },

    #[error("wraparound contamination at t = {t}: front at {position} within 5% of the domain edge {edge}; enlarge the period")]
    Wraparound { t: f64, position: f64, edge: f64 },

    #[error("malformed field file {path}: {reason}")]
    FieldFormat { path: PathBuf, reason: String },

    #[error("at mu = {mu}: {source}")]
    AtParameter { mu: f64, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        if let Error::AtParameter { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::LeftPositiveCone { .. }
                | Error::LinearSolve(_)
                | Error::BlowUp { .. }
                | Error::UnderResolved { .. }
                | Error::Negative { .. }
                | Error::Wraparound { .. }
                | Error::NoFront { .. }
        )
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
