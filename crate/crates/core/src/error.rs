use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("{what}: argument {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },

    /// An argument exceeds the admissible range of an inverse or a scaled function.
    #[error("{what}: argument {value} exceeds the admissible bound {bound}")]
    Range {
        what: &'static str,
        value: f64,
        bound: f64,
    },

    /// Invalid construction parameters or configuration values.
    #[error("configuration error: {0}")]
    Config(String),

    /// The adaptive integrator could not make progress.
    #[error("integration stalled at t = {t} with S = {value}")]
    IntegrationStall { t: f64, value: f64 },

    /// A nonlinear per-node solve failed to converge.
    #[error("time step failed at node {node} (t = {t}): {reason}")]
    Step {
        node: usize,
        t: f64,
        reason: &'static str,
    },

    /// The requested law/weight pair is not covered by the rate tables.
    #[error("unsupported combination {given}; covered entries: {covered}")]
    Unsupported { given: String, covered: String },

    /// A fit could not be performed on the supplied data.
    #[error("fit error: {0}")]
    Fit(String),

    /// An experiment stopped early; partial artifacts were written.
    #[error("experiment aborted: {0}")]
    Aborted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
