use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violates the invariants of its type.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("sample rate {requested} Hz is below the required minimum of {required} Hz (10 x chirp bandwidth)")]
    Undersampled { requested: f64, required: f64 },

    #[error("integration failed at t = {time:e} s: more than {max_steps} internal steps between output points")]
    IntegrationFailure { time: f64, max_steps: usize },

    #[error("scan point {index} (sweep time {sweep_time:e} s) failed: {source}")]
    ScanPoint {
        index: usize,
        sweep_time: f64,
        #[source]
        source: Box<Error>,
    },

    /// Inconsistent or degenerate experimental data.
    #[error("data error: {0}")]
    Data(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    /// Averaged-decay fit whose effective time leaves no positive second pathway.
    #[error("fitted tau_eff = {tau_eff:e} s is not shorter than tau1 = {tau1:e} s; no positive tau2 exists")]
    InconsistentDecay { tau_eff: f64, tau1: f64 },
}

pub(crate) fn require(cond: bool, field: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: reason.into(),
        })
    }
}
