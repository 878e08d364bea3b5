use thiserror::Error;

/// Failures raised by the energy engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("constellation size M={m} is not valid for {scheme}: {reason}")]
    InvalidConstellation {
        scheme: &'static str,
        m: u64,
        reason: &'static str,
    },

    #[error("closed-form averaging needs Rayleigh fading, got {0}")]
    UnsupportedFading(String),

    #[error("target error rate {target:e} is looser than the zero-energy error rate {ceiling:e}")]
    InfeasibleTarget { target: f64, ceiling: f64 },

    #[error("no constellation size fits the frame budget")]
    NoFeasibleM,

    #[error("every candidate constellation is infeasible")]
    AllInfeasible,

    #[error("no sign change over [{lo:e}, {hi:e}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("root finding did not converge in {0} iterations")]
    MaxIterations(usize),

    #[error("could not bracket the required energy (searched [{lo:e}, {hi:e}])")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("series did not converge: {0}")]
    Series(String),

    #[error("{0} overflows the f64 range")]
    Overflow(&'static str),
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoSignChange { .. }
                | Error::MaxIterations(_)
                | Error::BracketFailure { .. }
                | Error::Quadrature { .. }
                | Error::Series(_)
                | Error::Overflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
