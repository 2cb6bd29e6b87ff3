use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Species name not in the catalog.
    UnknownSpecies(String),
    /// A precondition on an input failed.
    InvalidInput {
        field: &'static str,
        reason: &'static str,
    },
    /// Transduction factor is zero, so no equivalent circuit exists.
    ZeroTransduction,
    /// Mathieu parameter at or above the stability edge.
    Unstable { q_mathieu: f64 },
    /// Adaptive quadrature ran out of subdivisions.
    Convergence { estimate: f64, error_bound: f64 },
    /// Adaptive ODE step shrank below the floor.
    StepUnderflow { t: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownSpecies(name) => write!(f, "unknown species `{name}`"),
            Error::InvalidInput { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::ZeroTransduction => write!(f, "transduction factor is zero"),
            Error::Unstable { q_mathieu } => {
                write!(f, "trap unstable: Mathieu q = {q_mathieu:.4} >= 1")
            }
            Error::Convergence {
                estimate,
                error_bound,
            } => write!(
                f,
                "quadrature did not converge: estimate {estimate:.6e} +/- {error_bound:.3e}"
            ),
            Error::StepUnderflow { t } => write!(f, "ODE step size underflow at t = {t:.6e} s"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn require(ok: bool, field: &'static str, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput { field, reason })
    }
}
