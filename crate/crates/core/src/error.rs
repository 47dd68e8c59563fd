use alloc::string::String;
use core::fmt;

/// Errors raised while building problems or running methods.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector or matrix has the wrong size.
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// Malformed input data (non-symmetric Q, bad CSR layout, sign pattern...).
    InvalidData(String),
    /// The quadratic part is not positive definite.
    NotStronglyConvex { lambda_min: f64 },
    /// A logarithm argument left its domain.
    Domain { term: &'static str, value: f64 },
    /// An iterative routine hit its iteration cap.
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    /// A factorization met a non-positive pivot.
    Singular { what: &'static str },
    /// A dual point does not belong to the dual cone.
    OutsideDualCone { distance: f64 },
    /// Inconsistent or incomplete configuration.
    Config(String),
    /// The primal constraints cannot be satisfied.
    Infeasible(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                what,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch for {what}: expected {expected}, found {found}"
            ),
            Error::InvalidData(msg) => write!(f, "invalid data: {msg}"),
            Error::NotStronglyConvex { lambda_min } => write!(
                f,
                "objective is not strongly convex (smallest eigenvalue {lambda_min:e})"
            ),
            Error::Domain { term, value } => {
                write!(
                    f,
                    "{term} evaluated outside its domain (argument {value:e})"
                )
            }
            Error::NoConvergence {
                what,
                iterations,
                residual,
            } => write!(
                f,
                "{what} did not converge in {iterations} iterations (residual {residual:e})"
            ),
            Error::Singular { what } => write!(f, "{what}: matrix is singular"),
            Error::OutsideDualCone { distance } => {
                write!(
                    f,
                    "point lies outside the dual cone (distance {distance:e})"
                )
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible problem: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            found,
        })
    }
}
