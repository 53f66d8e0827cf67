use core::fmt;

/// Errors raised by the numerical routines.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Γ has a pole at the non-positive integers.
    PoleOfGamma { z: f64 },
    /// ζ has its pole at s = 1.
    PoleOfZeta,
    /// h_T has poles at the non-zero integer multiples of iT.
    PoleOfWeight { multiple: i64 },
    /// An argument is outside the domain where the routine is defined.
    Domain { what: &'static str, value: f64 },
    /// A parameter is invalid.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// A result would overflow the binary64 range.
    Overflow { what: &'static str },
    /// A series hit its term cap before the truncation rule fired.
    SeriesNonConvergence { what: &'static str, terms: usize },
    /// Adaptive quadrature exceeded its refinement cap.
    QuadratureNonConvergence { estimate: f64, error: f64 },
    /// A request exceeds a fixed capacity.
    CapacityExceeded { what: &'static str, requested: u64, cap: u64 },
    /// The regime precondition of an asymptotic or bound does not hold.
    Regime { what: &'static str },
    /// The two evaluation routes of a dual-route quantity disagree.
    CrossRouteDisagreement { first: f64, second: f64 },
    /// Residue constants failed to reproduce quadrature.
    CalibrationFailure { x: f64, t: u32, discrepancy: f64 },
    /// A needed Hecke eigenvalue is absent from a record.
    MissingCoefficient { index: u64, t: f64 },
    /// A truncation tail exceeds the requested tolerance.
    BudgetOverflow { tail: f64, tol: f64 },
    /// The two sides of a trace identity disagree beyond their budgets.
    VerificationFailure { discrepancy: f64, budget: f64 },
    /// Spectral records are unusable (empty, unsorted, duplicated).
    BadData { reason: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::PoleOfGamma { z } => write!(f, "gamma has a pole at z = {z}"),
            Error::PoleOfZeta => write!(f, "zeta has a pole at s = 1"),
            Error::PoleOfWeight { multiple } => {
                write!(f, "h_T has a pole at r = {multiple}·iT")
            }
            Error::Domain { what, value } => write!(f, "{what} is out of domain: {value}"),
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::Overflow { what } => write!(f, "overflow while computing {what}"),
            Error::SeriesNonConvergence { what, terms } => {
                write!(f, "{what}: series did not converge within {terms} terms")
            }
            Error::QuadratureNonConvergence { estimate, error } => write!(
                f,
                "adaptive quadrature did not converge (estimate {estimate:e}, error {error:e})"
            ),
            Error::CapacityExceeded { what, requested, cap } => {
                write!(f, "{what}: requested {requested} exceeds cap {cap}")
            }
            Error::Regime { what } => write!(f, "outside regime: {what}"),
            Error::CrossRouteDisagreement { first, second } => write!(
                f,
                "dual-route disagreement: {first:e} vs {second:e} (delta {:e})",
                (first - second).abs()
            ),
            Error::CalibrationFailure { x, t, discrepancy } => write!(
                f,
                "residue constants fail to reproduce quadrature at X = {x}, T = {t} (delta {discrepancy:e})"
            ),
            Error::MissingCoefficient { index, t } => {
                write!(f, "record t = {t} has no lambda_{index}")
            }
            Error::BudgetOverflow { tail, tol } => {
                write!(f, "truncation tail {tail:e} exceeds tolerance {tol:e}")
            }
            Error::VerificationFailure { discrepancy, budget } => write!(
                f,
                "trace identity violated: discrepancy {discrepancy:e} exceeds budget {budget:e}"
            ),
            Error::BadData { reason } => write!(f, "bad spectral data: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
