//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by numerical routines and structural checks.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("eigensolver failed to converge")]
    NonConvergence,
    #[error("eigenvector matrix ill-conditioned (cond = {cond:.3e}, bound {bound:.1e})")]
    IllConditioned { cond: f64, bound: f64 },
    #[error("function undefined at eigenvalue {re} + {im}i")]
    DomainError { re: f64, im: f64 },
    #[error("argument {theta} is not an argument of {re} + {im}i")]
    ArgumentMismatch { re: f64, im: f64, theta: f64 },
    #[error("resonance: {0}")]
    Resonant(String),
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("representations of different rank ({0} vs {1})")]
    RankMismatch(usize, usize),
    #[error("u values {0} and {1} coincide")]
    DegenerateU(usize, usize),
    #[error("zI + A_kk singular at z = {re} + {im}i")]
    SingularShift { re: f64, im: f64 },
    #[error("singular recursive factor in product")]
    SingularProduct,
    #[error("spectral parameter must be nonzero")]
    ZeroLambda,
    #[error("spectral parameters must differ")]
    EqualLambdas,
    #[error("hbar must be nonzero")]
    ZeroHbar,
    #[error("u_{blocker} lies on the segment [u_{s}, u_{t}]")]
    SegmentBlocked { s: usize, t: usize, blocker: usize },
    #[error("u_{blocker} lies on the line through u_{s}, u_{t}")]
    LineBlocked { s: usize, t: usize, blocker: usize },
    #[error("product did not converge (estimate {estimate:.3e} > tol {tol:.1e} at p = {p})")]
    NotConverged { estimate: f64, tol: f64, p: usize },
    #[error("z = {re} + {im}i is at or near a pole")]
    PoleHit { re: f64, im: f64 },
    #[error("no ordering makes Im(u_k e^(id)) strictly decreasing")]
    OrderingFailure,
    #[error("argument window violated: {0}")]
    ArgumentWindowViolation(String),
    #[error("configuration within tolerance of a case boundary: {0}")]
    GeometryAmbiguous(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("series tail too large ({0:.3e})")]
    TailTooLarge(f64),
    #[error("integration could not meet tolerance: {0}")]
    NotAccurate(String),
    #[error("invalid braid word: {0}")]
    InvalidWord(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
