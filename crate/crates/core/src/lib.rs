//! Numerical toolkit for process matrices, the quantum switch and the
//! gravitational timing of a switch built from time dilation.
//!
//! Tensor factors are ordered big-endian throughout: the leftmost factor is
//! the most significant index.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod grav;
pub mod linalg;
pub mod ops;
pub mod order;
pub mod process;
pub mod random;

pub use num_complex::Complex64 as C64;

/// Absolute tolerance for equality checks.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("subsystem index {index} out of range for {count} factors")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("map increases trace (max eigenvalue of sum E^dag E is {0:.6})")]
    TraceIncreasing(f64),
    #[error("Choi operator must use the {0} convention here")]
    Convention(&'static str),
    #[error("outcome has zero probability")]
    ZeroProbability,
    #[error("state vanishes: {0}")]
    Degenerate(String),
    #[error("observable does not have spectrum {{-1, +1}}")]
    NotDichotomic,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("radius {r:.6e} m is not outside the Schwarzschild radius {rs:.6e} m")]
    InsideHorizon { r: f64, rs: f64 },
    #[error("weak-field approximation violated: R_S/R = {0:.3e}")]
    WeakField(f64),
    #[error("input has support outside the scattering subspace")]
    MalformedInput,
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
