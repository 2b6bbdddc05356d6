use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimensions do not match: {0}")]
    Dimension(String),

    #[error("symmetry relation `{relation}` violated (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    SymmetryViolation {
        relation: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("dim ker B = {0} is odd")]
    OddKernel(usize),

    #[error("G splits ker B into unequal eigenspaces (+i: {plus}, -i: {minus})")]
    KernelImbalance { plus: usize, minus: usize },

    #[error("eigenvalue {0} is not strictly positive")]
    NonPositiveEigenvalue(f64),

    #[error("operation needs a non-trivial kernel of B")]
    EmptyKernel,

    #[error("angle {0} is outside the open interval (0, pi/2)")]
    AngleOutOfRange(f64),

    #[error("expected {expected} angles, got {got}")]
    AngleCount { expected: usize, got: usize },

    #[error("involution invariant `{relation}` violated (residual {residual:.3e})")]
    InvalidInvolution {
        relation: &'static str,
        residual: f64,
    },

    #[error("unitary does not commute with G on ker B (residual {0:.3e})")]
    NotGCommuting(f64),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("involution is not of block sigma_theta form: {0}")]
    WrongInvolutionShape(String),

    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("offset {0} outside (0, pi]")]
    OffsetOutOfRange(f64),

    #[error("length must be positive, got {0}")]
    NonPositiveLength(f64),

    #[error("boundary problem is not invertible: {0}")]
    NotInvertible(String),

    #[error("mode cannot be solved: {0}")]
    UnsolvableMode(String),

    #[error("Dirichlet-to-Neumann operator is singular")]
    SingularR,

    #[error("perturbed operator has an eigenvalue off the positive axis: {0}")]
    NonPositiveSpectrum(String),

    #[error("pair (C(0), sigma) is inadmissible: {0}")]
    Inadmissible(String),

    #[error("C(0) - sigma is singular")]
    SingularDifference,

    #[error("|lambda| = {lambda} is not below the smallest positive eigenvalue {mu1}")]
    LambdaOutOfRange { lambda: f64, mu1: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
