use alloc::string::String;
use core::fmt;

use crate::quiver::VertexId;

/// Which precondition of a rescaling instance failed.
#[derive(Debug, Clone, PartialEq)]
pub enum PreconditionFailure {
    /// A row or column of `Z` or `W` vanishes.
    ZeroLine { matrix: char, row: bool, index: usize },
    /// Corresponding row or column lengths of `Z` and `W` differ.
    Lengths { row: bool, index: usize, deviation: f64 },
    /// `diag(A) Z != W diag(B)`.
    Relation { residual: f64 },
}

impl PreconditionFailure {
    /// Stable short code used in reports and exit diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            PreconditionFailure::ZeroLine { .. } => "precondition-zero-line",
            PreconditionFailure::Lengths { .. } => "precondition-lengths",
            PreconditionFailure::Relation { .. } => "precondition-relation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidInput(String),
    SingularInput,
    UnsupportedShape(String),
    InconsistentInput(String),
    NumericalDegeneracy(String),
    Precondition(PreconditionFailure),
    RigidityViolation { row: usize, col: usize, row_scalar: f64, col_scalar: f64 },
    StageFailure { stage: &'static str, residual: f64 },
    InvalidProjection { index: usize, idempotency: f64, self_adjointness: f64 },
    Infeasible { residual: f64 },
    InfeasibleSign { index: usize, weight: f64 },
    NotInK { leaf: VertexId },
    NotAMorphism { residual: f64 },
    InfeasibleBalance { odd_total: f64, even_total: f64 },
    InfeasibleDims { vertex: VertexId },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Stable short code naming the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::SingularInput => "singular-input",
            Error::UnsupportedShape(_) => "unsupported-shape",
            Error::InconsistentInput(_) => "inconsistent-input",
            Error::NumericalDegeneracy(_) => "numerical-degeneracy",
            Error::Precondition(p) => p.code(),
            Error::RigidityViolation { .. } => "rigidity-violation",
            Error::StageFailure { .. } => "stage-failure",
            Error::InvalidProjection { .. } => "invalid-projection",
            Error::Infeasible { .. } => "infeasible",
            Error::InfeasibleSign { .. } => "infeasible-sign",
            Error::NotInK { .. } => "not-in-K",
            Error::NotAMorphism { .. } => "not-a-morphism",
            Error::InfeasibleBalance { .. } => "infeasible-balance",
            Error::InfeasibleDims { .. } => "infeasible-dims",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::SingularInput => f.write_str("matrix is numerically singular"),
            Error::UnsupportedShape(msg) => write!(f, "unsupported quiver shape: {msg}"),
            Error::InconsistentInput(msg) => write!(f, "inconsistent input: {msg}"),
            Error::NumericalDegeneracy(msg) => write!(f, "numerical degeneracy: {msg}"),
            Error::Precondition(p) => match p {
                PreconditionFailure::ZeroLine { matrix, row, index } => write!(
                    f,
                    "{}: {} {} of {} is zero",
                    p.code(),
                    if *row { "row" } else { "column" },
                    index,
                    matrix
                ),
                PreconditionFailure::Lengths { row, index, deviation } => write!(
                    f,
                    "{}: {} {} lengths differ by {:e}",
                    p.code(),
                    if *row { "row" } else { "column" },
                    index,
                    deviation
                ),
                PreconditionFailure::Relation { residual } => {
                    write!(f, "{}: |AZ - WB| = {:e}", p.code(), residual)
                }
            },
            Error::RigidityViolation { row, col, row_scalar, col_scalar } => write!(
                f,
                "rigidity violation at ({row}, {col}): row scalar {row_scalar} vs column scalar {col_scalar}"
            ),
            Error::StageFailure { stage, residual } => {
                write!(f, "stage `{stage}` failed with residual {residual:e}")
            }
            Error::InvalidProjection { index, idempotency, self_adjointness } => write!(
                f,
                "projection {index} invalid: |P^2-P| = {idempotency:e}, |P-P*| = {self_adjointness:e}"
            ),
            Error::Infeasible { residual } => {
                write!(f, "no weights solve sum a_i P_i = I (residual {residual:e})")
            }
            Error::InfeasibleSign { index, weight } => {
                write!(f, "weight {index} is not positive ({weight})")
            }
            Error::NotInK { leaf } => {
                write!(f, "T*T at leaf {} is not a nonzero scalar", leaf.0)
            }
            Error::NotAMorphism { residual } => {
                write!(f, "operator violates C P_i = P~_i C P_i (residual {residual:e})")
            }
            Error::InfeasibleBalance { odd_total, even_total } => write!(
                f,
                "dimension/character balance fails: odd side {odd_total} vs even side {even_total}"
            ),
            Error::InfeasibleDims { vertex } => write!(
                f,
                "dimension at vertex {} exceeds the total dimension of its neighbours",
                vertex.0
            ),
        }
    }
}

impl core::error::Error for Error {}
