//! Dense complex linear algebra with an explicit tolerance policy.

mod decomp;
mod matrix;

pub use decomp::{
    hermitian_eig, least_squares, nearest_isometry, nullspace, nullspace_scaled, numerical_rank, polar_left, polar_right, svd,
    HermitianEigen, PolarLeft, PolarRight, Svd,
};
pub(crate) use matrix::c;
pub use matrix::{ComplexMatrix, C64};

use crate::error::{Error, Result};

/// Thresholds for rank decisions and residual checks.
///
/// A singular value counts as nonzero when it exceeds `rank_rel_tol · σ_max`.
/// Identities expected to hold exactly are checked against
/// `residual_abs_tol · (1 + ‖M‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    pub rank_rel_tol: f64,
    pub residual_abs_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rank_rel_tol: 1e-8, residual_abs_tol: 1e-10 }
    }
}

impl TolerancePolicy {
    pub fn new(rank_rel_tol: f64, residual_abs_tol: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(rank_rel_tol) || !ok(residual_abs_tol) {
            return Err(Error::invalid("tolerances must be finite and strictly positive"));
        }
        Ok(Self { rank_rel_tol, residual_abs_tol })
    }

    /// Scalar-equality slack used when chaining inequalities: `√rank_rel_tol`.
    pub fn scalar_tol(&self) -> f64 {
        libm::sqrt(self.rank_rel_tol)
    }
}
