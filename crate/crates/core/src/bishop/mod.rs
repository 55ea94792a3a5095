//! The Bishop boundary problem: pseudoholomorphic discs with boundary on
//! a real submanifold, their linearization, and transversality at the
//! attachment point.
//!
//! The solver iterates `z ← p + Q(η + ω)`, where `ω` collects the frame
//! coordinates of `T(A(z) conj(∂z))` and `η` is holomorphic. Tangential
//! components of `η` come from the boundary data by a Schwarz extension;
//! normal components are found by Newton's method on the boundary samples
//! so that `ρ(z) = 0` on the circle.

mod linearized;
mod params;
pub mod record;
mod solver;

pub use linearized::{solve_linearized, LinearizedDisc, LinearizedProblem};
pub use params::{DiscParameters, SolverOptions, DATA_PIN_TOL, SMALLNESS_BOUND};
pub use solver::{solve_bishop, solve_bishop_from, transversality, transversality_components, BishopDisc, Residuals};

use thiserror::Error;

use crate::disc::DiscError;
use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (residuals {residuals:?}, contraction estimate {contraction})")]
    NonConvergence { iterations: usize, residuals: Residuals, contraction: f64 },
    #[error("boundary Newton iteration stalled at |rho| = {residual:e}")]
    NewtonFailure { residual: f64 },
    #[error("boundary Jacobian is singular along the iterate")]
    DegenerateBoundaryJacobian,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("replay format: {0}")]
    Replay(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl SolverError {
    /// True for errors that signal numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SolverError::NonConvergence { .. } | SolverError::NewtonFailure { .. } | SolverError::DegenerateBoundaryJacobian
        ) || matches!(self, SolverError::Geometry(GeometryError::NormBoundViolated(_)))
    }
}
