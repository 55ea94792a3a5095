//! Functions on the closed unit disc and its boundary in a polar-Fourier
//! representation, with the Cauchy–Green transform, Cauchy integral and
//! Wirtinger derivatives.

mod boundary;
mod function;
mod grid;
mod operators;

pub use boundary::{BoundaryFunction, ValueKind};
pub use function::DiscFunction;
pub use grid::{DiscGrid, DEFAULT_M, DEFAULT_N};
pub use operators::{cauchy_green_t, cauchy_integral_k, d, d_bar, harmonic_conjugate, k1, schwarz, PIN_TOL};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiscError {
    #[error("angular size must be a power of two >= 8, got {0}")]
    BadAngularSize(usize),
    #[error("radial size must be >= 4, got {0}")]
    BadRadialSize(usize),
    #[error("radial system for mode {0} is singular")]
    SingularRadialSystem(i64),
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("operands have different shapes")]
    ShapeMismatch,
    #[error("boundary data component {component} does not vanish at 1 (|u(1)| = {value:e})")]
    NotPinned { component: usize, value: f64 },
    #[error("boundary data is not real")]
    NotReal,
    #[error("mode {0} is not representable on this grid")]
    ModeOutOfRange(i64),
    #[error("radial index {0} out of range")]
    RadialIndexOutOfRange(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
