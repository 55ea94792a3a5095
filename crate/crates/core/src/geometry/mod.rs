//! Almost complex structures on ℂⁿ, real hypersurfaces, holomorphic tangent
//! spaces and Levi forms.
//!
//! Real coordinates are interleaved: a point `z ∈ ℂⁿ` corresponds to
//! `x = (Re z₁, Im z₁, …, Re zₙ, Im zₙ) ∈ ℝ²ⁿ`. Matrices acting on `ℝ²ⁿ`
//! follow the same ordering, so the standard structure `J_st` is block
//! diagonal with blocks `[[0, -1], [1, 0]]`.

mod frame;
mod hypersurface;
mod levi;
mod polynomial;
mod structure;

pub use frame::{holomorphic_tangent_basis, holomorphic_tangent_basis_with_tol, AdaptedFrame, TangentFrame};
pub(crate) use frame::tangent_matrix;
pub use hypersurface::HypersurfaceSpec;
pub use levi::{levi_form_direct, levi_form_via_disc};
pub use polynomial::{Monomial, Polynomial, RealPolynomialField, ScalarField};
pub use structure::{a_from_j, j_from_a, DerivativeSource, StructureSpec};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Membership tolerance for "q lies on E".
pub const ON_SURFACE_TOL: f64 = 1e-9;

/// Central finite-difference step used when closed-form derivatives are absent.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("complex dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("matrix does not square to -Id (defect {0:e})")]
    NotAlmostComplex(f64),
    #[error("J_st + J is singular; structure too far from standard")]
    TooFarFromStandard,
    #[error("operator norm of A is {0}, must be < 1")]
    NormBoundViolated(f64),
    #[error("A and J disagree by {0:e}")]
    InconsistentStructure(f64),
    #[error("point is not on the hypersurface (|rho| = {0:e})")]
    NotOnHypersurface(f64),
    #[error("complex Jacobian of rho has rank {rank} < {codim}")]
    DegenerateHypersurface { rank: usize, codim: usize },
    #[error("real Hessian of rho component {component} is not symmetric (defect {defect:e})")]
    AsymmetricHessian { component: usize, defect: f64 },
    #[error("codimension must satisfy 1 <= d < n (d = {codim}, n = {dim})")]
    BadCodimension { codim: usize, dim: usize },
    #[error("frame normalization at the base point is singular")]
    SingularFrame,
    #[error("polynomial exponent vector has length {got}, expected {expected}")]
    BadExponents { expected: usize, got: usize },
}

/// Interleaved real coordinates of a complex vector.
pub fn to_real(z: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(2 * z.len(), z.iter().flat_map(|c| [c.re, c.im]))
}

pub fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Real 2n×2n matrix of the ℂ-linear map `v ↦ A v`.
pub fn realify(a: &CMatrix) -> RMatrix {
    let (r, c) = a.shape();
    let mut m = RMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let e = a[(i, j)];
            m[(2 * i, 2 * j)] = e.re;
            m[(2 * i, 2 * j + 1)] = -e.im;
            m[(2 * i + 1, 2 * j)] = e.im;
            m[(2 * i + 1, 2 * j + 1)] = e.re;
        }
    }
    m
}

/// The standard structure, multiplication by `i`.
pub fn j_standard(n: usize) -> RMatrix {
    let mut m = RMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = -1.0;
        m[(2 * k + 1, 2 * k)] = 1.0;
    }
    m
}

/// Complex conjugation on ℝ²ⁿ.
pub fn conjugation(n: usize) -> RMatrix {
    RMatrix::from_diagonal(&DVector::from_iterator(
        2 * n,
        (0..2 * n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }),
    ))
}

pub(crate) fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}
