//! Families of attached discs: ranks of evaluation maps, detection of
//! complex hypersurfaces, Levi scans and one-sided filling.

mod chart;
mod dichotomy;
mod fill;
mod levi_scan;
mod rank;

pub use chart::{circle_points, random_data, trig_basis, FamilyChart};
pub use dichotomy::{dichotomy, DichotomyOptions, DichotomyReport};
pub use fill::{fill_one_sided, Coverage, FillOptions, FillReport, Side};
pub use levi_scan::{levi_vanishing_scan, LeviScan};
pub use rank::{
    detect_complex_hypersurface, evaluation_jacobian, evaluation_jacobians, numerical_rank, solve_variations, write_witness_csv, FamilyReport,
    HypersurfaceVerdict, Variations, Witness,
};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bishop::{SolverError, SolverOptions};
use crate::disc::DiscError;
use crate::geometry::GeometryError;

/// Default relative cut `σ_i > σ₁ · threshold`.
pub const RANK_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMethod {
    Linearized,
    FiniteDifference,
}

#[derive(Clone, Debug)]
pub struct FamilyOptions {
    pub solver: SolverOptions,
    pub method: JacobianMethod,
    pub rank_threshold: f64,
    pub fd_step: f64,
    pub stability_check: bool,
    /// Worker threads for sweeps; 0 uses the global pool.
    pub workers: usize,
    pub seed: u64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            solver: SolverOptions::default(),
            method: JacobianMethod::Linearized,
            rank_threshold: RANK_THRESHOLD,
            fd_step: 1e-5,
            stability_check: true,
            workers: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("no transverse disc found (max |transversality| = {max_transversality:e} over {discs} discs; {collected} collected points, max |rho| = {max_abs_rho:e})")]
    NoTransverseDisc { max_transversality: f64, discs: usize, collected: usize, max_abs_rho: f64 },
    #[error("singular value ratio {ratio:e} too close to the rank threshold {threshold:e}")]
    InconclusiveRank { ratio: f64, threshold: f64 },
    #[error("all {0} disc solves of the sweep failed")]
    AllSolvesFailed(usize),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl FamilyError {
    pub fn is_numerical(&self) -> bool {
        match self {
            FamilyError::Solver(e) => e.is_numerical(),
            FamilyError::InconclusiveRank { .. } | FamilyError::AllSolvesFailed(_) => true,
            _ => false,
        }
    }
}

pub(crate) fn complex_pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

pub(crate) fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
