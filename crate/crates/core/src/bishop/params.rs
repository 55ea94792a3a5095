use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::disc::{BoundaryFunction, DiscGrid, DEFAULT_M, DEFAULT_N};

/// Largest allowed `ε · sup|u'|`.
pub const SMALLNESS_BOUND: f64 = 0.2;

/// Required accuracy of `u(1) = 0`.
pub const DATA_PIN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Angular grid size (power of two).
    pub n: usize,
    /// Radial grid size.
    pub m: usize,
    /// Residual tolerance; `None` picks 1e-9 for `A ≡ 0` and 1e-7 otherwise.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub newton_max_iter: usize,
    /// `ε · sup|u'|` above which the solve starts with continuation.
    pub continuation_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { n: DEFAULT_N, m: DEFAULT_M, tol: None, max_iter: 200, newton_max_iter: 30, continuation_threshold: 0.1 }
    }
}

impl SolverOptions {
    pub fn with_grid(n: usize, m: usize) -> Self {
        SolverOptions { n, m, ..Default::default() }
    }

    pub fn tolerance(&self, standard: bool) -> f64 {
        self.tol.unwrap_or(if standard { 1e-9 } else { 1e-7 })
    }
}

/// Attachment point, tangential boundary data and amplitude of a Bishop disc.
#[derive(Clone, Debug)]
pub struct DiscParameters {
    point: Vec<Complex64>,
    data: BoundaryFunction,
    epsilon: f64,
    options: SolverOptions,
}

impl DiscParameters {
    /// `data` has one real component per tangential direction and must vanish
    /// at `θ = 0`. It is resampled if its grid differs from the solver grid.
    pub fn new(point: Vec<Complex64>, data: BoundaryFunction, epsilon: f64, options: SolverOptions) -> Result<Self, SolverError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(SolverError::InvalidParameters(format!("epsilon must be positive, got {epsilon}")));
        }
        if !data.is_real_within(1e-14 * data.sup_norm().max(1.0)) {
            return Err(SolverError::InvalidParameters("boundary data must be real".into()));
        }
        let grid = DiscGrid::shared(options.n, options.m)?;
        let data = if data.grid().n() == grid.n() { data } else { data.resampled(grid) };
        let at_one = data.value_at_one().iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if at_one > DATA_PIN_TOL * data.sup_norm().max(1.0) {
            return Err(SolverError::InvalidParameters(format!("boundary data must vanish at 1, |u(1)| = {at_one:e}")));
        }
        let p = DiscParameters { point, data, epsilon, options };
        let small = p.smallness();
        if small > SMALLNESS_BOUND * (1.0 + 1e-12) {
            return Err(SolverError::InvalidParameters(format!(
                "epsilon * sup|u'| = {small} exceeds the small-disc bound {SMALLNESS_BOUND}"
            )));
        }
        Ok(p)
    }

    pub fn point(&self) -> &[Complex64] {
        &self.point
    }

    pub fn data(&self) -> &BoundaryFunction {
        &self.data
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// `ε · sup|u'|`.
    pub fn smallness(&self) -> f64 {
        self.epsilon * self.data.d_theta().sup_norm()
    }

    pub(crate) fn with_epsilon(&self, epsilon: f64) -> DiscParameters {
        DiscParameters { epsilon, ..self.clone() }
    }
}
