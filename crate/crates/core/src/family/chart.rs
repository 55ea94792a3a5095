use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::FamilyError;
use crate::disc::{BoundaryFunction, DiscGrid};
use crate::geometry::RMatrix;

/// A finite-dimensional slice of the Bishop discs attached at `point`:
/// base data plus a basis of directions, evaluated at `zeta0`.
#[derive(Clone, Debug)]
pub struct FamilyChart {
    pub point: Vec<Complex64>,
    pub base: BoundaryFunction,
    pub epsilon: f64,
    pub degree: usize,
    pub count: Option<usize>,
    pub basis: Vec<BoundaryFunction>,
    pub zeta0: Complex64,
}

/// `e_t (cos kθ − 1)` and `e_t sin kθ` for `k = 1..=degree`, ordered by `k`.
pub fn trig_basis(grid: &Arc<DiscGrid>, comps: usize, degree: usize) -> Vec<BoundaryFunction> {
    let mut out = Vec::with_capacity(2 * comps * degree);
    for k in 1..=degree {
        let kf = k as f64;
        for t in 0..comps {
            for sine in [false, true] {
                out.push(BoundaryFunction::from_fn_real(grid.clone(), comps, |c, th| match (c == t, sine) {
                    (false, _) => 0.0,
                    (true, false) => (kf * th).cos() - 1.0,
                    (true, true) => (kf * th).sin(),
                }));
            }
        }
    }
    out
}

/// Random trigonometric data of degree `degree` vanishing at 1, scaled so
/// that `sup|u'| = derivative_bound`.
pub fn random_data<R: Rng>(grid: &Arc<DiscGrid>, comps: usize, degree: usize, derivative_bound: f64, rng: &mut R) -> BoundaryFunction {
    let coefs: Vec<Vec<(f64, f64)>> = (0..comps)
        .map(|_| (1..=degree).map(|k| (rng.random_range(-1.0..1.0) / k as f64, rng.random_range(-1.0..1.0) / k as f64)).collect())
        .collect();
    let u = BoundaryFunction::from_fn_real(grid.clone(), comps, |c, th| {
        coefs[c].iter().enumerate().map(|(i, (a, b))| {
            let k = (i + 1) as f64;
            a * ((k * th).cos() - 1.0) + b * (k * th).sin()
        }).sum()
    });
    let d = u.d_theta().sup_norm();
    if d == 0.0 {
        u
    } else {
        u.scaled(derivative_bound / d)
    }
}

/// Evaluation points `e^{iπ(2j+1)/count}`, none of them at 1.
pub fn circle_points(count: usize) -> Vec<Complex64> {
    (0..count).map(|j| Complex64::from_polar(1.0, PI * (2 * j + 1) as f64 / count as f64)).collect()
}

impl FamilyChart {
    pub fn new(
        point: Vec<Complex64>,
        base: BoundaryFunction,
        epsilon: f64,
        degree: usize,
        count: Option<usize>,
        zeta0: Complex64,
    ) -> Result<Self, FamilyError> {
        if degree == 0 {
            return Err(FamilyError::InvalidChart("basis degree must be at least 1".into()));
        }
        if (zeta0.norm() - 1.0).abs() > 1e-12 {
            return Err(FamilyError::InvalidChart(format!("evaluation point {zeta0} is not on the unit circle")));
        }
        let mut basis = trig_basis(base.grid(), base.comps(), degree);
        if let Some(k) = count {
            if k == 0 || k > basis.len() {
                return Err(FamilyError::InvalidChart(format!("basis count {k} outside 1..={}", basis.len())));
            }
            basis.truncate(k);
        }
        Ok(FamilyChart { point, base, epsilon, degree, count, basis, zeta0 })
    }

    /// The same chart with the basis degree (and count, if set) doubled.
    pub fn doubled(&self) -> Self {
        let count = self.count.map(|k| 2 * k);
        FamilyChart::new(self.point.clone(), self.base.clone(), self.epsilon, 2 * self.degree, count, self.zeta0).expect("doubling keeps the chart valid")
    }

    pub fn with_zeta0(&self, zeta0: Complex64) -> Self {
        FamilyChart { zeta0, ..self.clone() }
    }

    /// Condition number of the `L²(b𝔻)` Gram matrix of the basis.
    pub fn gram_condition(&self) -> f64 {
        let k = self.basis.len();
        let samples: Vec<Vec<Vec<f64>>> = self.basis.iter().map(|u| (0..u.comps()).map(|c| u.real_samples(c)).collect()).collect();
        let nb = self.base.grid().n() as f64;
        let g = RMatrix::from_fn(k, k, |i, j| {
            samples[i].iter().zip(&samples[j]).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()).sum::<f64>() / nb
        });
        let sv = g.singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}
