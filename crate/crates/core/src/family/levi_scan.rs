use serde::Serialize;

use super::rank::DISC_POINT_TOL;
use super::FamilyError;
use crate::bishop::BishopDisc;
use crate::geometry::{holomorphic_tangent_basis_with_tol, levi_form_direct, HypersurfaceSpec, StructureSpec};

/// Levi values of `ρ` over the boundary of a disc.
#[derive(Clone, Debug, Serialize)]
pub struct LeviScan {
    pub max_abs: f64,
    pub min: f64,
    pub max: f64,
    /// `max |L(v_i)|` for each vector of the holomorphic tangent frame.
    pub per_direction_max_abs: Vec<f64>,
    pub samples: usize,
}

impl LeviScan {
    fn empty(dirs: usize) -> Self {
        LeviScan { max_abs: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY, per_direction_max_abs: vec![0.0; dirs], samples: 0 }
    }

    pub fn merge(&mut self, other: &LeviScan) {
        self.max_abs = self.max_abs.max(other.max_abs);
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        for (a, b) in self.per_direction_max_abs.iter_mut().zip(&other.per_direction_max_abs) {
            *a = a.max(*b);
        }
        self.samples += other.samples;
    }
}

/// Evaluates `L^J(ρ^k)(q)(v)` at every boundary node `q = z(e^{iθ})` for
/// each unit vector `v` of an orthonormal holomorphic tangent frame at `q`.
pub fn levi_vanishing_scan(z: &BishopDisc, e: &HypersurfaceSpec, s: &StructureSpec) -> Result<LeviScan, FamilyError> {
    let dirs = e.dim() - e.codim();
    let mut scan = LeviScan::empty(dirs);
    let trace = z.z.boundary_trace();
    for l in 0..z.grid().n() {
        let q: Vec<_> = (0..trace.comps()).map(|c| trace.samples(c)[l]).collect();
        let frame = holomorphic_tangent_basis_with_tol(e, &q, s, DISC_POINT_TOL)?;
        for (i, v) in frame.holomorphic.iter().enumerate() {
            for k in 0..e.codim() {
                let val = levi_form_direct(e.component(k), &q, v, s)?;
                scan.max_abs = scan.max_abs.max(val.abs());
                scan.min = scan.min.min(val);
                scan.max = scan.max.max(val);
                scan.per_direction_max_abs[i] = scan.per_direction_max_abs[i].max(val.abs());
            }
        }
        scan.samples += 1;
    }
    Ok(scan)
}
