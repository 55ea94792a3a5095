use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use super::{to_real, CMatrix, GeometryError, Polynomial, RMatrix, RealPolynomialField, ScalarField};

const RANK_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Clone)]
enum Component {
    Poly(RealPolynomialField),
    Field(Arc<dyn ScalarField + Send>),
}

impl Component {
    fn field(&self) -> &dyn ScalarField {
        match self {
            Component::Poly(p) => p,
            Component::Field(f) => f.as_ref(),
        }
    }
}

/// Real submanifold `E = {ρ = 0}` of ℂⁿ of codimension `d`, with an
/// attachment point `p ∈ E`.
#[derive(Clone)]
pub struct HypersurfaceSpec {
    dim: usize,
    components: Vec<Component>,
    point: Vec<Complex64>,
}

impl fmt::Debug for HypersurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HypersurfaceSpec")
            .field("dim", &self.dim)
            .field("codim", &self.codim())
            .field("point", &self.point)
            .finish()
    }
}

impl HypersurfaceSpec {
    /// `ρ^k = Re P_k`.
    pub fn from_polynomials(dim: usize, rho: Vec<Polynomial>, point: Vec<Complex64>) -> Result<Self, GeometryError> {
        for p in &rho {
            if p.dim() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        let components = rho.into_iter().map(|p| Component::Poly(RealPolynomialField::new(p))).collect();
        Self::build(dim, components, point)
    }

    /// General defining functions; derivatives come from the fields.
    pub fn from_fields(
        dim: usize,
        rho: Vec<Arc<dyn ScalarField + Send>>,
        point: Vec<Complex64>,
    ) -> Result<Self, GeometryError> {
        for f in &rho {
            if f.real_dim() != 2 * dim {
                return Err(GeometryError::DimensionMismatch { expected: 2 * dim, got: f.real_dim() });
            }
        }
        Self::build(dim, rho.into_iter().map(Component::Field).collect(), point)
    }

    fn build(dim: usize, components: Vec<Component>, point: Vec<Complex64>) -> Result<Self, GeometryError> {
        if dim < 2 {
            return Err(GeometryError::DimensionTooSmall(dim));
        }
        let d = components.len();
        if d == 0 || d >= dim {
            return Err(GeometryError::BadCodimension { codim: d, dim });
        }
        let spec = HypersurfaceSpec { dim, components, point: Vec::new() };
        spec.with_point(point)
    }

    /// Same hypersurface, different attachment point.
    pub fn with_point(&self, point: Vec<Complex64>) -> Result<Self, GeometryError> {
        if point.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        let defect = self.max_abs_rho(&point);
        if defect > super::ON_SURFACE_TOL {
            return Err(GeometryError::NotOnHypersurface(defect));
        }
        self.check_rank(&point)?;
        Ok(HypersurfaceSpec { dim: self.dim, components: self.components.clone(), point })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.components.len()
    }

    pub fn point(&self) -> &[Complex64] {
        &self.point
    }

    pub fn component(&self, k: usize) -> &dyn ScalarField {
        self.components[k].field()
    }

    pub fn rho(&self, z: &[Complex64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| match c {
                Component::Poly(p) => p.value_at(z),
                Component::Field(f) => f.value(to_real(z).as_slice()),
            })
            .collect()
    }

    pub fn max_abs_rho(&self, z: &[Complex64]) -> f64 {
        self.rho(z).into_iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Real gradient of `ρ^k` in interleaved coordinates.
    pub fn gradient(&self, k: usize, z: &[Complex64]) -> DVector<f64> {
        match &self.components[k] {
            Component::Poly(p) => p.gradient_at(z),
            Component::Field(f) => f.gradient(to_real(z).as_slice()),
        }
    }

    pub fn hessian(&self, k: usize, z: &[Complex64]) -> RMatrix {
        match &self.components[k] {
            Component::Poly(p) => p.hessian_at(z),
            Component::Field(f) => f.hessian(to_real(z).as_slice()),
        }
    }

    /// Complex Jacobi matrix `ρ_z`, of size d×n.
    pub fn rho_z(&self, z: &[Complex64]) -> CMatrix {
        let n = self.dim;
        let mut m = CMatrix::zeros(self.codim(), n);
        for k in 0..self.codim() {
            let g = self.gradient(k, z);
            for j in 0..n {
                m[(k, j)] = Complex64::new(0.5 * g[2 * j], -0.5 * g[2 * j + 1]);
            }
        }
        m
    }

    fn check_rank(&self, z: &[Complex64]) -> Result<(), GeometryError> {
        let d = self.codim();
        let rz = self.rho_z(z);
        let sv = rz.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let rank = sv.iter().filter(|s| **s > RANK_TOL * smax.max(1.0)).count();
        if smax == 0.0 || rank < d {
            return Err(GeometryError::DegenerateHypersurface { rank: if smax == 0.0 { 0 } else { rank }, codim: d });
        }
        Ok(())
    }

    /// Checks that every real Hessian is symmetric at the given points.
    pub fn check_hessian_symmetry(&self, points: &[Vec<Complex64>]) -> Result<(), GeometryError> {
        for z in points {
            for k in 0..self.codim() {
                let h = self.hessian(k, z);
                let defect = (&h - h.transpose()).amax();
                if defect > SYMMETRY_TOL * (1.0 + h.amax()) {
                    return Err(GeometryError::AsymmetricHessian { component: k, defect });
                }
            }
        }
        Ok(())
    }

    /// Newton projection onto `E` along the gradients of `ρ`.
    pub fn project(&self, z: &[Complex64], max_iter: usize) -> Option<Vec<Complex64>> {
        let d = self.codim();
        let mut x = to_real(z);
        for _ in 0..max_iter {
            let zc = super::to_complex(x.as_slice());
            let r = DVector::from_vec(self.rho(&zc));
            if r.amax() <= 1e-14 {
                return Some(zc);
            }
            let mut g = RMatrix::zeros(2 * self.dim, d);
            for k in 0..d {
                g.set_column(k, &self.gradient(k, &zc));
            }
            let gram = g.transpose() * &g;
            let step = gram.lu().solve(&r)?;
            x -= g * step;
        }
        let zc = super::to_complex(x.as_slice());
        (self.max_abs_rho(&zc) <= super::ON_SURFACE_TOL).then_some(zc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Monomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sphere() -> Vec<Polynomial> {
        vec![Polynomial::new(
            2,
            vec![
                Monomial::new(c(1.0, 0.0), vec![1, 0], vec![1, 0]),
                Monomial::new(c(1.0, 0.0), vec![0, 1], vec![0, 1]),
                Monomial::constant(2, c(-1.0, 0.0)),
            ],
        )
        .unwrap()]
    }

    #[test]
    fn sphere_jacobian() {
        let e = HypersurfaceSpec::from_polynomials(2, sphere(), vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let rz = e.rho_z(e.point());
        assert!((rz[(0, 0)]).norm() < 1e-15);
        assert!((rz[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        e.check_hessian_symmetry(&[vec![c(0.3, 0.1), c(0.2, 0.5)]]).unwrap();
    }

    #[test]
    fn rejects_point_off_surface() {
        let err = HypersurfaceSpec::from_polynomials(2, sphere(), vec![c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(err, Err(GeometryError::NotOnHypersurface(_))));
    }

    #[test]
    fn rejects_critical_point() {
        // |z1|^2 at the origin has zero gradient.
        let p = Polynomial::new(2, vec![Monomial::new(c(1.0, 0.0), vec![1, 0], vec![1, 0])]).unwrap();
        let err = HypersurfaceSpec::from_polynomials(2, vec![p], vec![c(0.0, 0.0); 2]);
        assert!(matches!(err, Err(GeometryError::DegenerateHypersurface { .. })));
    }

    #[test]
    fn projection_lands_on_sphere() {
        let e = HypersurfaceSpec::from_polynomials(2, sphere(), vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let q = e.project(&[c(0.1, 0.05), c(0.9, 0.1)], 20).unwrap();
        assert!(e.max_abs_rho(&q) < 1e-14);
    }
}
