use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{
    conjugation, j_standard, operator_norm, realify, CMatrix, GeometryError, Polynomial, RMatrix, FD_STEP,
};

pub type MatrixField = Arc<dyn Fn(&[Complex64]) -> CMatrix + Send + Sync>;
/// `(z, w) ↦ Σ_j w_j ∂A/∂z_j(z)` (or the `z̄_j` analogue).
pub type MatrixDifferential = Arc<dyn Fn(&[Complex64], &[Complex64]) -> CMatrix + Send + Sync>;
pub type RealMatrixField = Arc<dyn Fn(&[Complex64]) -> RMatrix + Send + Sync>;

/// Where the first derivatives of `A` come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    ClosedForm,
    FiniteDifference,
}

const SQUARE_TOL: f64 = 1e-9;

/// An almost complex structure on a domain of ℂⁿ, carried by the matrix
/// field `A(z)` of the Cauchy–Riemann system `∂̄z = A(z) conj(∂z)`.
#[derive(Clone)]
pub struct StructureSpec {
    dim: usize,
    a: MatrixField,
    a_z: Option<MatrixDifferential>,
    a_zbar: Option<MatrixDifferential>,
    j: Option<RealMatrixField>,
    standard: bool,
}

impl fmt::Debug for StructureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureSpec")
            .field("dim", &self.dim)
            .field("standard", &self.standard)
            .field("derivatives", &self.derivative_source())
            .field("closed_form_j", &self.j.is_some())
            .finish()
    }
}

impl StructureSpec {
    pub fn standard(dim: usize) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        let zero: MatrixField = Arc::new(move |_| CMatrix::zeros(dim, dim));
        let dzero: MatrixDifferential = Arc::new(move |_, _| CMatrix::zeros(dim, dim));
        Ok(StructureSpec {
            dim,
            a: zero,
            a_z: Some(dzero.clone()),
            a_zbar: Some(dzero),
            j: Some(Arc::new(move |_| j_standard(dim))),
            standard: true,
        })
    }

    /// Structure whose `A` entries are polynomials in `(z, z̄)`; derivatives
    /// are closed form. Entries not listed are zero.
    pub fn from_polynomials(dim: usize, entries: Vec<(usize, usize, Polynomial)>) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        let mut kept = Vec::new();
        for (r, c, p) in entries {
            if r >= dim || c >= dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: r.max(c) + 1 });
            }
            if p.dim() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if !p.is_zero() {
                kept.push((r, c, p));
            }
        }
        if kept.is_empty() {
            return Self::standard(dim);
        }
        let entries = Arc::new(kept);
        let dz: Arc<Vec<(usize, usize, Vec<Polynomial>)>> = Arc::new(
            entries.iter().map(|(r, c, p)| (*r, *c, (0..dim).map(|j| p.d_z(j)).collect())).collect(),
        );
        let dzb: Arc<Vec<(usize, usize, Vec<Polynomial>)>> = Arc::new(
            entries.iter().map(|(r, c, p)| (*r, *c, (0..dim).map(|j| p.d_zbar(j)).collect())).collect(),
        );
        let e = entries.clone();
        let a: MatrixField = Arc::new(move |z| {
            let mut m = CMatrix::zeros(dim, dim);
            for (r, c, p) in e.iter() {
                m[(*r, *c)] += p.eval(z);
            }
            m
        });
        let differential = |table: Arc<Vec<(usize, usize, Vec<Polynomial>)>>| -> MatrixDifferential {
            Arc::new(move |z, w| {
                let mut m = CMatrix::zeros(dim, dim);
                for (r, c, ps) in table.iter() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (p, wj) in ps.iter().zip(w) {
                        if !p.is_zero() {
                            acc += p.eval(z) * wj;
                        }
                    }
                    m[(*r, *c)] += acc;
                }
                m
            })
        };
        Ok(StructureSpec {
            dim,
            a,
            a_z: Some(differential(dz)),
            a_zbar: Some(differential(dzb)),
            j: None,
            standard: false,
        })
    }

    /// Structure from an arbitrary `A` evaluator; derivatives by central
    /// differences with step `FD_STEP`.
    pub fn from_fn(dim: usize, a: MatrixField) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        Ok(StructureSpec { dim, a, a_z: None, a_zbar: None, j: None, standard: false })
    }

    /// Attach a closed-form `J(z)`, used instead of `j_from_a(A(z))`.
    pub fn with_j(mut self, j: RealMatrixField) -> Self {
        self.j = Some(j);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when `A ≡ 0`.
    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn derivative_source(&self) -> DerivativeSource {
        if self.a_z.is_some() && self.a_zbar.is_some() {
            DerivativeSource::ClosedForm
        } else {
            DerivativeSource::FiniteDifference
        }
    }

    pub fn a(&self, z: &[Complex64]) -> CMatrix {
        (self.a)(z)
    }

    /// `Σ_j w_j ∂A/∂z_j (z)`.
    pub fn a_z(&self, z: &[Complex64], w: &[Complex64]) -> CMatrix {
        match &self.a_z {
            Some(f) => f(z, w),
            None => self.fd_differential(z, w, false),
        }
    }

    /// `Σ_j w_j ∂A/∂z̄_j (z)`.
    pub fn a_zbar(&self, z: &[Complex64], w: &[Complex64]) -> CMatrix {
        match &self.a_zbar {
            Some(f) => f(z, w),
            None => self.fd_differential(z, w, true),
        }
    }

    fn fd_differential(&self, z: &[Complex64], w: &[Complex64], bar: bool) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n, n);
        let mut y = z.to_vec();
        for j in 0..n {
            if w[j] == Complex64::new(0.0, 0.0) {
                continue;
            }
            y[j] = z[j] + FD_STEP;
            let ap = self.a(&y);
            y[j] = z[j] - FD_STEP;
            let am = self.a(&y);
            y[j] = z[j] + Complex64::new(0.0, FD_STEP);
            let bp = self.a(&y);
            y[j] = z[j] - Complex64::new(0.0, FD_STEP);
            let bm = self.a(&y);
            y[j] = z[j];
            let dx = (ap - am) / Complex64::from(2.0 * FD_STEP);
            let dy = (bp - bm) / Complex64::from(2.0 * FD_STEP);
            let i = Complex64::new(0.0, 1.0);
            // d/dz = (d/dx - i d/dy)/2, d/dzbar = (d/dx + i d/dy)/2
            let d = if bar { (dx + dy * i) * Complex64::from(0.5) } else { (dx - dy * i) * Complex64::from(0.5) };
            out += d * w[j];
        }
        out
    }

    /// `J(z)` in interleaved real coordinates.
    pub fn j(&self, z: &[Complex64]) -> Result<RMatrix, GeometryError> {
        match &self.j {
            Some(f) => Ok(f(z)),
            None => j_from_a(&self.a(z)),
        }
    }

    /// Check the structure invariants at the given sample points: `J² = −Id`,
    /// agreement between `A` and `J`, and `‖A‖ < 1`. Returns the largest
    /// operator norm of `A` seen.
    pub fn check_invariants(&self, points: &[Vec<Complex64>]) -> Result<f64, GeometryError> {
        let mut max_norm: f64 = 0.0;
        let id = RMatrix::identity(2 * self.dim, 2 * self.dim);
        for z in points {
            if z.len() != self.dim {
                return Err(GeometryError::DimensionMismatch { expected: self.dim, got: z.len() });
            }
            let a = self.a(z);
            let norm = operator_norm(&a);
            if norm >= 1.0 {
                return Err(GeometryError::NormBoundViolated(norm));
            }
            max_norm = max_norm.max(norm);
            if let Some(jf) = &self.j {
                let j = jf(z);
                let sq = (&j * &j + &id).amax();
                if sq > SQUARE_TOL {
                    return Err(GeometryError::NotAlmostComplex(sq));
                }
                let back = a_from_j(&j)?;
                let defect = (back - a).map(|c| c.norm()).max();
                if defect > 1e-9 {
                    return Err(GeometryError::InconsistentStructure(defect));
                }
            }
        }
        Ok(max_norm)
    }
}

fn check_dim(dim: usize) -> Result<(), GeometryError> {
    if dim < 2 {
        Err(GeometryError::DimensionTooSmall(dim))
    } else {
        Ok(())
    }
}

/// `A v = (J_st + J)⁻¹ (J_st − J)(v̄)`, returned as a complex n×n matrix.
pub fn a_from_j(j: &RMatrix) -> Result<CMatrix, GeometryError> {
    let m = j.nrows();
    if m % 2 != 0 || j.ncols() != m {
        return Err(GeometryError::DimensionMismatch { expected: m + m % 2, got: j.ncols() });
    }
    let n = m / 2;
    let id = RMatrix::identity(m, m);
    let sq = (j * j + &id).amax();
    if sq > SQUARE_TOL * (1.0 + j.amax().powi(2)) {
        return Err(GeometryError::NotAlmostComplex(sq));
    }
    let jst = j_standard(n);
    let sum = &jst + j;
    let lu = sum.lu();
    let inv = lu.try_inverse().ok_or(GeometryError::TooFarFromStandard)?;
    if inv.amax() > 1e12 {
        return Err(GeometryError::TooFarFromStandard);
    }
    let real = inv * (&jst - j) * conjugation(n);
    let mut a = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            a[(r, c)] = Complex64::new(real[(2 * r, 2 * c)], real[(2 * r + 1, 2 * c)]);
        }
    }
    Ok(a)
}

/// Inverse of [`a_from_j`]: `J = P⁻¹ J_st P` with `P = I − [A]·C`, where
/// `[A]` is the real form of `A` and `C` is conjugation.
pub fn j_from_a(a: &CMatrix) -> Result<RMatrix, GeometryError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, got: a.ncols() });
    }
    let norm = operator_norm(a);
    if norm >= 1.0 {
        return Err(GeometryError::NormBoundViolated(norm));
    }
    let m = 2 * n;
    let p = RMatrix::identity(m, m) - realify(a) * conjugation(n);
    let pinv = p.clone().try_inverse().ok_or(GeometryError::TooFarFromStandard)?;
    Ok(pinv * j_standard(n) * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Monomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn standard_structure_has_zero_a() {
        let a = a_from_j(&j_standard(3)).unwrap();
        assert!(a.iter().all(|e| e.norm() == 0.0));
        let j = j_from_a(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(j, j_standard(3));
    }

    #[test]
    fn norm_bound_boundary() {
        let id = CMatrix::identity(2, 2);
        assert!(j_from_a(&(id.clone() * c(0.99, 0.0))).is_ok());
        assert!(matches!(j_from_a(&(id * c(1.01, 0.0))), Err(GeometryError::NormBoundViolated(_))));
    }

    #[test]
    fn single_entry_round_trip() {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 2)] = c(0.5, 0.0);
        let j = j_from_a(&a).unwrap();
        let sq = &j * &j + RMatrix::identity(6, 6);
        assert!(sq.amax() < 1e-12);
        let back = a_from_j(&j).unwrap();
        assert!((back - a).map(|e| e.norm()).max() < 1e-10);
    }

    #[test]
    fn ivashkovich_rosay_entry() {
        // A_32 = conj(z1): the real structure is X ↦ (iX1, iX2, iX3 − 2i z̄1 X̄2).
        let z1 = c(0.3, -0.4);
        let mut a = CMatrix::zeros(3, 3);
        a[(2, 1)] = z1.conj();
        let j = j_from_a(&a).unwrap();
        let x = [c(0.1, 0.2), c(-0.5, 0.7), c(0.3, 0.0)];
        let xr = crate::geometry::to_real(&x);
        let jx = crate::geometry::to_complex((&j * xr).as_slice());
        let i = c(0.0, 1.0);
        let expect = [i * x[0], i * x[1], i * x[2] - i * 2.0 * z1.conj() * x[1].conj()];
        for k in 0..3 {
            assert!((jx[k] - expect[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn polynomial_structure_derivatives_match_fd() {
        let p = Polynomial::new(2, vec![Monomial::new(c(0.1, 0.05), vec![1, 0], vec![0, 2])]).unwrap();
        let s = StructureSpec::from_polynomials(2, vec![(0, 1, p)]).unwrap();
        let s_fd = StructureSpec::from_fn(2, Arc::new({
            let s = s.clone();
            move |z: &[Complex64]| s.a(z)
        }))
        .unwrap();
        assert_eq!(s.derivative_source(), DerivativeSource::ClosedForm);
        assert_eq!(s_fd.derivative_source(), DerivativeSource::FiniteDifference);
        let z = [c(0.2, 0.1), c(-0.3, 0.4)];
        let w = [c(1.0, -0.5), c(0.25, 0.75)];
        let d1 = s.a_z(&z, &w) - s_fd.a_z(&z, &w);
        let d2 = s.a_zbar(&z, &w) - s_fd.a_zbar(&z, &w);
        assert!(d1.map(|e| e.norm()).max() < 1e-9);
        assert!(d2.map(|e| e.norm()).max() < 1e-9);
    }

    #[test]
    fn invariant_check_rejects_large_a() {
        let p = Polynomial::new(2, vec![Monomial::constant(2, c(1.5, 0.0))]).unwrap();
        let s = StructureSpec::from_polynomials(2, vec![(0, 0, p)]).unwrap();
        let pts = vec![vec![c(0.0, 0.0); 2]];
        assert!(matches!(s.check_invariants(&pts), Err(GeometryError::NormBoundViolated(_))));
    }
}
