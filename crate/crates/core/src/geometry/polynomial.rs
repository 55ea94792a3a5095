use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{to_complex, GeometryError, FD_STEP};

/// One term `coef · z^z · z̄^zbar` of a polynomial in `(z, z̄)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: Complex64,
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
}

impl Monomial {
    pub fn new(coef: Complex64, z: Vec<u32>, zbar: Vec<u32>) -> Self {
        Monomial { coef, z, zbar }
    }

    pub fn constant(dim: usize, coef: Complex64) -> Self {
        Monomial::new(coef, vec![0; dim], vec![0; dim])
    }
}

/// Complex polynomial in `z` and `z̄` on ℂⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self, GeometryError> {
        for t in &terms {
            for len in [t.z.len(), t.zbar.len()] {
                if len != dim {
                    return Err(GeometryError::BadExponents { expected: dim, got: len });
                }
            }
        }
        let terms = terms.into_iter().filter(|t| t.coef != Complex64::new(0.0, 0.0)).collect();
        Ok(Polynomial { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial { coef: t.coef * c, ..t.clone() })
            .collect();
        Polynomial::new(self.dim, terms).expect("exponents already validated")
    }

    pub fn sum(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Polynomial::new(self.dim, terms).expect("exponents already validated")
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = t.coef;
            for (j, zj) in z.iter().enumerate() {
                if t.z[j] > 0 {
                    v *= zj.powu(t.z[j]);
                }
                if t.zbar[j] > 0 {
                    v *= zj.conj().powu(t.zbar[j]);
                }
            }
            acc += v;
        }
        acc
    }

    /// `∂/∂z_j`.
    pub fn d_z(&self, j: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.z[j] > 0)
            .map(|t| {
                let mut z = t.z.clone();
                let e = z[j];
                z[j] -= 1;
                Monomial { coef: t.coef * e as f64, z, zbar: t.zbar.clone() }
            })
            .collect();
        Polynomial { dim: self.dim, terms }
    }

    /// `∂/∂z̄_j`.
    pub fn d_zbar(&self, j: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.zbar[j] > 0)
            .map(|t| {
                let mut zbar = t.zbar.clone();
                let e = zbar[j];
                zbar[j] -= 1;
                Monomial { coef: t.coef * e as f64, z: t.z.clone(), zbar }
            })
            .collect();
        Polynomial { dim: self.dim, terms }
    }

    /// Derivative along the real coordinate `x_idx` of ℝ²ⁿ (interleaved).
    pub fn d_real(&self, idx: usize) -> Polynomial {
        let j = idx / 2;
        let (dz, dzb) = (self.d_z(j), self.d_zbar(j));
        if idx % 2 == 0 {
            dz.sum(&dzb)
        } else {
            let i = Complex64::new(0.0, 1.0);
            dz.scaled(i).sum(&dzb.scaled(-i))
        }
    }
}

/// Real-valued function on ℝ²ⁿ with first and second derivatives.
pub trait ScalarField: Sync {
    /// Real dimension `2n`.
    fn real_dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let m = self.real_dim();
        let mut g = DVector::zeros(m);
        let mut y = x.to_vec();
        for i in 0..m {
            y[i] = x[i] + FD_STEP;
            let fp = self.value(&y);
            y[i] = x[i] - FD_STEP;
            let fm = self.value(&y);
            y[i] = x[i];
            g[i] = (fp - fm) / (2.0 * FD_STEP);
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.real_dim();
        let h = 1e-4;
        let mut out = DMatrix::zeros(m, m);
        let mut y = x.to_vec();
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                    y[i] += si * h;
                    y[j] += sj * h;
                    acc += w * self.value(&y);
                    y[i] = x[i];
                    y[j] = x[j];
                }
                let v = acc / (4.0 * h * h);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

/// `Re P(z, z̄)` with closed-form gradient and Hessian.
#[derive(Clone, Debug)]
pub struct RealPolynomialField {
    poly: Polynomial,
    grad: Vec<Polynomial>,
    hess: Vec<Polynomial>,
}

impl RealPolynomialField {
    pub fn new(poly: Polynomial) -> Self {
        let m = 2 * poly.dim();
        let grad: Vec<Polynomial> = (0..m).map(|i| poly.d_real(i)).collect();
        let mut hess = Vec::with_capacity(m * m);
        for g in &grad {
            for j in 0..m {
                hess.push(g.d_real(j));
            }
        }
        RealPolynomialField { poly, grad, hess }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn value_at(&self, z: &[Complex64]) -> f64 {
        self.poly.eval(z).re
    }

    /// Complex derivative `∂(Re P)/∂z_j = ½(∂P/∂z_j + conj(∂P/∂z̄_j))`, as a row.
    pub fn d_z_row(&self, z: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim())
            .map(|j| {
                let gx = self.grad[2 * j].eval(z).re;
                let gy = self.grad[2 * j + 1].eval(z).re;
                Complex64::new(0.5 * gx, -0.5 * gy)
            })
            .collect()
    }

    pub fn gradient_at(&self, z: &[Complex64]) -> DVector<f64> {
        DVector::from_iterator(self.grad.len(), self.grad.iter().map(|g| g.eval(z).re))
    }

    pub fn hessian_at(&self, z: &[Complex64]) -> DMatrix<f64> {
        let m = self.grad.len();
        DMatrix::from_iterator(m, m, self.hess.iter().map(|h| h.eval(z).re)).transpose()
    }
}

impl ScalarField for RealPolynomialField {
    fn real_dim(&self) -> usize {
        2 * self.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.value_at(&to_complex(x))
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        self.gradient_at(&to_complex(x))
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        self.hessian_at(&to_complex(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn modulus_squared_derivatives() {
        // |z1|^2 on C^2
        let p = Polynomial::new(2, vec![Monomial::new(c(1.0, 0.0), vec![1, 0], vec![1, 0])]).unwrap();
        let f = RealPolynomialField::new(p);
        let z = [c(0.3, -0.2), c(1.0, 0.5)];
        assert!((f.value_at(&z) - 0.13).abs() < 1e-15);
        let g = f.gradient_at(&z);
        assert!((g[0] - 0.6).abs() < 1e-14 && (g[1] + 0.4).abs() < 1e-14);
        let h = f.hessian_at(&z);
        assert_eq!(h[(0, 0)], 2.0);
        assert_eq!(h[(1, 1)], 2.0);
        assert_eq!(h[(0, 1)], 0.0);
        let row = f.d_z_row(&z);
        // d|z|^2/dz = zbar
        assert!((row[0] - z[0].conj()).norm() < 1e-14);
    }

    #[test]
    fn closed_form_matches_finite_differences() {
        let p = Polynomial::new(
            2,
            vec![
                Monomial::new(c(0.5, 1.0), vec![2, 0], vec![0, 1]),
                Monomial::new(c(-1.0, 0.25), vec![0, 1], vec![1, 1]),
                Monomial::new(c(0.0, -1.0), vec![0, 1], vec![0, 0]),
            ],
        )
        .unwrap();
        let f = RealPolynomialField::new(p);
        struct Fd<'a>(&'a RealPolynomialField);
        impl ScalarField for Fd<'_> {
            fn real_dim(&self) -> usize {
                4
            }
            fn value(&self, x: &[f64]) -> f64 {
                self.0.value(x)
            }
        }
        let x = [0.2, -0.1, 0.4, 0.3];
        let (g1, g2) = (f.gradient(&x), Fd(&f).gradient(&x));
        assert!((g1 - g2).amax() < 1e-8);
        let (h1, h2) = (f.hessian(&x), Fd(&f).hessian(&x));
        assert!((h1 - h2).amax() < 1e-5);
    }

    #[test]
    fn rejects_bad_exponents() {
        let err = Polynomial::new(2, vec![Monomial::new(c(1.0, 0.0), vec![1], vec![0, 0])]);
        assert!(matches!(err, Err(GeometryError::BadExponents { .. })));
    }
}
