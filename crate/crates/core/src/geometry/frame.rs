use nalgebra::DVector;
use num_complex::Complex64;

use super::{CMatrix, GeometryError, HypersurfaceSpec, RMatrix, StructureSpec, ON_SURFACE_TOL};

const INDEPENDENCE_TOL: f64 = 1e-8;

/// Tangent data of `E` at a point.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    pub point: Vec<Complex64>,
    /// Orthonormal basis of `T_qE` (2n − d real vectors).
    pub real_tangent: Vec<DVector<f64>>,
    /// Orthonormal vectors `v_1..v_{n−d}` such that `{v_i, J v_i}` spans `H^J_qE`.
    pub holomorphic: Vec<DVector<f64>>,
    /// `J v_i` for the vectors above.
    pub holomorphic_j: Vec<DVector<f64>>,
    /// Unit vectors `−∇ρ^k / |∇ρ^k|`, pointing into `{ρ^k < 0}`.
    pub inward_normals: Vec<DVector<f64>>,
}

/// Orthonormalize `rows`; returns the orthonormal set and whether it was full rank.
fn orthonormal(rows: &[DVector<f64>]) -> (Vec<DVector<f64>>, bool) {
    let mut out: Vec<DVector<f64>> = Vec::new();
    let mut full = true;
    for r in rows {
        let scale = r.norm();
        let mut w = r.clone();
        for b in &out {
            let c = b.dot(&w);
            w -= b * c;
        }
        let nw = w.norm();
        if scale == 0.0 || nw <= INDEPENDENCE_TOL * scale {
            full = false;
            continue;
        }
        out.push(w / nw);
    }
    (out, full)
}

fn project_out(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut w = v.clone();
    for b in basis {
        let c = b.dot(&w);
        w -= b * c;
    }
    w
}

pub fn holomorphic_tangent_basis(
    e: &HypersurfaceSpec,
    q: &[Complex64],
    s: &StructureSpec,
) -> Result<TangentFrame, GeometryError> {
    holomorphic_tangent_basis_with_tol(e, q, s, ON_SURFACE_TOL)
}

/// As [`holomorphic_tangent_basis`] with a caller-chosen membership tolerance.
pub fn holomorphic_tangent_basis_with_tol(
    e: &HypersurfaceSpec,
    q: &[Complex64],
    s: &StructureSpec,
    tol: f64,
) -> Result<TangentFrame, GeometryError> {
    let n = e.dim();
    let d = e.codim();
    if q.len() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, got: q.len() });
    }
    if s.dim() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, got: s.dim() });
    }
    let defect = e.max_abs_rho(q);
    if defect > tol {
        return Err(GeometryError::NotOnHypersurface(defect));
    }
    let j = s.j(q)?;
    let grads: Vec<DVector<f64>> = (0..d).map(|k| e.gradient(k, q)).collect();
    let (normal, full) = orthonormal(&grads);
    if !full {
        return Err(GeometryError::DegenerateHypersurface { rank: normal.len(), codim: d });
    }
    // H = ker dρ ∩ ker (dρ ∘ J)
    let mut constraints = grads.clone();
    constraints.extend(grads.iter().map(|g| j.transpose() * g));
    let (cons, full) = orthonormal(&constraints);
    if !full {
        return Err(GeometryError::DegenerateHypersurface { rank: cons.len() / 2, codim: d });
    }

    let m = 2 * n;
    let unit = |i: usize| {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        v
    };
    let candidates: Vec<DVector<f64>> = (0..n).map(|i| unit(2 * i)).chain((0..n).map(|i| unit(2 * i + 1))).collect();

    let mut holomorphic = Vec::new();
    let mut holomorphic_j = Vec::new();
    let mut span: Vec<DVector<f64>> = Vec::new();
    for c in &candidates {
        if holomorphic.len() == n - d {
            break;
        }
        let w = project_out(&project_out(c, &cons), &span);
        let nw = w.norm();
        if nw <= 1e-6 {
            continue;
        }
        let v = w / nw;
        let jv = &j * &v;
        span.push(v.clone());
        let jw = project_out(&jv, &span);
        span.push(jw.normalize());
        holomorphic.push(v);
        holomorphic_j.push(jv);
    }
    if holomorphic.len() < n - d {
        return Err(GeometryError::DegenerateHypersurface { rank: holomorphic.len(), codim: d });
    }

    let mut real_tangent = Vec::new();
    let mut tspan: Vec<DVector<f64>> = Vec::new();
    for c in span.iter().chain(candidates.iter()) {
        if real_tangent.len() == m - d {
            break;
        }
        let w = project_out(&project_out(c, &normal), &tspan);
        let nw = w.norm();
        if nw <= 1e-6 {
            continue;
        }
        let v = w / nw;
        tspan.push(v.clone());
        real_tangent.push(v);
    }

    let inward_normals = grads.iter().map(|g| -g / g.norm()).collect();
    Ok(TangentFrame { point: q.to_vec(), real_tangent, holomorphic, holomorphic_j, inward_normals })
}

/// Unitary frame of ℂⁿ at `p`: the first `n − d` columns span `ker ρ_z(p)`,
/// the last `d` span its orthogonal complement.
#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    q: CMatrix,
    codim: usize,
}

impl AdaptedFrame {
    pub fn new(e: &HypersurfaceSpec, p: &[Complex64]) -> Result<Self, GeometryError> {
        let n = e.dim();
        let d = e.codim();
        let rz = e.rho_z(p);
        let mut normal: Vec<nalgebra::DVector<Complex64>> = Vec::new();
        for k in 0..d {
            let mut w = rz.row(k).transpose().map(|c| c.conj());
            let scale = w.norm();
            for b in &normal {
                let c = b.dotc(&w);
                w -= b * c;
            }
            let nw = w.norm();
            if scale == 0.0 || nw <= INDEPENDENCE_TOL * scale {
                return Err(GeometryError::SingularFrame);
            }
            normal.push(w.unscale(nw));
        }
        let mut tangent: Vec<nalgebra::DVector<Complex64>> = Vec::new();
        for i in 0..n {
            if tangent.len() == n - d {
                break;
            }
            let mut w = nalgebra::DVector::<Complex64>::zeros(n);
            w[i] = Complex64::new(1.0, 0.0);
            for b in normal.iter().chain(tangent.iter()) {
                let c = b.dotc(&w);
                w -= b * c;
            }
            let nw = w.norm();
            if nw <= 1e-6 {
                continue;
            }
            tangent.push(w.unscale(nw));
        }
        if tangent.len() != n - d {
            return Err(GeometryError::SingularFrame);
        }
        let cols: Vec<_> = tangent.into_iter().chain(normal).collect();
        Ok(AdaptedFrame { q: CMatrix::from_columns(&cols), codim: d })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn tangential_count(&self) -> usize {
        self.q.nrows() - self.codim
    }

    /// Frame coordinates `Q* w`.
    pub fn coords(&self, w: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|l| (0..n).map(|j| self.q[(j, l)].conj() * w[j]).sum())
            .collect()
    }

    /// `Σ_l ξ_l b_l`.
    pub fn combine(&self, xi: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|l| self.q[(j, l)] * xi[l]).sum()).collect()
    }

    pub fn column(&self, l: usize) -> Vec<Complex64> {
        self.q.column(l).iter().cloned().collect()
    }
}

/// Real matrix whose columns are the real tangent basis.
pub(crate) fn tangent_matrix(frame: &TangentFrame) -> RMatrix {
    RMatrix::from_columns(&frame.real_tangent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{to_real, Monomial, Polynomial};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn check_annihilated(e: &HypersurfaceSpec, s: &StructureSpec, f: &TangentFrame) {
        let q = &f.point;
        for k in 0..e.codim() {
            let g = e.gradient(k, q);
            for (v, jv) in f.holomorphic.iter().zip(&f.holomorphic_j) {
                assert!(g.dot(v).abs() < 1e-12);
                assert!(g.dot(jv).abs() < 1e-12);
                let jv2 = s.j(q).unwrap() * v;
                assert!((jv2 - jv).amax() < 1e-14);
            }
            for t in &f.real_tangent {
                assert!(g.dot(t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_hypersurface_in_c2() {
        // Im z2 = 0, written as Re(-i z2)
        let rho = Polynomial::new(2, vec![Monomial::new(c(0.0, -1.0), vec![0, 1], vec![0, 0])]).unwrap();
        let e = HypersurfaceSpec::from_polynomials(2, vec![rho], vec![c(0.0, 0.0); 2]).unwrap();
        let s = StructureSpec::standard(2).unwrap();
        let f = holomorphic_tangent_basis(&e, e.point(), &s).unwrap();
        assert_eq!(f.holomorphic.len(), 1);
        assert!((f.holomorphic[0][0] - 1.0).abs() < 1e-14);
        assert_eq!(f.real_tangent.len(), 3);
        check_annihilated(&e, &s, &f);
    }

    #[test]
    fn ivashkovich_rosay_frame_at_unit_point() {
        let rho = Polynomial::new(3, vec![Monomial::new(c(0.0, -1.0), vec![0, 0, 1], vec![0, 0, 0])]).unwrap();
        let q = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let e = HypersurfaceSpec::from_polynomials(3, vec![rho], q.clone()).unwrap();
        let i = c(0.0, 1.0);
        let s = StructureSpec::from_fn(3, std::sync::Arc::new(|z: &[Complex64]| {
            let mut a = CMatrix::zeros(3, 3);
            a[(2, 1)] = z[0].conj();
            a
        }))
        .unwrap()
        .with_j(std::sync::Arc::new(move |z: &[Complex64]| {
            let mut m = RMatrix::zeros(6, 6);
            for col in 0..6 {
                let mut x = vec![c(0.0, 0.0); 3];
                x[col / 2] = if col % 2 == 0 { c(1.0, 0.0) } else { i };
                let y = [i * x[0], i * x[1], i * x[2] - i * 2.0 * z[0].conj() * x[1].conj()];
                m.set_column(col, &to_real(&y));
            }
            m
        }));
        let f = holomorphic_tangent_basis(&e, &q, &s).unwrap();
        assert_eq!(f.holomorphic.len(), 2);
        check_annihilated(&e, &s, &f);
    }

    #[test]
    fn adapted_frame_on_sphere() {
        let rho = Polynomial::new(
            2,
            vec![
                Monomial::new(c(1.0, 0.0), vec![1, 0], vec![1, 0]),
                Monomial::new(c(1.0, 0.0), vec![0, 1], vec![0, 1]),
                Monomial::constant(2, c(-1.0, 0.0)),
            ],
        )
        .unwrap();
        let e = HypersurfaceSpec::from_polynomials(2, vec![rho], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let fr = AdaptedFrame::new(&e, e.point()).unwrap();
        assert!((fr.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((fr.matrix()[(1, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        let w = [c(0.3, 0.2), c(-0.1, 0.4)];
        let back = fr.combine(&fr.coords(&w));
        assert!((back[0] - w[0]).norm() < 1e-15 && (back[1] - w[1]).norm() < 1e-15);
    }
}
