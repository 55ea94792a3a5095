use nalgebra::DVector;
use num_complex::Complex64;

use super::{a_from_j, to_complex, to_real, CMatrix, GeometryError, RMatrix, ScalarField, StructureSpec, FD_STEP};

/// `L^J(u)(q)(v) = −d(J* du)(v, Jv)(q)`, the quadratic Levi form, normalized
/// so that `L(|z₁|²)(0)(e₁) = 4` for the standard structure.
///
/// `v` is a real vector of ℝ²ⁿ in interleaved coordinates.
pub fn levi_form_direct(u: &dyn ScalarField, q: &[Complex64], v: &DVector<f64>, s: &StructureSpec) -> Result<f64, GeometryError> {
    let x = to_real(q);
    let j = s.j(q)?;
    let jv = &j * v;
    let hess = u.hessian(x.as_slice());
    let grad = u.gradient(x.as_slice());
    let hv = &hess * v;
    let hjv = &hess * &jv;
    let jt = j.transpose();
    let mut val = jv.dot(&(&jt * &hv)) - v.dot(&(&jt * &hjv));
    if !s.is_standard() {
        let dj_v = directional_j(s, &x, v)?;
        let dj_jv = directional_j(s, &x, &jv)?;
        val += grad.dot(&(dj_v * &jv - dj_jv * v));
    }
    Ok(-val)
}

/// Central difference of `J` along the real direction `w`.
fn directional_j(s: &StructureSpec, x: &DVector<f64>, w: &DVector<f64>) -> Result<RMatrix, GeometryError> {
    let nw = w.norm();
    if nw == 0.0 {
        let m = x.len();
        return Ok(RMatrix::zeros(m, m));
    }
    let h = FD_STEP / nw;
    let jp = s.j(&to_complex((x + w * h).as_slice()))?;
    let jm = s.j(&to_complex((x - w * h).as_slice()))?;
    Ok((jp - jm) / (2.0 * h))
}

/// The same Levi form computed as `Δ(u ∘ f)(0)` for a second-order
/// pseudoholomorphic jet `f` with `f(0) = q`, `df(0)∂_{Re ζ} = v`.
///
/// Coordinates are first changed linearly so that `J(q)` becomes standard.
pub fn levi_form_via_disc(u: &dyn ScalarField, q: &[Complex64], v: &DVector<f64>, s: &StructureSpec) -> Result<f64, GeometryError> {
    let n = s.dim();
    if v.norm() == 0.0 {
        return Ok(0.0);
    }
    let x0 = to_real(q);
    let j0 = s.j(q)?;
    let b = normalizing_frame(&j0, v)?;
    let binv = b.clone().try_inverse().ok_or(GeometryError::SingularFrame)?;

    // J'(y) = B⁻¹ J(q + B y) B and A' = a_from_j(J')
    let a_prime = |y: &[Complex64]| -> Result<CMatrix, GeometryError> {
        let x = &x0 + &b * to_real(y);
        let jx = s.j(&to_complex(x.as_slice()))?;
        a_from_j(&(&binv * jx * &b))
    };
    let vp = to_complex((&binv * v).as_slice());
    let vp_bar: Vec<Complex64> = vp.iter().map(|c| c.conj()).collect();

    let mut a_z = CMatrix::zeros(n, n);
    let mut a_zb = CMatrix::zeros(n, n);
    if !s.is_standard() {
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let h = FD_STEP;
        let mut y = zero.clone();
        for jj in 0..n {
            y[jj] = Complex64::new(h, 0.0);
            let ap = a_prime(&y)?;
            y[jj] = Complex64::new(-h, 0.0);
            let am = a_prime(&y)?;
            y[jj] = Complex64::new(0.0, h);
            let bp = a_prime(&y)?;
            y[jj] = Complex64::new(0.0, -h);
            let bm = a_prime(&y)?;
            y[jj] = zero[jj];
            let dx = (ap - am) / Complex64::from(2.0 * h);
            let dy = (bp - bm) / Complex64::from(2.0 * h);
            let i = Complex64::new(0.0, 1.0);
            let dz = (&dx - &dy * i) * Complex64::from(0.5);
            let dzb = (&dx + &dy * i) * Complex64::from(0.5);
            a_z += dz * vp[jj];
            a_zb += dzb * vp_bar[jj];
        }
    }
    let vbar = nalgebra::DVector::from_vec(vp_bar.clone());
    let alpha = &a_z * &vbar;
    let gamma = (&a_zb * &vbar) * Complex64::from(0.5);

    let eval = |zeta: Complex64| -> f64 {
        let zb = zeta.conj();
        let mod2 = zeta.norm_sqr();
        let y: Vec<Complex64> = (0..n).map(|k| vp[k] * zeta + alpha[k] * mod2 + gamma[k] * zb * zb).collect();
        let x = &x0 + &b * to_real(&y);
        u.value(x.as_slice())
    };
    let scale = to_real(&vp).norm();
    let h = 1e-2 / scale;
    let f0 = eval(Complex64::new(0.0, 0.0));
    let mut lap = 0.0;
    for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
        let g = |t: f64| eval(dir * t);
        lap += (-g(2.0 * h) + 16.0 * g(h) - 30.0 * f0 + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h);
    }
    Ok(lap)
}

/// Columns `[x₁, J x₁, …, xₙ, J xₙ]` with `x₁ = v/|v|`, the rest chosen greedily
/// from the coordinate axes.
fn normalizing_frame(j: &RMatrix, v: &DVector<f64>) -> Result<RMatrix, GeometryError> {
    let m = j.nrows();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut push = |c: DVector<f64>, cols: &mut Vec<DVector<f64>>| -> bool {
        let jc = j * &c;
        let mut trial = ortho.clone();
        for w in [&c, &jc] {
            let mut r = w.clone();
            for b in &trial {
                let d = b.dot(&r);
                r -= b * d;
            }
            let nr = r.norm();
            if nr <= 1e-6 * w.norm() {
                return false;
            }
            trial.push(r / nr);
        }
        ortho = trial;
        cols.push(c);
        cols.push(jc);
        true
    };
    push(v / v.norm(), &mut cols);
    for i in 0..m {
        if cols.len() == m {
            break;
        }
        let mut e = DVector::zeros(m);
        e[i] = 1.0;
        push(e, &mut cols);
    }
    if cols.len() != m {
        return Err(GeometryError::SingularFrame);
    }
    Ok(RMatrix::from_columns(&cols))
}
