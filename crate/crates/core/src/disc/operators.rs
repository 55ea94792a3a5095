use nalgebra::DVector;
use num_complex::Complex64;

use super::{BoundaryFunction, DiscError, DiscFunction, ValueKind};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance on `u(1) = 0` for [`k1`].
pub const PIN_TOL: f64 = 1e-10;

fn apply_real(mat: &nalgebra::DMatrix<f64>, col: &[Complex64]) -> Vec<Complex64> {
    let m = col.len();
    let re = mat * DVector::from_iterator(m, col.iter().map(|v| v.re));
    let im = mat * DVector::from_iterator(m, col.iter().map(|v| v.im));
    (0..m).map(|i| Complex64::new(re[i], im[i])).collect()
}

/// Cauchy–Green transform `Tf(ζ) = −(1/π) ∫_𝔻 f(τ)/(τ − ζ) dA(τ)`.
///
/// Mode `k` of `f` feeds mode `k − 1` of `Tf`, whose radial profile solves
/// `r h' − (k − 1) h = 2 r g` with `h(1) = 0` when `k ≥ 1`. The mode `−N/2`
/// has no image on the grid and is dropped.
pub fn cauchy_green_t(f: &DiscFunction) -> DiscFunction {
    let grid = f.grid().clone();
    let (n, m) = (grid.n(), grid.m());
    let r = grid.radii().to_vec();
    let mut out = DiscFunction::zeros(grid.clone(), f.comps());
    for c in 0..f.comps() {
        let src = f.coef(c);
        let dst = out.coef_mut(c);
        for idx in 0..n {
            let k = grid.mode(idx);
            let Some(tidx) = grid.index_of(k - 1) else { continue };
            let col = &src[idx * m..(idx + 1) * m];
            if col.iter().all(|v| *v == ZERO) {
                continue;
            }
            let mut rhs: Vec<Complex64> = col.iter().zip(&r).map(|(g, ri)| g * (2.0 * ri)).collect();
            if k >= 1 {
                rhs[0] = ZERO;
            }
            let h = apply_real(grid.t_solve(idx), &rhs);
            dst[tidx * m..(tidx + 1) * m].copy_from_slice(&h);
        }
    }
    out
}

fn wirtinger(f: &DiscFunction, bar: bool) -> DiscFunction {
    let grid = f.grid().clone();
    let (n, m) = (grid.n(), grid.m());
    let r = grid.radii().to_vec();
    let mut out = DiscFunction::zeros(grid.clone(), f.comps());
    for c in 0..f.comps() {
        let src = f.coef(c);
        let dst = out.coef_mut(c);
        for idx in 0..n {
            let k = grid.mode(idx);
            let target = if bar { k + 1 } else { k - 1 };
            let Some(tidx) = grid.index_of(target) else { continue };
            let col = &src[idx * m..(idx + 1) * m];
            let dcol = apply_real(grid.d_fold(k), col);
            let sign = if bar { -1.0 } else { 1.0 };
            for mi in 0..m {
                dst[tidx * m + mi] = 0.5 * (dcol[mi] + col[mi] * (sign * k as f64 / r[mi]));
            }
        }
    }
    out
}

/// `∂f/∂ζ̄`, spectrally.
pub fn d_bar(f: &DiscFunction) -> DiscFunction {
    wirtinger(f, true)
}

/// `∂f/∂ζ`, spectrally.
pub fn d(f: &DiscFunction) -> DiscFunction {
    wirtinger(f, false)
}

/// Cauchy integral of boundary data: keeps the modes `k ≥ 0`, extended as `c_k ζ^k`.
pub fn cauchy_integral_k(f: &BoundaryFunction) -> DiscFunction {
    let grid = f.grid().clone();
    let (n, m) = (grid.n(), grid.m());
    let r = grid.radii().to_vec();
    let mut out = DiscFunction::zeros(grid.clone(), f.comps());
    for c in 0..f.comps() {
        let co = f.coefficients(c);
        let dst = out.coef_mut(c);
        for idx in 0..n / 2 {
            let k = idx as i32;
            for mi in 0..m {
                dst[idx * m + mi] = co[idx] * r[mi].powi(k);
            }
        }
    }
    out
}

/// `K₁u = Ku − (Ku)(1)` for real data with `u(1) = 0`.
pub fn k1(u: &BoundaryFunction) -> Result<DiscFunction, DiscError> {
    let scale = u.sup_norm().max(1.0);
    for (c, v) in u.value_at_one().iter().enumerate() {
        if v.norm() > PIN_TOL * scale {
            return Err(DiscError::NotPinned { component: c, value: v.norm() });
        }
    }
    if !u.is_real_within(PIN_TOL * scale) {
        return Err(DiscError::NotReal);
    }
    let ku = cauchy_integral_k(u);
    let at_one: Vec<Complex64> = ku.boundary_values_at_one();
    Ok(ku.add_constant(&at_one.iter().map(|v| -v).collect::<Vec<_>>()))
}

/// Holomorphic `F` with `Re F = u` on the circle (Nyquist mode dropped) and
/// `Im F(1) = 0`. For `u(1) = 0` this is `2K₁u`.
pub fn schwarz(u: &BoundaryFunction) -> DiscFunction {
    let grid = u.grid().clone();
    let (n, m) = (grid.n(), grid.m());
    let r = grid.radii().to_vec();
    let mut out = DiscFunction::zeros(grid.clone(), u.comps());
    for c in 0..u.comps() {
        let real: Vec<Complex64> = u.samples(c).iter().map(|v| Complex64::new(v.re, 0.0)).collect();
        let mut co = real;
        grid.forward(&mut co);
        let mut a = vec![ZERO; n / 2];
        a[0] = Complex64::new(co[0].re, 0.0);
        let mut im_sum = 0.0;
        for k in 1..n / 2 {
            a[k] = 2.0 * co[k];
            im_sum += a[k].im;
        }
        a[0].im = -im_sum;
        let dst = out.coef_mut(c);
        for (k, ak) in a.iter().enumerate() {
            for mi in 0..m {
                dst[k * m + mi] = ak * r[mi].powi(k as i32);
            }
        }
    }
    out
}

/// Boundary trace of the harmonic conjugate of real `u`, normalized to vanish
/// at `θ = 0`.
pub fn harmonic_conjugate(u: &BoundaryFunction) -> BoundaryFunction {
    let grid = u.grid().clone();
    let n = grid.n();
    let coefs = (0..u.comps())
        .map(|c| {
            let mut co: Vec<Complex64> = u.samples(c).iter().map(|v| Complex64::new(v.re, 0.0)).collect();
            grid.forward(&mut co);
            for (idx, v) in co.iter_mut().enumerate() {
                let k = grid.mode(idx);
                *v = if k == 0 || idx == n / 2 { ZERO } else { *v * Complex64::new(0.0, -(k.signum() as f64)) };
            }
            co
        })
        .collect();
    let v = BoundaryFunction::from_coefficients(grid.clone(), ValueKind::Real, coefs).expect("sizes match");
    let shift: Vec<f64> = (0..u.comps()).map(|c| v.samples(c)[0].re).collect();
    let samples = (0..u.comps()).map(|c| v.samples(c).iter().map(|x| x.re - shift[c]).collect()).collect();
    BoundaryFunction::from_real_samples(grid, samples).expect("sizes match")
}

impl DiscFunction {
    /// Value at `ζ = 1` (radial node 0, angle 0).
    pub fn boundary_values_at_one(&self) -> Vec<Complex64> {
        let (n, m) = (self.grid().n(), self.grid().m());
        (0..self.comps())
            .map(|c| (0..n).map(|idx| self.coef(c)[idx * m]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::DiscGrid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn t_of_constants_and_identity() {
        let g = DiscGrid::shared(64, 16).unwrap();
        let one = DiscFunction::from_fn(g.clone(), 1, |_, _| c(1.0, 0.0));
        let t1 = cauchy_green_t(&one);
        let tz = cauchy_green_t(&DiscFunction::from_fn(g.clone(), 1, |_, z| z));
        for zeta in [c(0.3, 0.2), c(-0.9, 0.1), c(0.0, 0.0)] {
            assert!((t1.eval(zeta)[0] - zeta.conj()).norm() < 1e-12);
            assert!((tz.eval(zeta)[0] - (zeta.norm_sqr() - 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn wirtinger_examples() {
        let g = DiscGrid::shared(64, 16).unwrap();
        let sq = DiscFunction::from_fn(g.clone(), 1, |_, z| z * z);
        let zeta = c(0.4, -0.3);
        assert!((d(&sq).eval(zeta)[0] - 2.0 * zeta).norm() < 1e-12);
        assert!(d_bar(&sq).sup_norm() < 1e-12);
        let m2 = DiscFunction::from_fn(g, 1, |_, z| c(z.norm_sqr(), 0.0));
        assert!((d(&m2).eval(zeta)[0] - zeta.conj()).norm() < 1e-12);
        assert!((d_bar(&m2).eval(zeta)[0] - zeta).norm() < 1e-12);
    }

    #[test]
    fn k_and_k1_examples() {
        let g = DiscGrid::shared(64, 16).unwrap();
        let zb = BoundaryFunction::from_fn_complex(g.clone(), 1, |_, t| t.conj());
        assert!(cauchy_integral_k(&zb).sup_norm() < 1e-14);
        let re = BoundaryFunction::from_fn_real(g.clone(), 1, |_, t| 2.0 * t.cos());
        let zeta = c(0.2, 0.5);
        assert!((cauchy_integral_k(&re).eval(zeta)[0] - zeta).norm() < 1e-13);
        let u = BoundaryFunction::from_fn_real(g.clone(), 1, |_, t| t.cos() - 1.0);
        let k = k1(&u).unwrap();
        assert!((k.eval(zeta)[0] - (zeta * 0.5 - 0.5)).norm() < 1e-13);
        let bad = BoundaryFunction::from_fn_real(g, 1, |_, t| t.cos());
        assert!(matches!(k1(&bad), Err(DiscError::NotPinned { .. })));
    }

    #[test]
    fn conjugate_matrix_matches_fft() {
        let g = DiscGrid::shared(32, 8).unwrap();
        let u = BoundaryFunction::from_fn_real(g.clone(), 1, |_, t| (2.0 * t).cos() + 0.3 * (5.0 * t).sin() - 0.1 * t.cos());
        let v = harmonic_conjugate(&u);
        let mv = g.conjugate_matrix() * DVector::from_vec(u.real_samples(0));
        for l in 0..32 {
            assert!((mv[l] - v.samples(0)[l].re).abs() < 1e-13);
        }
        let cos = BoundaryFunction::from_fn_real(g, 1, |_, t| t.cos());
        let s = harmonic_conjugate(&cos);
        for l in 0..32 {
            assert!((s.samples(0)[l].re - s.grid().theta(l).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn schwarz_is_twice_k1() {
        let g = DiscGrid::shared(32, 8).unwrap();
        let u = BoundaryFunction::from_fn_real(g, 1, |_, t| (2.0 * t).cos() - 1.0 + 0.5 * (3.0 * t).sin());
        let a = schwarz(&u);
        let b = k1(&u).unwrap().scaled(c(2.0, 0.0));
        assert!(a.add_scaled(&b, c(-1.0, 0.0)).sup_norm() < 1e-13);
    }
}
