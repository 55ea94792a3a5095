use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{DiscParameters, SolverError};
use crate::disc::{cauchy_green_t, d, d_bar, schwarz, BoundaryFunction, DiscFunction, DiscGrid};
use crate::geometry::{AdaptedFrame, CMatrix, GeometryError, HypersurfaceSpec, StructureSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residuals {
    pub pde: f64,
    pub bc: f64,
    pub pin: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.pde.max(self.bc).max(self.pin)
    }
}

/// A converged solution of the Bishop boundary problem.
#[derive(Clone, Debug)]
pub struct BishopDisc {
    pub z: DiscFunction,
    pub residual_pde: f64,
    pub residual_bc: f64,
    pub residual_pin: f64,
    pub iterations: usize,
    pub epsilon: f64,
    pub tolerance: f64,
    point: Vec<Complex64>,
    data: BoundaryFunction,
    frame: AdaptedFrame,
    /// Real boundary samples of the normal frame components, for warm starts.
    normal_data: Vec<Vec<f64>>,
}

impl BishopDisc {
    pub fn point(&self) -> &[Complex64] {
        &self.point
    }

    /// Unscaled tangential boundary data `u`.
    pub fn data(&self) -> &BoundaryFunction {
        &self.data
    }

    pub fn frame(&self) -> &AdaptedFrame {
        &self.frame
    }

    pub fn residuals(&self) -> Residuals {
        Residuals { pde: self.residual_pde, bc: self.residual_bc, pin: self.residual_pin }
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        self.z.grid()
    }

    pub fn eval(&self, zeta: Complex64) -> Vec<Complex64> {
        self.z.eval(zeta)
    }

    /// `sup_𝔻 |z − p|` over grid nodes.
    pub fn deviation(&self) -> f64 {
        let neg: Vec<Complex64> = self.point.iter().map(|v| -v).collect();
        self.z.add_constant(&neg).sup_vector_norm()
    }
}

/// Per-node vectors `[node][comp]` from per-component grid values.
pub(crate) fn by_node(values: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let len = values.first().map_or(0, |v| v.len());
    (0..len).map(|i| values.iter().map(|v| v[i]).collect()).collect()
}

pub(crate) fn by_component(nodes: &[Vec<Complex64>], comps: usize) -> Vec<Vec<Complex64>> {
    (0..comps).map(|c| nodes.iter().map(|v| v[c]).collect()).collect()
}

pub(crate) fn mat_vec(a: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum()).collect()
}

/// Grid values of `A(z) conj(∂z)`, node-major. Fails when `‖A‖ ≥ 1` somewhere.
pub(crate) fn beltrami_term(s: &StructureSpec, z_nodes: &[Vec<Complex64>], dz_nodes: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>, SolverError> {
    let mut out = Vec::with_capacity(z_nodes.len());
    for (zn, dzn) in z_nodes.iter().zip(dz_nodes) {
        let a = s.a(zn);
        check_norm(&a)?;
        let cdz: Vec<Complex64> = dzn.iter().map(|v| v.conj()).collect();
        out.push(mat_vec(&a, &cdz));
    }
    Ok(out)
}

pub(crate) fn check_norm(a: &CMatrix) -> Result<(), SolverError> {
    let fro = a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if fro >= 1.0 {
        let op = a.clone().singular_values().iter().cloned().fold(0.0, f64::max);
        if op >= 1.0 {
            return Err(SolverError::Geometry(GeometryError::NormBoundViolated(op)));
        }
    }
    Ok(())
}

/// Frame coordinates `Q* w` of a disc function.
pub(crate) fn frame_coords(frame: &AdaptedFrame, w: &DiscFunction) -> DiscFunction {
    let n = frame.dim();
    let q = frame.matrix();
    let parts: Vec<DiscFunction> = (0..n)
        .map(|l| {
            let mut acc = DiscFunction::zeros(w.grid().clone(), 1);
            for j in 0..n {
                let c = q[(j, l)].conj();
                if c != ZERO {
                    acc = acc.add_scaled(&w.component(j), c);
                }
            }
            acc
        })
        .collect();
    DiscFunction::stack(&parts)
}

/// `base + Q ξ` for frame coordinates `ξ`.
pub(crate) fn from_frame(frame: &AdaptedFrame, base: &[Complex64], xi: &DiscFunction) -> DiscFunction {
    let n = frame.dim();
    let q = frame.matrix();
    let parts: Vec<DiscFunction> = (0..n)
        .map(|j| {
            let mut acc = DiscFunction::zeros(xi.grid().clone(), 1);
            for l in 0..n {
                let c = q[(j, l)];
                if c != ZERO {
                    acc = acc.add_scaled(&xi.component(l), c);
                }
            }
            acc
        })
        .collect();
    DiscFunction::stack(&parts).add_constant(base)
}

/// Holomorphic function with boundary real part `g` (Nyquist mode aside),
/// adjusted by a constant so that its value at 1 is exactly `g(1) + i·im_at_one`.
pub(crate) fn pinned_schwarz(grid: &Arc<DiscGrid>, g: &[f64], im_at_one: f64) -> DiscFunction {
    let bf = BoundaryFunction::from_real_samples(grid.clone(), vec![g.to_vec()]).expect("sizes match");
    let f = schwarz(&bf);
    let f1 = f.boundary_values_at_one()[0];
    f.add_constant(&[Complex64::new(g[0] - f1.re, im_at_one - f1.im)])
}

/// Jacobian of `g ↦ ρ(z_bd)` with `z_bd = base + Σ_l b_l (g_l + i H̃ g_l)`.
pub(crate) fn boundary_jacobian(e: &HypersurfaceSpec, frame: &AdaptedFrame, zbd: &[Vec<Complex64>], conj: &DMatrix<f64>) -> DMatrix<f64> {
    let nb = zbd.len();
    let d = e.codim();
    let n = e.dim();
    let nt = n - d;
    let q = frame.matrix();
    let mut jac = DMatrix::zeros(d * nb, d * nb);
    for (j, zj) in zbd.iter().enumerate() {
        let rz = e.rho_z(zj);
        for k in 0..d {
            for l in 0..d {
                let b: Complex64 = (0..n).map(|i| rz[(k, i)] * q[(i, nt + l)]).sum();
                jac[(k * nb + j, l * nb + j)] += 2.0 * b.re;
                if b.im != 0.0 {
                    for i in 0..nb {
                        jac[(k * nb + j, l * nb + i)] -= 2.0 * b.im * conj[(j, i)];
                    }
                }
            }
        }
    }
    jac
}

/// Boundary samples `base_j + Σ_l b_l (g_l + i H̃ g_l)_j`.
pub(crate) fn boundary_points(frame: &AdaptedFrame, base: &[Vec<Complex64>], g: &[Vec<f64>], conj: &DMatrix<f64>) -> Vec<Vec<Complex64>> {
    let n = frame.dim();
    let nt = frame.tangential_count();
    let q = frame.matrix();
    let mut pts = base.to_vec();
    for (l, gl) in g.iter().enumerate() {
        let h = conj * DVector::from_column_slice(gl);
        for (j, pj) in pts.iter_mut().enumerate() {
            let v = Complex64::new(gl[j], h[j]);
            for i in 0..n {
                pj[i] += q[(i, nt + l)] * v;
            }
        }
    }
    pts
}

fn rho_stack(e: &HypersurfaceSpec, pts: &[Vec<Complex64>]) -> DVector<f64> {
    let d = e.codim();
    let nb = pts.len();
    let mut f = DVector::zeros(d * nb);
    for (j, pj) in pts.iter().enumerate() {
        for (k, r) in e.rho(pj).into_iter().enumerate() {
            f[k * nb + j] = r;
        }
    }
    f
}

fn boundary_newton(
    e: &HypersurfaceSpec,
    frame: &AdaptedFrame,
    base: &[Vec<Complex64>],
    g: &mut [Vec<f64>],
    conj: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(), SolverError> {
    let nb = base.len();
    let target = (1e-2 * tol).max(1e-15);
    let mut pts = boundary_points(frame, base, g, conj);
    let mut f = rho_stack(e, &pts);
    let mut fnorm = f.amax();
    for _ in 0..max_iter {
        if fnorm <= target {
            return Ok(());
        }
        let jac = boundary_jacobian(e, frame, &pts, conj);
        let step = jac.lu().solve(&f).ok_or(SolverError::DegenerateBoundaryJacobian)?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::DegenerateBoundaryJacobian);
        }
        let mut t = 1.0;
        loop {
            let trial: Vec<Vec<f64>> = g
                .iter()
                .enumerate()
                .map(|(l, gl)| gl.iter().enumerate().map(|(j, v)| v - t * step[l * nb + j]).collect())
                .collect();
            let tpts = boundary_points(frame, base, &trial, conj);
            let tf = rho_stack(e, &tpts);
            let tn = tf.amax();
            if tn < fnorm || t < 1e-3 {
                if tn >= fnorm && fnorm <= tol {
                    // roundoff floor
                    return Ok(());
                }
                for (gl, tl) in g.iter_mut().zip(trial) {
                    *gl = tl;
                }
                pts = tpts;
                f = tf;
                fnorm = tn;
                break;
            }
            t *= 0.5;
        }
    }
    if fnorm <= tol {
        Ok(())
    } else {
        Err(SolverError::NewtonFailure { residual: fnorm })
    }
}

fn residuals_of(
    e: &HypersurfaceSpec,
    z: &DiscFunction,
    term: Option<&[Vec<Complex64>]>,
    point: &[Complex64],
) -> Residuals {
    let dbar = by_node(&d_bar(z).values());
    let pde = dbar
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.iter()
                .enumerate()
                .map(|(c, x)| (x - term.map_or(ZERO, |t| t[i][c])).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let trace = by_node(&z.boundary_trace_values());
    let bc = trace.iter().map(|p| e.max_abs_rho(p)).fold(0.0, f64::max);
    let at_one = z.boundary_values_at_one();
    let pin = at_one.iter().zip(point).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Residuals { pde, bc, pin }
}

impl DiscFunction {
    pub(crate) fn boundary_trace_values(&self) -> Vec<Vec<Complex64>> {
        (0..self.comps()).map(|c| self.boundary_values(c)).collect()
    }
}

fn check_inputs(s: &StructureSpec, e: &HypersurfaceSpec, params: &DiscParameters) -> Result<(), SolverError> {
    let n = s.dim();
    if e.dim() != n || params.point().len() != n {
        return Err(SolverError::InvalidParameters(format!(
            "dimension mismatch: structure {n}, hypersurface {}, point {}",
            e.dim(),
            params.point().len()
        )));
    }
    let nt = n - e.codim();
    if params.data().comps() != nt {
        return Err(SolverError::InvalidParameters(format!(
            "expected {nt} tangential data components, got {}",
            params.data().comps()
        )));
    }
    Ok(())
}

/// Solves `∂̄z = A(z) conj(∂z)` on 𝔻 with `ρ(z) = 0` on the circle and
/// `z(1) = p`, where the tangential frame components of `z − p` have
/// boundary real part `ε u`.
pub fn solve_bishop(s: &StructureSpec, e: &HypersurfaceSpec, params: &DiscParameters) -> Result<BishopDisc, SolverError> {
    check_inputs(s, e, params)?;
    let opts = params.options();
    if params.smallness() <= opts.continuation_threshold {
        match solve_warm(s, e, params, None) {
            Err(SolverError::NonConvergence { .. }) | Err(SolverError::NewtonFailure { .. }) => {}
            other => return other,
        }
    }
    let eps = params.epsilon();
    let mut warm: Option<BishopDisc> = None;
    for frac in [0.25, 0.5, 1.0] {
        let disc = solve_warm(s, e, &params.with_epsilon(eps * frac), warm.as_ref())?;
        warm = Some(disc);
    }
    Ok(warm.expect("continuation ran"))
}

/// Like [`solve_bishop`] but starting the iteration from a nearby solution.
pub fn solve_bishop_from(s: &StructureSpec, e: &HypersurfaceSpec, params: &DiscParameters, warm: &BishopDisc) -> Result<BishopDisc, SolverError> {
    check_inputs(s, e, params)?;
    match solve_warm(s, e, params, Some(warm)) {
        Err(SolverError::NonConvergence { .. }) | Err(SolverError::NewtonFailure { .. }) => solve_bishop(s, e, params),
        other => other,
    }
}

fn solve_warm(s: &StructureSpec, e: &HypersurfaceSpec, params: &DiscParameters, warm: Option<&BishopDisc>) -> Result<BishopDisc, SolverError> {
    let opts = params.options();
    let grid = DiscGrid::shared(opts.n, opts.m)?;
    let p = params.point().to_vec();
    let e_p = e.with_point(p.clone())?;
    let frame = AdaptedFrame::new(&e_p, &p)?;
    let n = s.dim();
    let dcod = e.codim();
    let nt = n - dcod;
    let nb = grid.n();
    let tol = opts.tolerance(s.is_standard());
    let eps = params.epsilon();
    let u: Vec<Vec<f64>> = (0..nt).map(|t| params.data().real_samples(t).iter().map(|v| v * eps).collect()).collect();
    let conj = grid.conjugate_matrix();

    let warm = warm.filter(|w| w.grid().n() == grid.n() && w.grid().m() == grid.m() && w.point == p);
    let mut z = match warm {
        Some(w) => w.z.clone(),
        None => DiscFunction::zeros(grid.clone(), n).add_constant(&p),
    };
    let mut g: Vec<Vec<f64>> = match warm {
        Some(w) => w.normal_data.clone(),
        None => vec![vec![0.0; nb]; dcod],
    };
    let mut prev_change: Option<f64> = None;
    let mut contraction = f64::NAN;
    let mut last = Residuals { pde: f64::INFINITY, bc: f64::INFINITY, pin: f64::INFINITY };

    for it in 0..=opts.max_iter {
        let term = if s.is_standard() {
            None
        } else {
            let zn = by_node(&z.values());
            let dz = by_node(&d(&z).values());
            Some(beltrami_term(s, &zn, &dz)?)
        };
        if it > 0 {
            last = residuals_of(&e_p, &z, term.as_deref(), &p);
            if last.max() <= tol {
                return Ok(BishopDisc {
                    z,
                    residual_pde: last.pde,
                    residual_bc: last.bc,
                    residual_pin: last.pin,
                    iterations: it,
                    epsilon: eps,
                    tolerance: tol,
                    point: p,
                    data: params.data().clone(),
                    frame,
                    normal_data: g,
                });
            }
            if it == opts.max_iter {
                break;
            }
        }
        let omega = match &term {
            Some(t) => {
                let f = DiscFunction::from_values(grid.clone(), by_component(t, n))?;
                frame_coords(&frame, &cauchy_green_t(&f))
            }
            None => DiscFunction::zeros(grid.clone(), n),
        };
        let om_bd = omega.boundary_trace_values();
        let om_one = omega.boundary_values_at_one();

        let mut eta: Vec<DiscFunction> = Vec::with_capacity(n);
        for t in 0..nt {
            let gt: Vec<f64> = (0..nb).map(|l| u[t][l] - om_bd[t][l].re).collect();
            eta.push(pinned_schwarz(&grid, &gt, -om_one[t].im));
        }
        let q = frame.matrix();
        let eta_t_bd: Vec<Vec<Complex64>> = eta.iter().map(|f| f.boundary_values(0)).collect();
        let c_n: Vec<f64> = (0..dcod).map(|k| -om_one[nt + k].im).collect();
        let base: Vec<Vec<Complex64>> = (0..nb)
            .map(|j| {
                let mut xi = vec![ZERO; n];
                for t in 0..nt {
                    xi[t] = eta_t_bd[t][j] + om_bd[t][j];
                }
                for k in 0..dcod {
                    xi[nt + k] = om_bd[nt + k][j] + Complex64::new(0.0, c_n[k]);
                }
                (0..n).map(|i| p[i] + (0..n).map(|l| q[(i, l)] * xi[l]).sum::<Complex64>()).collect()
            })
            .collect();
        boundary_newton(&e_p, &frame, &base, &mut g, conj, tol, opts.newton_max_iter)?;
        for k in 0..dcod {
            let bf = BoundaryFunction::from_real_samples(grid.clone(), vec![g[k].clone()])?;
            eta.push(schwarz(&bf).add_constant(&[Complex64::new(0.0, c_n[k])]));
        }
        let xi = DiscFunction::stack(&eta).add_scaled(&omega, Complex64::new(1.0, 0.0));
        let z_new = from_frame(&frame, &p, &xi);
        let change = z_new.add_scaled(&z, Complex64::new(-1.0, 0.0)).sup_norm();
        if let Some(pc) = prev_change {
            if pc > 0.0 {
                contraction = change / pc;
            }
        }
        prev_change = Some(change);
        z = z_new;
    }
    Err(SolverError::NonConvergence { iterations: opts.max_iter, residuals: last, contraction })
}

/// `−dρ(p)[∂_r z(1)]`: zero when the disc leaves `p` tangentially to `E`,
/// negative when it enters `{ρ < 0}`. For `d > 1` the component of largest
/// magnitude is returned.
pub fn transversality(z: &BishopDisc, e: &HypersurfaceSpec) -> f64 {
    transversality_components(z, e).into_iter().fold(0.0, |best, v| if v.abs() > best.abs() { v } else { best })
}

pub fn transversality_components(z: &BishopDisc, e: &HypersurfaceSpec) -> Vec<f64> {
    let dr = z.z.boundary_radial_derivative().value_at_one();
    let rz = e.rho_z(z.point());
    (0..e.codim())
        .map(|k| -2.0 * (0..e.dim()).map(|i| rz[(k, i)] * dr[i]).sum::<Complex64>().re)
        .collect()
}
