use nalgebra::{DVector, LU};
use num_complex::Complex64;

use super::solver::{boundary_jacobian, by_component, by_node, frame_coords, from_frame, mat_vec, pinned_schwarz};
use super::{BishopDisc, SolverError};
use crate::disc::{cauchy_green_t, d, d_bar, schwarz, BoundaryFunction, DiscFunction};
use crate::geometry::{CMatrix, HypersurfaceSpec, StructureSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Solution `ż` of the linearized Bishop problem.
#[derive(Clone, Debug)]
pub struct LinearizedDisc {
    pub zdot: DiscFunction,
    pub residual_pde: f64,
    pub residual_bc: f64,
    pub residual_pin: f64,
    pub iterations: usize,
}

impl LinearizedDisc {
    pub fn eval(&self, zeta: Complex64) -> Vec<Complex64> {
        self.zdot.eval(zeta)
    }
}

/// Data shared by every linearized solve around one disc: `A`, `conj(∂z)`
/// on the grid, `ρ_z` on the boundary and the factored boundary Jacobian.
pub struct LinearizedProblem<'a> {
    s: &'a StructureSpec,
    disc: &'a BishopDisc,
    a_nodes: Vec<CMatrix>,
    z_nodes: Vec<Vec<Complex64>>,
    conj_dz: Vec<Vec<Complex64>>,
    rho_z: Vec<CMatrix>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    max_iter: usize,
}

impl<'a> LinearizedProblem<'a> {
    pub fn new(s: &'a StructureSpec, e: &HypersurfaceSpec, disc: &'a BishopDisc) -> Result<Self, SolverError> {
        let z = &disc.z;
        let (a_nodes, z_nodes, conj_dz) = if s.is_standard() {
            (Vec::new(), Vec::new(), Vec::new())
        } else {
            let zn = by_node(&z.values());
            let cdz: Vec<Vec<Complex64>> = by_node(&d(z).values()).into_iter().map(|v| v.into_iter().map(|c| c.conj()).collect()).collect();
            (zn.iter().map(|p| s.a(p)).collect(), zn, cdz)
        };
        let trace = by_node(&z.boundary_trace_values());
        let rho_z = trace.iter().map(|p| e.rho_z(p)).collect();
        let conj = disc.grid().conjugate_matrix();
        let jac = boundary_jacobian(e, disc.frame(), &trace, conj);
        let lu = jac.lu();
        if !lu.is_invertible() {
            return Err(SolverError::DegenerateBoundaryJacobian);
        }
        Ok(LinearizedProblem { s, disc, a_nodes, z_nodes, conj_dz, rho_z, lu, max_iter: 200 })
    }

    /// `Ȧ conj(∂z) + A conj(∂ż)` with `Ȧ = A_z[ż] + A_z̄[conj ż]`, node-major.
    fn source(&self, zdot: &DiscFunction) -> Vec<Vec<Complex64>> {
        let zd = by_node(&zdot.values());
        let dzd = by_node(&d(zdot).values());
        (0..zd.len())
            .map(|i| {
                let w = &zd[i];
                let wbar: Vec<Complex64> = w.iter().map(|c| c.conj()).collect();
                let adot = self.s.a_z(&self.z_nodes[i], w) + self.s.a_zbar(&self.z_nodes[i], &wbar);
                let cdzd: Vec<Complex64> = dzd[i].iter().map(|c| c.conj()).collect();
                let a = mat_vec(&adot, &self.conj_dz[i]);
                let b = mat_vec(&self.a_nodes[i], &cdzd);
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            })
            .collect()
    }

    /// Linearization of [`solve_bishop`](super::solve_bishop) with respect
    /// to `u` at fixed `ε`: the tangential boundary data of `ż` is `ε u̇`.
    pub fn solve(&self, udot: &BoundaryFunction) -> Result<LinearizedDisc, SolverError> {
        let disc = self.disc;
        let grid = disc.grid().clone();
        let frame = disc.frame();
        let n = frame.dim();
        let nt = frame.tangential_count();
        let dcod = frame.codim();
        let nb = grid.n();
        if udot.comps() != nt {
            return Err(SolverError::InvalidParameters(format!("expected {nt} direction components, got {}", udot.comps())));
        }
        let udot = if udot.grid().n() == nb { udot.clone() } else { udot.resampled(grid.clone()) };
        let at_one = udot.value_at_one().iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if at_one > super::DATA_PIN_TOL * udot.sup_norm().max(1.0) {
            return Err(SolverError::InvalidParameters(format!("direction must vanish at 1, |u(1)| = {at_one:e}")));
        }
        let eps = disc.epsilon;
        let u: Vec<Vec<f64>> = (0..nt).map(|t| udot.real_samples(t).iter().map(|v| v * eps).collect()).collect();
        let scale = u.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = disc.tolerance * scale;
        let q = frame.matrix();
        let zero_pt = vec![ZERO; n];

        let mut zdot = DiscFunction::zeros(grid.clone(), n);
        for it in 0..=self.max_iter {
            let src = if self.s.is_standard() { None } else { Some(self.source(&zdot)) };
            if it > 0 {
                let res = self.residuals(&zdot, src.as_deref());
                if res.0.max(res.1).max(res.2) <= tol || scale == 0.0 {
                    return Ok(LinearizedDisc { zdot, residual_pde: res.0, residual_bc: res.1, residual_pin: res.2, iterations: it });
                }
                if it == self.max_iter {
                    break;
                }
            }
            let omega = match &src {
                Some(t) => frame_coords(frame, &cauchy_green_t(&DiscFunction::from_values(grid.clone(), by_component(t, n))?)),
                None => DiscFunction::zeros(grid.clone(), n),
            };
            let om_bd = omega.boundary_trace_values();
            let om_one = omega.boundary_values_at_one();
            let mut eta: Vec<DiscFunction> = Vec::with_capacity(n);
            for t in 0..nt {
                let gt: Vec<f64> = (0..nb).map(|l| u[t][l] - om_bd[t][l].re).collect();
                eta.push(pinned_schwarz(&grid, &gt, -om_one[t].im));
            }
            let eta_bd: Vec<Vec<Complex64>> = eta.iter().map(|f| f.boundary_values(0)).collect();
            let c_n: Vec<f64> = (0..dcod).map(|k| -om_one[nt + k].im).collect();
            let mut rhs = DVector::zeros(dcod * nb);
            for j in 0..nb {
                let mut xi = vec![ZERO; n];
                for t in 0..nt {
                    xi[t] = eta_bd[t][j] + om_bd[t][j];
                }
                for k in 0..dcod {
                    xi[nt + k] = om_bd[nt + k][j] + Complex64::new(0.0, c_n[k]);
                }
                let w: Vec<Complex64> = (0..n).map(|i| (0..n).map(|l| q[(i, l)] * xi[l]).sum()).collect();
                let rz = &self.rho_z[j];
                for k in 0..dcod {
                    let v: Complex64 = (0..n).map(|i| rz[(k, i)] * w[i]).sum();
                    rhs[k * nb + j] = -2.0 * v.re;
                }
            }
            let gdot = self.lu.solve(&rhs).ok_or(SolverError::DegenerateBoundaryJacobian)?;
            for k in 0..dcod {
                let gk: Vec<f64> = (0..nb).map(|j| gdot[k * nb + j]).collect();
                let bf = BoundaryFunction::from_real_samples(grid.clone(), vec![gk])?;
                eta.push(schwarz(&bf).add_constant(&[Complex64::new(0.0, c_n[k])]));
            }
            let xi = DiscFunction::stack(&eta).add_scaled(&omega, Complex64::new(1.0, 0.0));
            zdot = from_frame(frame, &zero_pt, &xi);
        }
        Err(SolverError::NonConvergence {
            iterations: self.max_iter,
            residuals: super::Residuals { pde: f64::NAN, bc: f64::NAN, pin: f64::NAN },
            contraction: f64::NAN,
        })
    }

    fn residuals(&self, zdot: &DiscFunction, src: Option<&[Vec<Complex64>]>) -> (f64, f64, f64) {
        let dbar = by_node(&d_bar(zdot).values());
        let pde = dbar
            .iter()
            .enumerate()
            .map(|(i, v)| v.iter().enumerate().map(|(c, x)| (x - src.map_or(ZERO, |s| s[i][c])).norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let trace = by_node(&zdot.boundary_trace_values());
        let bc = trace
            .iter()
            .zip(&self.rho_z)
            .map(|(w, rz)| {
                (0..rz.nrows())
                    .map(|k| (2.0 * (0..rz.ncols()).map(|i| rz[(k, i)] * w[i]).sum::<Complex64>().re).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let pin = zdot.boundary_values_at_one().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        (pde, bc, pin)
    }
}

/// One-shot form of [`LinearizedProblem::solve`].
pub fn solve_linearized(z: &BishopDisc, s: &StructureSpec, e: &HypersurfaceSpec, udot: &BoundaryFunction) -> Result<LinearizedDisc, SolverError> {
    LinearizedProblem::new(s, e, z)?.solve(udot)
}
