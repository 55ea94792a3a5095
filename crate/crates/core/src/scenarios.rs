//! Built-in structure/hypersurface pairs with closed-form disc families.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::disc::{BoundaryFunction, DiscFunction, DiscGrid};
use crate::geometry::{to_real, AdaptedFrame, CMatrix, GeometryError, HypersurfaceSpec, Monomial, Polynomial, RMatrix, StructureSpec};

const NAMES: [&str; 6] = ["standard-leviflat-C3", "ivashkovich-rosay", "sphere-C2", "sphere-C3", "quadric-signature(+,-)", "ir-scaled(λ)"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?}; known: {known}", known = NAMES.join(", "))]
    Unknown(String),
    #[error("scaling parameter must lie in [0, 1], got {0}")]
    BadScale(f64),
    #[error("scenario {0} has no closed-form disc family")]
    NoOracle(String),
    #[error("oracle parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Outcome of the transverse / hypersurface / Levi-flat trichotomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomyOutcome {
    TransverseDisc,
    ComplexHypersurface,
    LeviVanishing,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleFamily {
    /// `z_j` holomorphic tangential, `z₃ = 2λ Re ∫₁^ζ z₁ z₂'`.
    IvashkovichRosay { lambda: f64 },
    /// Complex-line slices of the unit sphere through `p`.
    SphereSlice,
    /// Normal component `i` times the holomorphic extension of `|z₁|² − |z₂|²`.
    Quadric,
}

/// Closed-form expectations attached to a scenario.
#[derive(Clone, Debug, Serialize)]
pub struct OracleBundle {
    pub family: Option<OracleFamily>,
    /// Rank of the evaluation map at `ζ₀ = −1` around a nonconstant disc.
    pub expected_rank: Option<usize>,
    pub expected_outcome: DichotomyOutcome,
    /// True when the Levi form of `E` vanishes identically.
    pub levi_flat: bool,
    /// `"inside"`, `"outside"` or `"both"` for scenarios with transverse discs.
    pub expected_side: Option<&'static str>,
}

#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub structure: StructureSpec,
    pub hypersurface: HypersurfaceSpec,
    pub oracle: OracleBundle,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario").field("name", &self.name).field("oracle", &self.oracle).finish()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn exps(dim: usize, pairs: &[(usize, u32)]) -> Vec<u32> {
    let mut v = vec![0; dim];
    for (i, e) in pairs {
        v[*i] = *e;
    }
    v
}

/// `Im z_k` written as `Re(−i z_k)`.
fn im_coordinate(dim: usize, k: usize) -> Monomial {
    Monomial::new(c(0.0, -1.0), exps(dim, &[(k, 1)]), vec![0; dim])
}

fn modulus_sq(dim: usize, k: usize, sign: f64) -> Monomial {
    Monomial::new(c(sign, 0.0), exps(dim, &[(k, 1)]), exps(dim, &[(k, 1)]))
}

fn flat_c3() -> Result<HypersurfaceSpec, GeometryError> {
    HypersurfaceSpec::from_polynomials(3, vec![Polynomial::new(3, vec![im_coordinate(3, 2)])?], vec![c(0.0, 0.0); 3])
}

fn sphere(dim: usize) -> Result<HypersurfaceSpec, GeometryError> {
    let mut terms: Vec<Monomial> = (0..dim).map(|k| modulus_sq(dim, k, 1.0)).collect();
    terms.push(Monomial::constant(dim, c(-1.0, 0.0)));
    let mut p = vec![c(0.0, 0.0); dim];
    p[dim - 1] = c(1.0, 0.0);
    HypersurfaceSpec::from_polynomials(dim, vec![Polynomial::new(dim, terms)?], p)
}

/// The structure with `A₃₂ = λ z̄₁`; `J(X) = (iX₁, iX₂, iX₃ − 2iλ z̄₁ X̄₂)`.
pub fn ivashkovich_rosay_structure(lambda: f64) -> Result<StructureSpec, GeometryError> {
    let entry = Polynomial::new(3, vec![Monomial::new(c(lambda, 0.0), vec![0; 3], exps(3, &[(0, 1)]))])?;
    let s = StructureSpec::from_polynomials(3, vec![(2, 1, entry)])?;
    if s.is_standard() {
        return Ok(s);
    }
    let i = c(0.0, 1.0);
    Ok(s.with_j(Arc::new(move |z: &[Complex64]| {
        let mut m = RMatrix::zeros(6, 6);
        for col in 0..6 {
            let mut x = [c(0.0, 0.0); 3];
            x[col / 2] = if col % 2 == 0 { c(1.0, 0.0) } else { i };
            let y = [i * x[0], i * x[1], i * x[2] - i * 2.0 * lambda * z[0].conj() * x[1].conj()];
            m.set_column(col, &to_real(&y));
        }
        m
    })))
}

fn parse_scaled(name: &str) -> Option<Result<f64, ScenarioError>> {
    let inner = name.strip_prefix("ir-scaled(")?.strip_suffix(')')?;
    Some(inner.trim().parse::<f64>().map_err(|_| ScenarioError::Unknown(name.to_string())))
}

/// Looks up a built-in scenario by its CLI name.
pub fn builtin(name: &str) -> Result<Scenario, ScenarioError> {
    let normalized = name.replace('\u{2212}', "-");
    let sc = match normalized.as_str() {
        "standard-leviflat-C3" => Scenario {
            name: normalized.clone(),
            structure: StructureSpec::standard(3)?,
            hypersurface: flat_c3()?,
            oracle: OracleBundle {
                family: Some(OracleFamily::IvashkovichRosay { lambda: 0.0 }),
                expected_rank: Some(4),
                expected_outcome: DichotomyOutcome::ComplexHypersurface,
                levi_flat: true,
                expected_side: None,
            },
        },
        "ivashkovich-rosay" => ir_scaled(1.0, normalized.clone())?,
        "sphere-C2" | "sphere-C3" => {
            let dim = if normalized.ends_with("C2") { 2 } else { 3 };
            Scenario {
                name: normalized.clone(),
                structure: StructureSpec::standard(dim)?,
                hypersurface: sphere(dim)?,
                oracle: OracleBundle {
                    family: Some(OracleFamily::SphereSlice),
                    expected_rank: Some(2 * dim - 1),
                    expected_outcome: DichotomyOutcome::TransverseDisc,
                    levi_flat: false,
                    expected_side: Some("inside"),
                },
            }
        }
        "quadric-signature(+,-)" => {
            let rho = Polynomial::new(3, vec![im_coordinate(3, 2), modulus_sq(3, 0, -1.0), modulus_sq(3, 1, 1.0)])?;
            Scenario {
                name: normalized.clone(),
                structure: StructureSpec::standard(3)?,
                hypersurface: HypersurfaceSpec::from_polynomials(3, vec![rho], vec![c(0.0, 0.0); 3])?,
                oracle: OracleBundle {
                    family: Some(OracleFamily::Quadric),
                    expected_rank: Some(5),
                    expected_outcome: DichotomyOutcome::TransverseDisc,
                    levi_flat: false,
                    expected_side: Some("both"),
                },
            }
        }
        other => match parse_scaled(other) {
            Some(lambda) => ir_scaled(lambda?, normalized.clone())?,
            None => return Err(ScenarioError::Unknown(name.to_string())),
        },
    };
    Ok(sc)
}

fn ir_scaled(lambda: f64, name: String) -> Result<Scenario, ScenarioError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(ScenarioError::BadScale(lambda));
    }
    let flat = lambda == 0.0;
    Ok(Scenario {
        name,
        structure: ivashkovich_rosay_structure(lambda)?,
        hypersurface: flat_c3()?,
        oracle: OracleBundle {
            family: Some(OracleFamily::IvashkovichRosay { lambda }),
            expected_rank: Some(if flat { 4 } else { 5 }),
            expected_outcome: if flat { DichotomyOutcome::ComplexHypersurface } else { DichotomyOutcome::LeviVanishing },
            levi_flat: true,
            expected_side: None,
        },
    })
}

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// Holomorphic polynomials in `ζ` (coefficients `c_0, c_1, …`) for the
/// tangential frame components of an oracle disc; each must vanish at 1.
#[derive(Clone, Debug)]
pub struct OracleParameters {
    pub tangential: Vec<Vec<Complex64>>,
}

impl OracleParameters {
    pub fn new(tangential: Vec<Vec<Complex64>>) -> Result<Self, ScenarioError> {
        for (j, p) in tangential.iter().enumerate() {
            let at_one: Complex64 = p.iter().sum();
            if at_one.norm() > 1e-12 * p.iter().map(|v| v.norm()).sum::<f64>().max(1.0) {
                return Err(ScenarioError::BadParameters(format!("polynomial {j} does not vanish at 1")));
            }
        }
        Ok(OracleParameters { tangential })
    }

    /// Linear discs `c_j (ζ − 1)`.
    pub fn linear(c: &[Complex64]) -> Self {
        OracleParameters { tangential: c.iter().map(|v| vec![-v, *v]).collect() }
    }
}

fn poly_eval(p: &[Complex64], zeta: Complex64) -> Complex64 {
    p.iter().rev().fold(c(0.0, 0.0), |acc, co| acc * zeta + co)
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_derivative(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect()
}

/// Antiderivative vanishing at 1.
fn poly_antiderivative_from_one(p: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0)];
    out.extend(p.iter().enumerate().map(|(k, v)| v / (k + 1) as f64));
    let at_one: Complex64 = out.iter().sum();
    out[0] -= at_one;
    out
}

/// Fourier coefficients `h_m`, `m ≥ 0`, of `|P|²` on the circle.
fn modulus_sq_modes(p: &[Complex64], out: &mut Vec<Complex64>, sign: f64) {
    for (a, ca) in p.iter().enumerate() {
        for (b, cb) in p.iter().enumerate() {
            if a >= b {
                let m = a - b;
                if out.len() <= m {
                    out.resize(m + 1, c(0.0, 0.0));
                }
                out[m] += ca * cb.conj() * sign;
            }
        }
    }
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn point(&self) -> &[Complex64] {
        self.hypersurface.point()
    }

    pub fn frame(&self) -> Result<AdaptedFrame, GeometryError> {
        AdaptedFrame::new(&self.hypersurface, self.point())
    }

    /// Closed-form value of the oracle disc at `ζ`.
    pub fn oracle_value(&self, params: &OracleParameters, zeta: Complex64) -> Result<Vec<Complex64>, ScenarioError> {
        let family = self.oracle.family.ok_or_else(|| ScenarioError::NoOracle(self.name.clone()))?;
        let n = self.dim();
        let nt = n - self.hypersurface.codim();
        if params.tangential.len() != nt {
            return Err(ScenarioError::BadParameters(format!("expected {nt} tangential polynomials, got {}", params.tangential.len())));
        }
        let p = self.point();
        let tang: Vec<Complex64> = params.tangential.iter().map(|q| poly_eval(q, zeta)).collect();
        let normal = match family {
            OracleFamily::IvashkovichRosay { lambda } => {
                let integrand = poly_mul(&params.tangential[0], &poly_derivative(&params.tangential[1]));
                let q = poly_antiderivative_from_one(&integrand);
                // frame column for Im z3 is i e3, so the frame coordinate is −i z3
                let z3 = c(2.0 * lambda * poly_eval(&q, zeta).re, 0.0);
                z3 * c(0.0, -1.0)
            }
            OracleFamily::SphereSlice => {
                if params.tangential.iter().any(|q| q.len() > 2 || q.iter().skip(2).any(|v| v.norm() > 0.0)) {
                    return Err(ScenarioError::BadParameters("sphere slices take linear polynomials".into()));
                }
                let c2: f64 = params.tangential.iter().map(|q| q.get(1).map_or(0.0, |v| v.norm_sqr())).sum();
                if 4.0 * c2 >= 1.0 {
                    return Err(ScenarioError::BadParameters("slice direction too large".into()));
                }
                let s = 0.5 * (1.0 - (1.0 - 4.0 * c2).sqrt());
                c(s, 0.0) * (zeta - 1.0)
            }
            OracleFamily::Quadric => {
                let mut h = Vec::new();
                modulus_sq_modes(&params.tangential[0], &mut h, 1.0);
                modulus_sq_modes(&params.tangential[1], &mut h, -1.0);
                // F = h_0 + 2 Σ h_m ζ^m + i t with Im F(1) = 0; frame coordinate of z3 = iF is F
                let mut f = h.first().map_or(c(0.0, 0.0), |v| c(v.re, 0.0));
                let mut im1 = 0.0;
                for (m, hm) in h.iter().enumerate().skip(1) {
                    f += 2.0 * hm * zeta.powu(m as u32);
                    im1 += 2.0 * hm.im;
                }
                f - c(0.0, im1)
            }
        };
        let frame = self.frame()?;
        let mut xi = tang;
        xi.push(normal);
        let w = frame.combine(&xi);
        Ok(w.iter().zip(p).map(|(a, b)| a + b).collect())
    }

    /// Oracle disc sampled on `grid`.
    pub fn oracle_disc(&self, params: &OracleParameters, grid: Arc<DiscGrid>) -> Result<DiscFunction, ScenarioError> {
        self.oracle_value(params, c(0.0, 0.0))?;
        let n = self.dim();
        Ok(DiscFunction::from_vec_fn(grid, n, |z| self.oracle_value(params, z).expect("checked above")))
    }

    /// Tangential boundary data `Re P_j(e^{iθ})` matching an oracle disc
    /// at amplitude `ε = 1`.
    pub fn tangential_data(&self, params: &OracleParameters, grid: Arc<DiscGrid>) -> BoundaryFunction {
        let nt = params.tangential.len();
        BoundaryFunction::from_fn_real(grid.clone(), nt, |j, t| poly_eval(&params.tangential[j], Complex64::from_polar(1.0, t)).re)
    }

    /// Residuals `(sup|∂̄z − A(z)conj(∂z)|, sup_{b𝔻}|ρ(z)|)` of a disc on its grid.
    pub fn disc_residuals(&self, z: &DiscFunction) -> (f64, f64) {
        let vals = z.values();
        let dbar = crate::disc::d_bar(z).values();
        let dz = crate::disc::d(z).values();
        let n = self.dim();
        let nodes = vals[0].len();
        let mut pde: f64 = 0.0;
        for i in 0..nodes {
            let zi: Vec<Complex64> = (0..n).map(|c| vals[c][i]).collect();
            let a: CMatrix = self.structure.a(&zi);
            for r in 0..n {
                let rhs: Complex64 = (0..n).map(|k| a[(r, k)] * dz[k][i].conj()).sum();
                pde = pde.max((dbar[r][i] - rhs).norm());
            }
        }
        let trace = z.boundary_trace();
        let bc = (0..z.grid().n())
            .map(|l| {
                let p: Vec<Complex64> = (0..n).map(|c| trace.samples(c)[l]).collect();
                self.hypersurface.max_abs_rho(&p)
            })
            .fold(0.0, f64::max);
        (pde, bc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for name in ["standard-leviflat-C3", "ivashkovich-rosay", "sphere-C2", "sphere-C3", "quadric-signature(+,-)", "quadric-signature(+,\u{2212})", "ir-scaled(0.5)"] {
            builtin(name).unwrap();
        }
        assert!(matches!(builtin("torus"), Err(ScenarioError::Unknown(_))));
        assert!(matches!(builtin("ir-scaled(1.5)"), Err(ScenarioError::BadScale(_))));
        assert!(builtin("ir-scaled(0)").unwrap().structure.is_standard());
    }

    #[test]
    fn ir_oracle_at_minus_one() {
        let sc = builtin("ivashkovich-rosay").unwrap();
        let p = OracleParameters::linear(&[c(1.0, 0.0), c(1.0, 0.0)]);
        let v = sc.oracle_value(&p, c(-1.0, 0.0)).unwrap();
        assert!((v[0] - c(-2.0, 0.0)).norm() < 1e-14);
        assert!((v[1] - c(-2.0, 0.0)).norm() < 1e-14);
        assert!((v[2] - c(4.0, 0.0)).norm() < 1e-14);
        let flat = OracleParameters::new(vec![vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![]]).unwrap();
        assert!(sc.oracle_value(&flat, c(0.3, 0.4)).unwrap()[2].norm() == 0.0);
    }

    #[test]
    fn ir_closed_form_structure_is_consistent() {
        let s = ivashkovich_rosay_structure(0.7).unwrap();
        let pts = vec![vec![c(0.3, -0.2), c(0.1, 0.0), c(-0.4, 0.2)], vec![c(0.0, 0.9), c(0.0, 0.0), c(0.0, 0.0)]];
        s.check_invariants(&pts).unwrap();
    }

    #[test]
    fn oracle_discs_solve_the_system() {
        let grid = DiscGrid::shared(64, 16).unwrap();
        let cases = [
            ("ivashkovich-rosay", OracleParameters::new(vec![vec![c(-0.1, 0.0), c(0.05, 0.02), c(0.05, -0.02)], vec![c(0.0, -0.1), c(0.0, 0.1)]]).unwrap()),
            ("sphere-C2", OracleParameters::linear(&[c(0.2, 0.1)])),
            ("sphere-C3", OracleParameters::linear(&[c(0.2, 0.1), c(-0.1, 0.05)])),
            ("quadric-signature(+,-)", OracleParameters::new(vec![vec![c(-0.1, 0.0), c(0.1, 0.0)], vec![c(-0.05, 0.05), c(0.0, 0.0), c(0.05, -0.05)]]).unwrap()),
        ];
        for (name, p) in cases {
            let sc = builtin(name).unwrap();
            let z = sc.oracle_disc(&p, grid.clone()).unwrap();
            let (pde, bc) = sc.disc_residuals(&z);
            assert!(pde < 1e-10 && bc < 1e-10, "{name}: pde {pde:e} bc {bc:e}");
        }
    }
}
