use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use super::ExperimentError;
use crate::geometry::{HypersurfaceSpec, Monomial, Polynomial, StructureSpec};
use crate::scenarios::{builtin, DichotomyOutcome, OracleBundle, Scenario};

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Linearize,
    Levi,
    Rank,
    Detect,
    Fill,
    Dichotomy,
    Selftest,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Linearize => "linearize",
            Command::Levi => "levi",
            Command::Rank => "rank",
            Command::Detect => "detect",
            Command::Fill => "fill",
            Command::Dichotomy => "dichotomy",
            Command::Selftest => "selftest",
        }
    }
}

/// `coef · z^z · z̄^zbar`, with `coef = [re, im]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub coef: [f64; 2],
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<TermConfig>,
}

/// A structure and hypersurface given by coefficient tables; `rho[k]` is
/// the polynomial whose real part is the `k`-th defining function.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineScenario {
    #[serde(default)]
    pub name: Option<String>,
    pub dim: usize,
    #[serde(default)]
    pub a: Vec<EntryConfig>,
    pub rho: Vec<Vec<TermConfig>>,
    pub point: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ScenarioConfig {
    Builtin(String),
    Inline(InlineScenario),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
    #[serde(rename = "M", alias = "m")]
    pub m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: crate::disc::DEFAULT_N, m: crate::disc::DEFAULT_M }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: Option<f64>,
    pub max_iter: usize,
    #[serde(alias = "eps")]
    pub epsilon: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: None, max_iter: 200, epsilon: 0.1 }
    }
}

/// `a (cos kθ − 1) + b sin kθ` in tangential component `component`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub component: usize,
    pub k: usize,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Boundary data `u`; random trigonometric data when absent.
    pub modes: Option<Vec<ModeConfig>>,
    /// Direction `u̇` for `linearize`; random when absent.
    pub direction: Option<Vec<ModeConfig>>,
    /// Degree of random data.
    pub degree: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MethodConfig {
    Linearized,
    FiniteDifference,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    pub basis_degree: usize,
    pub basis_count: Option<usize>,
    /// Evaluation points as `[re, im]`; the first is the primary one.
    pub zeta0: Vec<[f64; 2]>,
    pub method: MethodConfig,
    pub base_samples: usize,
    pub stability_check: bool,
    pub rank_threshold: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            basis_degree: 2,
            basis_count: None,
            zeta0: vec![[-1.0, 0.0]],
            method: MethodConfig::Linearized,
            base_samples: 2,
            stability_check: true,
            rank_threshold: crate::family::RANK_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FillConfig {
    #[serde(alias = "δ")]
    pub delta: f64,
    pub h: f64,
    pub sweep_size: usize,
    pub search_size: usize,
    pub test_points: usize,
}

impl Default for FillConfig {
    fn default() -> Self {
        let d = crate::family::FillOptions::default();
        FillConfig { delta: d.delta, h: d.h, sweep_size: d.sweep_size, search_size: d.search_size, test_points: d.test_points }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output directory; `--out` overrides it.
    pub dir: Option<String>,
    pub report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, report: "report.json".into() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub command: Command,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub fill: FillConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), ExperimentError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(msg()))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Range checks on every numeric field.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let g = &self.grid;
        check(g.n.is_power_of_two() && (8..=4096).contains(&g.n), || format!("grid.N must be a power of two in [8, 4096], got {}", g.n))?;
        check((4..=512).contains(&g.m), || format!("grid.M must lie in [4, 512], got {}", g.m))?;
        let s = &self.solver;
        if let Some(t) = s.tol {
            check(t > 0.0 && t <= 1e-3, || format!("solver.tol must lie in (0, 1e-3], got {t}"))?;
        }
        check((1..=10_000).contains(&s.max_iter), || format!("solver.max_iter must lie in [1, 10000], got {}", s.max_iter))?;
        check(s.epsilon > 0.0 && s.epsilon <= 10.0, || format!("solver.epsilon must lie in (0, 10], got {}", s.epsilon))?;
        let f = &self.family;
        check((1..=16).contains(&f.basis_degree), || format!("family.basis_degree must lie in [1, 16], got {}", f.basis_degree))?;
        if let Some(k) = f.basis_count {
            check(k >= 1, || "family.basis_count must be at least 1".into())?;
        }
        check(!f.zeta0.is_empty(), || "family.zeta0 must not be empty".into())?;
        for z in &f.zeta0 {
            let c = Complex64::new(z[0], z[1]);
            check((c.norm() - 1.0).abs() <= 1e-9, || format!("family.zeta0 entry {c} is not on the unit circle"))?;
            check((c - 1.0).norm() > 1e-6, || "family.zeta0 must avoid the attachment point 1".into())?;
        }
        check(f.base_samples <= 64, || format!("family.base_samples must be at most 64, got {}", f.base_samples))?;
        check(f.rank_threshold > 0.0 && f.rank_threshold < 1.0, || format!("family.rank_threshold must lie in (0, 1), got {}", f.rank_threshold))?;
        let fl = &self.fill;
        check(fl.delta > 0.0 && fl.delta <= 1.0, || format!("fill.delta must lie in (0, 1], got {}", fl.delta))?;
        check(fl.h > 0.0 && fl.h <= fl.delta, || format!("fill.h must lie in (0, delta], got {}", fl.h))?;
        check((1..=100_000).contains(&fl.sweep_size), || format!("fill.sweep_size must lie in [1, 100000], got {}", fl.sweep_size))?;
        check((1..=10_000).contains(&fl.search_size), || format!("fill.search_size must lie in [1, 10000], got {}", fl.search_size))?;
        check((1..=1_000_000).contains(&fl.test_points), || format!("fill.test_points must lie in [1, 1000000], got {}", fl.test_points))?;
        if let Some(d) = self.data.degree {
            check((1..=16).contains(&d), || format!("data.degree must lie in [1, 16], got {d}"))?;
        }
        for modes in [&self.data.modes, &self.data.direction].into_iter().flatten() {
            for m in modes {
                check(m.k >= 1 && m.k < g.n / 2, || format!("data mode k = {} outside [1, N/2)", m.k))?;
                check(m.cos.is_finite() && m.sin.is_finite(), || "data mode coefficients must be finite".into())?;
            }
        }
        check(!self.output.report.is_empty() && !self.output.report.contains('/'), || "output.report must be a plain file name".into())?;
        Ok(())
    }

    pub fn scenario(&self) -> Result<Scenario, ExperimentError> {
        match &self.scenario {
            ScenarioConfig::Builtin(name) => Ok(builtin(name)?),
            ScenarioConfig::Inline(inline) => inline.build(),
        }
    }
}

fn polynomial(dim: usize, terms: &[TermConfig]) -> Result<Polynomial, ExperimentError> {
    let monos = terms.iter().map(|t| Monomial::new(Complex64::new(t.coef[0], t.coef[1]), t.z.clone(), t.zbar.clone())).collect();
    Ok(Polynomial::new(dim, monos)?)
}

impl InlineScenario {
    pub fn build(&self) -> Result<Scenario, ExperimentError> {
        let n = self.dim;
        let mut entries = Vec::new();
        for e in &self.a {
            check(e.row < n && e.col < n, || format!("A entry ({}, {}) outside {n}x{n}", e.row, e.col))?;
            entries.push((e.row, e.col, polynomial(n, &e.terms)?));
        }
        let structure = StructureSpec::from_polynomials(n, entries)?;
        let rho = self.rho.iter().map(|t| polynomial(n, t)).collect::<Result<Vec<_>, _>>()?;
        let point = self.point.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let hypersurface = HypersurfaceSpec::from_polynomials(n, rho, point)?;
        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "inline".into()),
            structure,
            hypersurface,
            oracle: OracleBundle { family: None, expected_rank: None, expected_outcome: DichotomyOutcome::Inconclusive, levi_flat: false, expected_side: None },
        })
    }
}
