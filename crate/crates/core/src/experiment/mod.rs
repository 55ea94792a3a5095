//! JSON-configured experiments: one command per run, a deterministic JSON
//! report and CSV artifacts in an output directory.

mod config;
mod selftest;

pub use config::{
    Command, DataConfig, EntryConfig, ExperimentConfig, FamilyConfig, FillConfig, GridConfig, InlineScenario, MethodConfig, ModeConfig,
    OutputConfig, ScenarioConfig, SolverConfig, TermConfig,
};
pub use selftest::{selftest, SelftestCheck};

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bishop::record::{write_boundary_csv, write_interior_csv, write_replay, CSV_VERSION};
use crate::bishop::{solve_bishop, solve_linearized, transversality, BishopDisc, DiscParameters, SolverError, SolverOptions, SMALLNESS_BOUND};
use crate::disc::{BoundaryFunction, DiscError, DiscGrid};
use crate::family::{
    circle_points, detect_complex_hypersurface, dichotomy, evaluation_jacobians, fill_one_sided, levi_vanishing_scan, write_witness_csv,
    DichotomyOptions, FamilyChart, FamilyError, FamilyOptions, FillOptions, JacobianMethod,
};
use crate::scenarios::{OracleParameters, Scenario, ScenarioError};

/// Version of the JSON report layout.
pub const REPORT_VERSION: u32 = 1;

const DATA_STREAM: u64 = 0x6461_7461_0000;
const DIRECTION_STREAM: u64 = 0x6469_7265_0000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    /// Process exit status: 2 for numerical failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let numerical = match self {
            ExperimentError::Solver(e) => e.is_numerical(),
            ExperimentError::Family(e) => e.is_numerical(),
            ExperimentError::Geometry(crate::geometry::GeometryError::NormBoundViolated(_)) => true,
            _ => false,
        };
        if numerical {
            2
        } else {
            1
        }
    }
}

/// Overrides taken from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: Value,
    pub report_path: PathBuf,
    pub artifacts: Vec<PathBuf>,
    /// False when a self-test check failed.
    pub passed: bool,
    /// Progress lines for `--verbose`.
    pub log: Vec<String>,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    sc: Scenario,
    grid: Arc<DiscGrid>,
    solver: SolverOptions,
    seed: u64,
    workers: usize,
    out: &'a Path,
    artifacts: Vec<PathBuf>,
    log: Vec<String>,
}

/// Runs one experiment and writes `output.report` plus command artifacts
/// into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunOutcome, ExperimentError> {
    cfg.validate()?;
    let sc = cfg.scenario()?;
    let grid = DiscGrid::shared(cfg.grid.n, cfg.grid.m)?;
    let solver = SolverOptions { n: cfg.grid.n, m: cfg.grid.m, tol: cfg.solver.tol, max_iter: cfg.solver.max_iter, ..SolverOptions::default() };
    std::fs::create_dir_all(out_dir)?;
    let mut ctx = Context {
        cfg,
        sc,
        grid,
        solver,
        seed: opts.seed.unwrap_or(cfg.seed),
        workers: opts.workers,
        out: out_dir,
        artifacts: Vec::new(),
        log: Vec::new(),
    };
    ctx.log.push(format!("scenario {} (n = {}), command {}", ctx.sc.name, ctx.sc.dim(), cfg.command.as_str()));
    let body = match cfg.command {
        Command::Solve => ctx.solve()?,
        Command::Linearize => ctx.linearize()?,
        Command::Levi => ctx.levi()?,
        Command::Rank => ctx.rank()?,
        Command::Detect => ctx.detect()?,
        Command::Fill => ctx.fill()?,
        Command::Dichotomy => ctx.dichotomy()?,
        Command::Selftest => ctx.selftest()?,
    };
    let mut report = json!({
        "report_version": REPORT_VERSION,
        "csv_version": CSV_VERSION,
        "command": cfg.command.as_str(),
        "scenario": ctx.sc.name,
        "dim": ctx.sc.dim(),
        "seed": ctx.seed,
        "grid": { "N": cfg.grid.n, "M": cfg.grid.m },
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut report, body) {
        for (k, v) in src {
            dst.insert(k, v);
        }
    }
    let passed = report.get("pass").and_then(Value::as_bool).unwrap_or(true);
    let report_path = out_dir.join(&cfg.output.report);
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&report_path, text)?;
    ctx.log.push(format!("wrote {}", report_path.display()));
    Ok(RunOutcome { report, report_path, artifacts: ctx.artifacts, passed, log: ctx.log })
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

/// Sum of `cos (cos kθ − 1) + sin sin kθ` per component.
fn mode_data(grid: &Arc<DiscGrid>, comps: usize, modes: &[ModeConfig]) -> Result<BoundaryFunction, ExperimentError> {
    if let Some(m) = modes.iter().find(|m| m.component >= comps) {
        return Err(ExperimentError::Config(format!("data mode component {} outside 0..{comps}", m.component)));
    }
    Ok(BoundaryFunction::from_fn_real(grid.clone(), comps, |c, t| {
        modes.iter().filter(|m| m.component == c).map(|m| m.cos * ((m.k as f64 * t).cos() - 1.0) + m.sin * (m.k as f64 * t).sin()).sum()
    }))
}

/// Random modes of degree `degree` with `sup|u'| = bound`.
fn random_modes(comps: usize, degree: usize, bound: f64, rng: &mut ChaCha8Rng) -> Vec<ModeConfig> {
    let mut modes = Vec::new();
    for k in 1..=degree {
        for c in 0..comps {
            modes.push(ModeConfig { component: c, k, cos: rng.random_range(-1.0..1.0), sin: rng.random_range(-1.0..1.0) });
        }
    }
    // sup|u'| ≤ Σ k (|a| + |b|) bounds the rescaling from above
    let grid = DiscGrid::shared(256, 4).expect("fixed grid");
    let u = mode_data(&grid, comps, &modes).expect("components in range");
    let sup = u.d_theta().sup_norm();
    if sup > 0.0 {
        for m in &mut modes {
            m.cos *= bound / sup;
            m.sin *= bound / sup;
        }
    }
    modes
}

/// Oracle parameters `ε (a − ib)(ζ^k − 1)` summed per component.
fn oracle_parameters(comps: usize, modes: &[ModeConfig], eps: f64) -> Option<OracleParameters> {
    let deg = modes.iter().map(|m| m.k).max().unwrap_or(1);
    let mut tang = vec![vec![Complex64::new(0.0, 0.0); deg + 1]; comps];
    for m in modes {
        let w = Complex64::new(m.cos, -m.sin) * eps;
        tang[m.component][m.k] += w;
        tang[m.component][0] -= w;
    }
    OracleParameters::new(tang).ok()
}

impl Context<'_> {
    fn tangential(&self) -> usize {
        self.sc.dim() - self.sc.hypersurface.codim()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn family_options(&self) -> FamilyOptions {
        let f = &self.cfg.family;
        FamilyOptions {
            solver: self.solver.clone(),
            method: match f.method {
                MethodConfig::Linearized => JacobianMethod::Linearized,
                MethodConfig::FiniteDifference => JacobianMethod::FiniteDifference,
            },
            rank_threshold: f.rank_threshold,
            stability_check: f.stability_check,
            workers: self.workers,
            seed: self.seed,
            ..FamilyOptions::default()
        }
    }

    /// Configured or random boundary data; random data uses half the
    /// smallness budget.
    fn data_modes(&self, modes: &Option<Vec<ModeConfig>>, stream: u64, bound: f64) -> Vec<ModeConfig> {
        match modes {
            Some(m) => m.clone(),
            None => random_modes(self.tangential(), self.cfg.data.degree.unwrap_or(1), bound, &mut self.rng(stream)),
        }
    }

    fn base_modes(&self) -> Vec<ModeConfig> {
        self.data_modes(&self.cfg.data.modes, DATA_STREAM, 0.5 * SMALLNESS_BOUND / self.cfg.solver.epsilon)
    }

    fn solve_base(&mut self) -> Result<(BishopDisc, Vec<ModeConfig>), ExperimentError> {
        let modes = self.base_modes();
        let data = mode_data(&self.grid, self.tangential(), &modes)?;
        let params = DiscParameters::new(self.sc.point().to_vec(), data, self.cfg.solver.epsilon, self.solver.clone())?;
        let disc = solve_bishop(&self.sc.structure, &self.sc.hypersurface, &params)?;
        self.log.push(format!("disc converged in {} iterations, residual {:e}", disc.iterations, disc.residuals().max()));
        Ok((disc, modes))
    }

    fn artifact(&mut self, name: &str) -> Result<BufWriter<File>, ExperimentError> {
        let p = self.out.join(name);
        let f = File::create(&p)?;
        self.artifacts.push(p);
        Ok(BufWriter::new(f))
    }

    fn disc_summary(&self, disc: &BishopDisc, modes: &[ModeConfig]) -> Value {
        let e = &self.sc.hypersurface;
        let trace = disc.z.boundary_trace();
        let max_rho = (0..self.grid.n())
            .map(|l| e.max_abs_rho(&(0..trace.comps()).map(|c| trace.samples(c)[l]).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        let oracle_error = if self.sc.oracle.family.is_some() {
            oracle_parameters(self.tangential(), modes, disc.epsilon)
                .and_then(|p| self.sc.oracle_disc(&p, self.grid.clone()).ok())
                .map(|o| o.add_scaled(&disc.z, Complex64::new(-1.0, 0.0)).sup_norm())
        } else {
            None
        };
        json!({
            "epsilon": disc.epsilon,
            "smallness": disc.epsilon * disc.data().d_theta().sup_norm(),
            "modes": modes.iter().map(|m| json!({"component": m.component, "k": m.k, "cos": m.cos, "sin": m.sin})).collect::<Vec<_>>(),
            "iterations": disc.iterations,
            "residuals": { "pde": disc.residual_pde, "bc": disc.residual_bc, "pin": disc.residual_pin },
            "tolerance": disc.tolerance,
            "deviation": disc.deviation(),
            "transversality": transversality(disc, e),
            "max_abs_rho_boundary": max_rho,
            "value_at_minus_one": pairs(&disc.eval(Complex64::new(-1.0, 0.0))),
            "oracle_error": oracle_error,
        })
    }

    fn solve(&mut self) -> Result<Value, ExperimentError> {
        let (disc, modes) = self.solve_base()?;
        write_boundary_csv(&disc.z, self.artifact("boundary.csv")?)?;
        write_interior_csv(&disc.z, self.artifact("interior.csv")?)?;
        write_replay(&disc, self.artifact("disc.replay")?)?;
        Ok(json!({ "disc": self.disc_summary(&disc, &modes) }))
    }

    fn linearize(&mut self) -> Result<Value, ExperimentError> {
        let (disc, modes) = self.solve_base()?;
        let nt = self.tangential();
        let dir_modes = self.data_modes(&self.cfg.data.direction, DIRECTION_STREAM, 1.0);
        let udot = mode_data(&self.grid, nt, &dir_modes)?;
        let lin = solve_linearized(&disc, &self.sc.structure, &self.sc.hypersurface, &udot)?;
        // central differences of the solver at the same ε
        let step = 1e-5;
        let fd_solve = |s: f64| -> Result<BishopDisc, ExperimentError> {
            let data = disc.data().add_scaled(&udot, s)?;
            let p = DiscParameters::new(self.sc.point().to_vec(), data, disc.epsilon, SolverOptions { tol: Some(1e-12), ..self.solver.clone() })?;
            Ok(solve_bishop(&self.sc.structure, &self.sc.hypersurface, &p)?)
        };
        let plus = fd_solve(step)?;
        let minus = fd_solve(-step)?;
        let fd = plus.z.add_scaled(&minus.z, Complex64::new(-1.0, 0.0)).scaled(Complex64::new(0.5 / step, 0.0));
        let scale = fd.sup_norm();
        let err = fd.add_scaled(&lin.zdot, Complex64::new(-1.0, 0.0)).sup_norm();
        let rel = if scale > 0.0 { err / scale } else { err };
        self.log.push(format!("linearized solve in {} iterations, relative difference to finite differences {rel:e}", lin.iterations));
        write_boundary_csv(&lin.zdot, self.artifact("linearized_boundary.csv")?)?;
        Ok(json!({
            "disc": self.disc_summary(&disc, &modes),
            "direction": dir_modes.iter().map(|m| json!({"component": m.component, "k": m.k, "cos": m.cos, "sin": m.sin})).collect::<Vec<_>>(),
            "linearized": {
                "iterations": lin.iterations,
                "residuals": { "pde": lin.residual_pde, "bc": lin.residual_bc, "pin": lin.residual_pin },
                "value_at_minus_one": pairs(&lin.eval(Complex64::new(-1.0, 0.0))),
                "sup_norm": lin.zdot.sup_norm(),
            },
            "finite_difference": { "step": step, "relative_error": rel, "absolute_error": err },
        }))
    }

    fn levi(&mut self) -> Result<Value, ExperimentError> {
        let (disc, modes) = self.solve_base()?;
        let scan = levi_vanishing_scan(&disc, &self.sc.hypersurface, &self.sc.structure)?;
        self.log.push(format!("Levi scan over {} boundary points: max |L| = {:e}", scan.samples, scan.max_abs));
        Ok(json!({
            "disc": self.disc_summary(&disc, &modes),
            "levi": scan,
            "expected_levi_flat": self.sc.oracle.levi_flat,
        }))
    }

    fn zetas(&self) -> Vec<Complex64> {
        self.cfg.family.zeta0.iter().map(|z| Complex64::new(z[0], z[1])).collect()
    }

    fn chart(&self) -> Result<FamilyChart, ExperimentError> {
        let modes = self.base_modes();
        let base = mode_data(&self.grid, self.tangential(), &modes)?;
        let f = &self.cfg.family;
        Ok(FamilyChart::new(self.sc.point().to_vec(), base, self.cfg.solver.epsilon, f.basis_degree, f.basis_count, self.zetas()[0])?)
    }

    fn rank(&mut self) -> Result<Value, ExperimentError> {
        let chart = self.chart()?;
        let opts = self.family_options();
        let reports = evaluation_jacobians(&self.sc.structure, &self.sc.hypersurface, &chart, &opts, &self.zetas())?;
        for r in &reports {
            self.log.push(format!("zeta0 = {:?}: rank {} of {} rows, singular values {:?}", r.zeta0, r.rank, r.chart_rows, r.singular_values));
        }
        let mut body = serde_json::to_value(&reports[0])?;
        if let Value::Object(m) = &mut body {
            m.insert("expected_rank".into(), json!(self.sc.oracle.expected_rank));
            m.insert("evaluations".into(), serde_json::to_value(&reports)?);
        }
        Ok(body)
    }

    fn detect(&mut self) -> Result<Value, ExperimentError> {
        let chart = self.chart()?;
        let opts = self.family_options();
        let v = detect_complex_hypersurface(&self.sc.structure, &self.sc.hypersurface, &chart, &opts, self.cfg.family.base_samples, &self.zetas())?;
        self.log.push(format!("max rank {} (bound {}), J-invariance defect {:e}", v.max_rank, v.rank_bound, v.j_invariance_defect));
        write_witness_csv(&v, self.artifact("witnesses.csv")?)?;
        Ok(json!({ "hypersurface": v }))
    }

    fn fill_options(&self) -> FillOptions {
        let f = &self.cfg.fill;
        FillOptions { delta: f.delta, h: f.h, sweep_size: f.sweep_size, search_size: f.search_size, test_points: f.test_points, ..FillOptions::default() }
    }

    fn fill(&mut self) -> Result<Value, ExperimentError> {
        let opts = self.family_options();
        match fill_one_sided(&self.sc.structure, &self.sc.hypersurface, &opts, &self.fill_options()) {
            Ok(r) => {
                self.log.push(format!("{} disc solves, side {}, coverage {}", r.disc_solves, r.side.as_str(), r.coverage.fraction));
                let mut body = serde_json::to_value(&r)?;
                if let Value::Object(m) = &mut body {
                    m.insert("outcome".into(), json!("transverse_disc"));
                    m.insert("expected_side".into(), json!(self.sc.oracle.expected_side));
                }
                Ok(body)
            }
            Err(FamilyError::NoTransverseDisc { max_transversality, discs, collected, max_abs_rho }) => {
                self.log.push(format!("no transverse disc among {discs} discs (max |transversality| {max_transversality:e})"));
                Ok(json!({
                    "outcome": "no_transverse_disc",
                    "side": null,
                    "coverage": null,
                    "max_transversality": max_transversality,
                    "discs": discs,
                    "collected_points": collected,
                    "max_abs_rho_collected": max_abs_rho,
                }))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn dichotomy(&mut self) -> Result<Value, ExperimentError> {
        let opts = self.family_options();
        let mut zetas = self.zetas();
        zetas.extend(circle_points(8));
        let d = DichotomyOptions {
            search_size: self.cfg.fill.search_size,
            chart_degree: self.cfg.family.basis_degree,
            base_samples: self.cfg.family.base_samples,
            zetas,
            ..DichotomyOptions::default()
        };
        let r = dichotomy(&self.sc.structure, &self.sc.hypersurface, &opts, &d)?;
        self.log.push(format!("outcome {:?}", r.outcome));
        let mut body = serde_json::to_value(&r)?;
        if let Value::Object(m) = &mut body {
            m.insert("expected_outcome".into(), serde_json::to_value(self.sc.oracle.expected_outcome)?);
        }
        Ok(body)
    }

    fn selftest(&mut self) -> Result<Value, ExperimentError> {
        let checks = selftest(&self.grid, self.seed);
        let pass = checks.iter().all(|c| c.pass);
        for c in &checks {
            self.log.push(format!("{}: max error {:e} (tolerance {:e}) {}", c.name, c.max_error, c.tolerance, if c.pass { "ok" } else { "FAIL" }));
        }
        Ok(json!({ "pass": pass, "checks": checks }))
    }
}
