use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::chart::{random_data, FamilyChart};
use super::{complex_pair, in_pool, FamilyError, FamilyOptions, JacobianMethod};
use crate::bishop::{solve_bishop, BishopDisc, DiscParameters, LinearizedProblem};
use crate::disc::DiscFunction;
use crate::geometry::{holomorphic_tangent_basis_with_tol, tangent_matrix, to_real, HypersurfaceSpec, RMatrix, StructureSpec};

/// Membership tolerance for points `z(ζ₀)` of converged discs.
pub(crate) const DISC_POINT_TOL: f64 = 1e-6;

/// Relative band around the rank threshold inside which a verdict is not trusted.
const INCONCLUSIVE_BAND: f64 = 100.0;

/// Base disc of a chart and the variations `ż_k` along its basis.
pub struct Variations {
    pub disc: BishopDisc,
    pub zdot: Vec<DiscFunction>,
}

pub fn solve_variations(s: &StructureSpec, e: &HypersurfaceSpec, chart: &FamilyChart, opts: &FamilyOptions) -> Result<Variations, FamilyError> {
    let params = DiscParameters::new(chart.point.clone(), chart.base.clone(), chart.epsilon, opts.solver.clone())?;
    match opts.method {
        JacobianMethod::Linearized => {
            let disc = solve_bishop(s, e, &params)?;
            let zdot = {
                let prob = LinearizedProblem::new(s, e, &disc)?;
                in_pool(opts.workers, || chart.basis.par_iter().map(|u| prob.solve(u).map(|l| l.zdot)).collect::<Result<Vec<_>, _>>())?
            };
            Ok(Variations { disc, zdot })
        }
        JacobianMethod::FiniteDifference => {
            let mut tight = opts.solver.clone();
            tight.tol = Some(tight.tol.unwrap_or(1e-12).min(1e-12));
            let params = DiscParameters::new(chart.point.clone(), chart.base.clone(), chart.epsilon, tight.clone())?;
            let disc = solve_bishop(s, e, &params)?;
            let step = opts.fd_step;
            let zdot = in_pool(opts.workers, || {
                chart
                    .basis
                    .par_iter()
                    .map(|u| -> Result<DiscFunction, FamilyError> {
                        let moved = chart.base.add_scaled(u, step)?;
                        let p = DiscParameters::new(chart.point.clone(), moved, chart.epsilon, tight.clone())?;
                        let z = solve_bishop(s, e, &p)?;
                        Ok(z.z.add_scaled(&disc.z, Complex64::new(-1.0, 0.0)).scaled(Complex64::new(1.0 / step, 0.0)))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })?;
            Ok(Variations { disc, zdot })
        }
    }
}

/// Jacobian of `z ↦ z(ζ₀)` at one evaluation point.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub zeta0: [f64; 2],
    pub method: JacobianMethod,
    pub basis_degree: usize,
    pub basis_count: usize,
    pub gram_condition: f64,
    /// `2n − d`: rows in the chart of `E` at `z(ζ₀)`.
    pub chart_rows: usize,
    pub jacobian: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub rank: usize,
    pub inconclusive: bool,
    /// Rank of `z ↦ ∂_r z(1)` in real coordinates of ℂⁿ.
    pub radial_derivative_rank: usize,
    pub radial_derivative_singular_values: Vec<f64>,
    pub rank_doubled_degree: Option<usize>,
    pub rank_stable: Option<bool>,
    pub base_deviation: f64,
    pub evaluation_point: Vec<[f64; 2]>,
}

pub(crate) fn sorted_singular_values(m: &RMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn numerical_rank(sv: &[f64], threshold: f64) -> usize {
    match sv.first() {
        Some(&s1) if s1 > 0.0 => sv.iter().filter(|&&s| s > s1 * threshold).count(),
        _ => 0,
    }
}

fn near_threshold(sv: &[f64], threshold: f64) -> Option<f64> {
    let s1 = *sv.first()?;
    if s1 == 0.0 {
        return None;
    }
    sv.iter().map(|s| s / s1).find(|r| *r > threshold / INCONCLUSIVE_BAND && *r < threshold * INCONCLUSIVE_BAND)
}

/// Tangent-chart and full real Jacobians of the evaluation at `zeta0`.
pub(crate) struct PointJacobian {
    pub q: Vec<Complex64>,
    pub full: RMatrix,
    pub chart: RMatrix,
    pub tangent: RMatrix,
}

pub(crate) fn point_jacobian(s: &StructureSpec, e: &HypersurfaceSpec, v: &Variations, zeta0: Complex64) -> Result<PointJacobian, FamilyError> {
    let q = v.disc.eval(zeta0);
    let frame = holomorphic_tangent_basis_with_tol(e, &q, s, DISC_POINT_TOL)?;
    let tangent = tangent_matrix(&frame);
    let cols: Vec<DVector<f64>> = v.zdot.iter().map(|zd| to_real(&zd.eval(zeta0))).collect();
    let full = RMatrix::from_columns(&cols);
    let chart = tangent.transpose() * &full;
    Ok(PointJacobian { q, full, chart, tangent })
}

fn report_for(chart: &FamilyChart, opts: &FamilyOptions, s: &StructureSpec, e: &HypersurfaceSpec, v: &Variations, zeta0: Complex64) -> Result<FamilyReport, FamilyError> {
    let pj = point_jacobian(s, e, v, zeta0)?;
    let sv = sorted_singular_values(&pj.chart);
    let radial_cols: Vec<DVector<f64>> = v
        .zdot
        .iter()
        .map(|zd| {
            let b = zd.boundary_radial_derivative();
            let at_one: Vec<Complex64> = (0..b.comps()).map(|c| b.samples(c)[0]).collect();
            to_real(&at_one)
        })
        .collect();
    let rsv = sorted_singular_values(&RMatrix::from_columns(&radial_cols));
    Ok(FamilyReport {
        zeta0: [zeta0.re, zeta0.im],
        method: opts.method,
        basis_degree: chart.degree,
        basis_count: chart.basis.len(),
        gram_condition: chart.gram_condition(),
        chart_rows: pj.chart.nrows(),
        jacobian: (0..pj.chart.nrows()).map(|i| pj.chart.row(i).iter().cloned().collect()).collect(),
        rank: numerical_rank(&sv, opts.rank_threshold),
        inconclusive: near_threshold(&sv, opts.rank_threshold).is_some(),
        singular_values: sv,
        threshold: opts.rank_threshold,
        radial_derivative_rank: numerical_rank(&rsv, opts.rank_threshold),
        radial_derivative_singular_values: rsv,
        rank_doubled_degree: None,
        rank_stable: None,
        base_deviation: v.disc.deviation(),
        evaluation_point: pj.q.iter().map(|c| complex_pair(*c)).collect(),
    })
}

/// Reports for each point of `zetas` (the chart's own `ζ₀` when empty),
/// sharing one set of variations. With `opts.stability_check` the rank is
/// recomputed at doubled basis degree.
pub fn evaluation_jacobians(s: &StructureSpec, e: &HypersurfaceSpec, chart: &FamilyChart, opts: &FamilyOptions, zetas: &[Complex64]) -> Result<Vec<FamilyReport>, FamilyError> {
    let zetas: Vec<Complex64> = if zetas.is_empty() { vec![chart.zeta0] } else { zetas.to_vec() };
    let v = solve_variations(s, e, chart, opts)?;
    let mut reports = zetas.iter().map(|z| report_for(chart, opts, s, e, &v, *z)).collect::<Result<Vec<_>, _>>()?;
    if opts.stability_check {
        let doubled = chart.doubled();
        let v2 = solve_variations(s, e, &doubled, opts)?;
        for (r, z) in reports.iter_mut().zip(&zetas) {
            let pj = point_jacobian(s, e, &v2, *z)?;
            let rank2 = numerical_rank(&sorted_singular_values(&pj.chart), opts.rank_threshold);
            r.rank_doubled_degree = Some(rank2);
            r.rank_stable = Some(rank2 == r.rank);
        }
    }
    Ok(reports)
}

pub fn evaluation_jacobian(s: &StructureSpec, e: &HypersurfaceSpec, chart: &FamilyChart, opts: &FamilyOptions) -> Result<FamilyReport, FamilyError> {
    Ok(evaluation_jacobians(s, e, chart, opts, &[chart.zeta0])?.remove(0))
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub disc: usize,
    pub zeta: [f64; 2],
    pub point: Vec<[f64; 2]>,
}

/// Outcome of the degenerate-rank test for a family.
#[derive(Clone, Debug, Serialize)]
pub struct HypersurfaceVerdict {
    pub detected: bool,
    pub max_rank: usize,
    /// `2n − 2`.
    pub rank_bound: usize,
    pub discs: usize,
    pub evaluation_points: usize,
    /// Largest `|(I − P_V) J P_V|` over witnesses, `V` the span of variations.
    pub j_invariance_defect: f64,
    /// Largest `|dρ(ż)| / |ż|` over witnesses and variations.
    pub tangency_defect: f64,
    pub max_abs_rho: f64,
    #[serde(skip)]
    pub witnesses: Vec<Witness>,
}

/// Orthonormal basis of the column span of `m` above the relative threshold.
fn column_span(m: &RMatrix, threshold: f64) -> RMatrix {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let s1 = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| s1 > 0.0 && svd.singular_values[i] > s1 * threshold).collect();
    RMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

fn j_defect(s: &StructureSpec, q: &[Complex64], span: &RMatrix) -> Result<f64, FamilyError> {
    if span.ncols() == 0 {
        return Ok(0.0);
    }
    let j = s.j(q)?;
    let ju = &j * span;
    let resid = &ju - span * (span.transpose() * &ju);
    Ok(resid.column_iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Samples base discs (the chart's base plus `base_samples` random ones)
/// and evaluation points; reports a complex hypersurface when the rank of
/// `z ↦ z(ζ₀)` never exceeds `2n − 2`.
pub fn detect_complex_hypersurface(
    s: &StructureSpec,
    e: &HypersurfaceSpec,
    chart: &FamilyChart,
    opts: &FamilyOptions,
    base_samples: usize,
    zetas: &[Complex64],
) -> Result<HypersurfaceVerdict, FamilyError> {
    let n = s.dim();
    let zetas: Vec<Complex64> = if zetas.is_empty() { vec![chart.zeta0] } else { zetas.to_vec() };
    let grid = chart.base.grid().clone();
    let nt = chart.base.comps();
    let mut charts = vec![chart.clone()];
    for i in 0..base_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(0x6465_7465_0000 + i as u64);
        let bound = rand::Rng::random_range(&mut rng, 0.3..0.9) * crate::bishop::SMALLNESS_BOUND / chart.epsilon;
        let base = random_data(&grid, nt, chart.degree, bound, &mut rng);
        charts.push(FamilyChart { base, ..chart.clone() });
    }
    let mut verdict = HypersurfaceVerdict {
        detected: false,
        max_rank: 0,
        rank_bound: 2 * n - 2,
        discs: charts.len(),
        evaluation_points: zetas.len(),
        j_invariance_defect: 0.0,
        tangency_defect: 0.0,
        max_abs_rho: 0.0,
        witnesses: Vec::new(),
    };
    for (di, c) in charts.iter().enumerate() {
        let v = solve_variations(s, e, c, opts)?;
        for z0 in &zetas {
            let pj = point_jacobian(s, e, &v, *z0)?;
            let sv = sorted_singular_values(&pj.chart);
            if let Some(ratio) = near_threshold(&sv, opts.rank_threshold) {
                return Err(FamilyError::InconclusiveRank { ratio, threshold: opts.rank_threshold });
            }
            let rank = numerical_rank(&sv, opts.rank_threshold);
            verdict.max_rank = verdict.max_rank.max(rank);
            let span = column_span(&pj.full, opts.rank_threshold);
            verdict.j_invariance_defect = verdict.j_invariance_defect.max(j_defect(s, &pj.q, &span)?);
            let normal = RMatrix::identity(2 * n, 2 * n) - &pj.tangent * pj.tangent.transpose();
            for col in pj.full.column_iter() {
                let cn = col.norm();
                if cn > 0.0 {
                    verdict.tangency_defect = verdict.tangency_defect.max((&normal * col).norm() / cn);
                }
            }
            verdict.max_abs_rho = verdict.max_abs_rho.max(e.max_abs_rho(&pj.q));
            verdict.witnesses.push(Witness { disc: di, zeta: complex_pair(*z0), point: pj.q.iter().map(|c| complex_pair(*c)).collect() });
        }
    }
    verdict.detected = verdict.max_rank <= verdict.rank_bound;
    Ok(verdict)
}

/// Witness cloud as CSV: `disc, zeta_re, zeta_im, re_z1, im_z1, …`.
pub fn write_witness_csv<W: Write>(verdict: &HypersurfaceVerdict, w: W) -> Result<(), FamilyError> {
    let mut wr = csv::Writer::from_writer(w);
    let comps = verdict.witnesses.first().map_or(0, |wi| wi.point.len());
    let mut header = vec!["disc".to_string(), "zeta_re".to_string(), "zeta_im".to_string()];
    for c in 1..=comps {
        header.push(format!("re_z{c}"));
        header.push(format!("im_z{c}"));
    }
    wr.write_record(&header)?;
    for wi in &verdict.witnesses {
        let mut rec = vec![wi.disc.to_string(), format!("{:?}", wi.zeta[0]), format!("{:?}", wi.zeta[1])];
        for p in &wi.point {
            rec.push(format!("{:?}", p[0]));
            rec.push(format!("{:?}", p[1]));
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}
