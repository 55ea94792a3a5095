use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::chart::random_data;
use super::{in_pool, FamilyError, FamilyOptions};
use crate::bishop::{solve_bishop, transversality, BishopDisc, DiscParameters, SMALLNESS_BOUND};
use crate::disc::{schwarz, BoundaryFunction, DiscGrid};
use crate::geometry::{holomorphic_tangent_basis, to_complex, to_real, HypersurfaceSpec, StructureSpec};

const SEARCH_STREAM: u64 = 0x7365_6172_0000;
const SWEEP_STREAM: u64 = 0x7377_6565_0000;
const TEST_STREAM: u64 = 0x7465_7374_0000;

/// Points with `|ρ|` below this count as lying on `E`.
const SIDE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct FillOptions {
    pub delta: f64,
    pub h: f64,
    /// Disc solves in the filling sweep.
    pub sweep_size: usize,
    /// Disc solves spent looking for a transverse disc at `p`.
    pub search_size: usize,
    pub data_degree: usize,
    pub test_points: usize,
    /// `|transversality|` above this counts as transverse.
    pub transversality_tol: f64,
    /// Extra samples per disc around grid nodes landing near `p`.
    pub patch_points: usize,
}

impl Default for FillOptions {
    fn default() -> Self {
        FillOptions {
            delta: 0.05,
            h: 0.01,
            sweep_size: 4000,
            search_size: 32,
            data_degree: 1,
            test_points: 4000,
            transversality_tol: 1e-7,
            patch_points: 96,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Inside,
    Outside,
    Both,
    None,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Inside => "inside",
            Side::Outside => "outside",
            Side::Both => "both",
            Side::None => "none",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Coverage {
    pub side: Side,
    /// Fraction of test points of `B(p, δ/2)` on `side` within `h` of a collected point.
    pub fraction: f64,
    /// Fractions of collected points off `E` with `ρ < 0` and `ρ > 0`.
    pub inside_fraction: f64,
    pub outside_fraction: f64,
    pub delta: f64,
    pub h: f64,
    pub n_points: usize,
    pub test_points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FillReport {
    pub side: Side,
    pub coverage: Coverage,
    /// Signed transversality of the most transverse disc found at `p`.
    pub transversality: f64,
    pub transverse_discs: usize,
    pub disc_solves: usize,
    pub failed_solves: usize,
    pub points_inside: usize,
    pub points_outside: usize,
    pub points_on_e: usize,
}

/// Discs attached at one point with random data and their transversality.
pub(crate) struct Search {
    pub discs: Vec<(BishopDisc, f64)>,
    pub failed: usize,
}

impl Search {
    pub fn max_abs(&self) -> f64 {
        self.discs.iter().map(|(_, t)| t.abs()).fold(0.0, f64::max)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn solve_at(s: &StructureSpec, e: &HypersurfaceSpec, p: Vec<Complex64>, data: BoundaryFunction, opts: &FamilyOptions) -> Option<BishopDisc> {
    let params = DiscParameters::new(p, data, 1.0, opts.solver.clone()).ok()?;
    solve_bishop(s, e, &params).ok()
}

pub(crate) fn search_transverse(s: &StructureSpec, e: &HypersurfaceSpec, p: &[Complex64], opts: &FamilyOptions, size: usize, degree: usize) -> Result<Search, FamilyError> {
    let grid = DiscGrid::shared(opts.solver.n, opts.solver.m)?;
    let nt = e.dim() - e.codim();
    let results: Vec<Option<(BishopDisc, f64)>> = in_pool(opts.workers, || {
        (0..size)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(opts.seed, SEARCH_STREAM + i as u64);
                let bound = rng.random_range(0.5..0.95) * SMALLNESS_BOUND;
                let data = random_data(&grid, nt, degree, bound, &mut rng);
                let disc = solve_at(s, e, p.to_vec(), data, opts)?;
                let t = transversality(&disc, e);
                Some((disc, t))
            })
            .collect()
    });
    let failed = results.iter().filter(|r| r.is_none()).count();
    let discs: Vec<(BishopDisc, f64)> = results.into_iter().flatten().collect();
    if discs.is_empty() && size > 0 {
        return Err(FamilyError::AllSolvesFailed(size));
    }
    Ok(Search { discs, failed })
}

/// Grid values of a disc within `radius` of `center`, plus `extra` samples
/// jittered around those nodes.
fn disc_points<R: Rng>(disc: &BishopDisc, center: &DVector<f64>, radius: f64, extra: usize, rng: &mut R) -> Vec<Vec<Complex64>> {
    let grid = disc.grid();
    let (n, m) = (grid.n(), grid.m());
    let vals = disc.z.values();
    let close = |q: &[Complex64]| (to_real(q) - center).norm() <= radius;
    let mut pts = Vec::new();
    let mut seeds = Vec::new();
    for mi in 0..m {
        for l in 0..n {
            let q: Vec<Complex64> = vals.iter().map(|c| c[mi * n + l]).collect();
            if (to_real(&q) - center).norm() <= 1.5 * radius {
                seeds.push(grid.point(mi, l));
            }
            if close(&q) {
                pts.push(q);
            }
        }
    }
    if seeds.is_empty() {
        return pts;
    }
    let step = 2.0 * PI / n as f64;
    for _ in 0..extra {
        let base = seeds[rng.random_range(0..seeds.len())];
        let mut zeta = base + Complex64::new(rng.random_range(-step..step), rng.random_range(-step..step));
        if zeta.norm() > 1.0 {
            zeta /= zeta.norm();
        }
        let q = disc.eval(zeta);
        if close(&q) {
            pts.push(q);
        }
    }
    pts
}

struct HashGrid {
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<DVector<f64>>,
}

impl HashGrid {
    fn new(cell: f64, points: Vec<DVector<f64>>) -> Self {
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(Self::key(cell, p)).or_default().push(i);
        }
        HashGrid { cell, map, points }
    }

    fn key(cell: f64, p: &DVector<f64>) -> Vec<i64> {
        p.iter().map(|x| (x / cell).floor() as i64).collect()
    }

    /// True when some stored point lies within `self.cell` of `x`.
    fn hit(&self, x: &DVector<f64>) -> bool {
        let base = Self::key(self.cell, x);
        let dim = base.len();
        let mut offset = vec![-1i64; dim];
        loop {
            let k: Vec<i64> = base.iter().zip(&offset).map(|(a, b)| a + b).collect();
            if let Some(ids) = self.map.get(&k) {
                if ids.iter().any(|&i| (&self.points[i] - x).norm() <= self.cell) {
                    return true;
                }
            }
            let mut j = 0;
            loop {
                if j == dim {
                    return false;
                }
                offset[j] += 1;
                if offset[j] <= 1 {
                    break;
                }
                offset[j] = -1;
                j += 1;
            }
        }
    }
}

fn side_of(inside: usize, outside: usize) -> Side {
    match (inside > 0, outside > 0) {
        (true, true) => Side::Both,
        (true, false) => Side::Inside,
        (false, true) => Side::Outside,
        (false, false) => Side::None,
    }
}

/// Attached discs at `p` and its neighbours on `E`: finds a transverse disc,
/// sweeps rotated, rescaled copies of its data over attachment points near
/// `p`, and measures how much of `B(p, δ/2)` the collected points reach.
pub fn fill_one_sided(s: &StructureSpec, e: &HypersurfaceSpec, opts: &FamilyOptions, fill: &FillOptions) -> Result<FillReport, FamilyError> {
    if e.codim() != 1 {
        return Err(FamilyError::InvalidChart("one-sided filling needs a real hypersurface".into()));
    }
    if !(fill.delta > 0.0 && fill.h > 0.0) {
        return Err(FamilyError::InvalidChart("delta and h must be positive".into()));
    }
    let p = e.point().to_vec();
    let preal = to_real(&p);
    let search = search_transverse(s, e, &p, opts, fill.search_size, fill.data_degree)?;
    let best = search.discs.iter().map(|(_, t)| *t).fold(0.0f64, |m, t| if t.abs() > m.abs() { t } else { m });
    if best.abs() <= fill.transversality_tol {
        let mut rng = stream_rng(opts.seed, SWEEP_STREAM);
        let mut collected = 0;
        let mut max_abs_rho: f64 = 0.0;
        for (d, _) in &search.discs {
            for q in disc_points(d, &preal, fill.delta, fill.patch_points, &mut rng) {
                collected += 1;
                max_abs_rho = max_abs_rho.max(e.max_abs_rho(&q));
            }
        }
        return Err(FamilyError::NoTransverseDisc { max_transversality: best.abs(), discs: search.discs.len(), collected, max_abs_rho });
    }
    // transversality per squared smallness: how far a disc gets off E for its data budget
    let efficiency = |d: &BishopDisc, t: f64| t.abs() / (d.epsilon * d.data().d_theta().sup_norm()).powi(2);
    let best_eff = search.discs.iter().map(|(d, t)| efficiency(d, *t)).fold(0.0, f64::max);
    let templates: Vec<&BishopDisc> = search.discs.iter().filter(|(d, t)| efficiency(d, *t) >= 0.5 * best_eff).map(|(d, _)| d).collect();
    let holo: Vec<Vec<Complex64>> = templates
        .iter()
        .map(|d| {
            let h = schwarz(d.data());
            (0..h.comps()).map(|c| h.boundary_values(c)).collect::<Vec<_>>().concat()
        })
        .collect();
    let frame = holomorphic_tangent_basis(e, &p, s)?;
    let tangent = frame.real_tangent.clone();
    let grid = DiscGrid::shared(opts.solver.n, opts.solver.m)?;
    let nb = grid.n();
    let nt = e.dim() - 1;

    let per_disc: Vec<Option<Vec<Vec<Complex64>>>> = in_pool(opts.workers, || {
        (0..fill.sweep_size)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(opts.seed, SWEEP_STREAM + 1 + i as u64);
                let ti = i % templates.len();
                let template = templates[ti];
                let rot = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
                let samples: Vec<Vec<f64>> = (0..nt).map(|c| (0..nb).map(|l| (rot * holo[ti][c * nb + l]).re).collect()).collect();
                let data = BoundaryFunction::from_real_samples(grid.clone(), samples).ok()?;
                let bound = rng.random_range(0.7..0.95) * SMALLNESS_BOUND;
                let gain = bound / data.d_theta().sup_norm().max(f64::MIN_POSITIVE);
                let data = data.scaled(gain);
                // attachment offset: uniform in a ball of T_pE
                let radius = fill.delta + 0.5 * gain * template.deviation();
                let dim = tangent.len();
                let offset = loop {
                    let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    if w.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                        break w;
                    }
                };
                let mut x = preal.clone();
                for (b, w) in tangent.iter().zip(&offset) {
                    x += b * (w * radius);
                }
                let attach = e.project(&to_complex(x.as_slice()), 50)?;
                let disc = solve_at(s, e, attach, data, opts)?;
                Some(disc_points(&disc, &preal, fill.delta, fill.patch_points, &mut rng))
            })
            .collect()
    });
    let failed = per_disc.iter().filter(|r| r.is_none()).count() + search.failed;
    let mut points: Vec<DVector<f64>> = Vec::new();
    let (mut inside, mut outside, mut on_e) = (0, 0, 0);
    for q in per_disc.into_iter().flatten().flatten() {
        let r = e.rho(&q)[0];
        if r < -SIDE_TOL {
            inside += 1;
        } else if r > SIDE_TOL {
            outside += 1;
        } else {
            on_e += 1;
        }
        points.push(to_real(&q));
    }
    let side = side_of(inside, outside);
    let n_points = points.len();
    let grid_index = HashGrid::new(fill.h, points);

    let mut rng = stream_rng(opts.seed, TEST_STREAM);
    let dim = preal.len();
    let (mut hit_side, mut tot_side) = (0usize, 0usize);
    for _ in 0..fill.test_points {
        let w = loop {
            let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            if w.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                break w;
            }
        };
        let x = &preal + DVector::from_vec(w) * (0.5 * fill.delta);
        let r = e.rho(&to_complex(x.as_slice()))[0];
        let on_side = match side {
            Side::Inside => r < 0.0,
            Side::Outside => r > 0.0,
            Side::Both => true,
            Side::None => false,
        };
        if on_side {
            tot_side += 1;
            hit_side += grid_index.hit(&x) as usize;
        }
    }
    let frac = |h: usize, t: usize| if t == 0 { 0.0 } else { h as f64 / t as f64 };
    let coverage = Coverage {
        side,
        fraction: frac(hit_side, tot_side),
        inside_fraction: frac(inside, inside + outside),
        outside_fraction: frac(outside, inside + outside),
        delta: fill.delta,
        h: fill.h,
        n_points,
        test_points: tot_side,
    };
    Ok(FillReport {
        side,
        coverage,
        transversality: best,
        transverse_discs: templates.len(),
        disc_solves: search.discs.len() + search.failed + fill.sweep_size,
        failed_solves: failed,
        points_inside: inside,
        points_outside: outside,
        points_on_e: on_e,
    })
}
