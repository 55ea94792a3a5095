use num_complex::Complex64;
use serde::Serialize;

use super::chart::{circle_points, FamilyChart};
use super::fill::search_transverse;
use super::levi_scan::{levi_vanishing_scan, LeviScan};
use super::rank::{detect_complex_hypersurface, HypersurfaceVerdict};
use super::{FamilyError, FamilyOptions};
use crate::geometry::{HypersurfaceSpec, StructureSpec};
use crate::scenarios::DichotomyOutcome;

#[derive(Clone, Debug)]
pub struct DichotomyOptions {
    pub search_size: usize,
    pub data_degree: usize,
    pub chart_degree: usize,
    pub base_samples: usize,
    pub zetas: Vec<Complex64>,
    pub transversality_tol: f64,
    pub levi_tol: f64,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        let mut zetas = vec![Complex64::new(-1.0, 0.0)];
        zetas.extend(circle_points(8));
        DichotomyOptions { search_size: 16, data_degree: 2, chart_degree: 2, base_samples: 2, zetas, transversality_tol: 1e-7, levi_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    pub outcome: DichotomyOutcome,
    pub max_transversality: f64,
    pub discs: usize,
    pub hypersurface: Option<HypersurfaceVerdict>,
    pub levi: Option<LeviScan>,
    pub inconclusive_reason: Option<String>,
}

/// Runs the three tests in order: a transverse disc at `p`, a complex
/// hypersurface through the evaluation images, identically vanishing Levi
/// form along the sampled disc boundaries.
pub fn dichotomy(s: &StructureSpec, e: &HypersurfaceSpec, opts: &FamilyOptions, d: &DichotomyOptions) -> Result<DichotomyReport, FamilyError> {
    let p = e.point().to_vec();
    let search = search_transverse(s, e, &p, opts, d.search_size, d.data_degree)?;
    let max_t = search.max_abs();
    let mut report = DichotomyReport {
        outcome: DichotomyOutcome::Inconclusive,
        max_transversality: max_t,
        discs: search.discs.len(),
        hypersurface: None,
        levi: None,
        inconclusive_reason: None,
    };
    if max_t > d.transversality_tol {
        report.outcome = DichotomyOutcome::TransverseDisc;
        return Ok(report);
    }
    let base = search.discs[0].0.data().clone();
    let chart = FamilyChart::new(p, base, 1.0, d.chart_degree, None, d.zetas.first().copied().unwrap_or(Complex64::new(-1.0, 0.0)))?;
    match detect_complex_hypersurface(s, e, &chart, opts, d.base_samples, &d.zetas) {
        Ok(v) => {
            let detected = v.detected;
            report.hypersurface = Some(v);
            if detected {
                report.outcome = DichotomyOutcome::ComplexHypersurface;
                return Ok(report);
            }
        }
        Err(FamilyError::InconclusiveRank { ratio, .. }) => {
            report.inconclusive_reason = Some(format!("singular value ratio {ratio:e} near the rank threshold"));
        }
        Err(err) => return Err(err),
    }
    let mut levi: Option<LeviScan> = None;
    for (disc, _) in &search.discs {
        let scan = levi_vanishing_scan(disc, e, s)?;
        match levi.as_mut() {
            Some(l) => l.merge(&scan),
            None => levi = Some(scan),
        }
    }
    let flat = levi.as_ref().is_some_and(|l| l.max_abs <= d.levi_tol);
    report.levi = levi;
    if flat && report.inconclusive_reason.is_none() {
        report.outcome = DichotomyOutcome::LeviVanishing;
    } else if report.inconclusive_reason.is_none() {
        report.inconclusive_reason = Some("no transverse disc, full rank and nonzero Levi form".into());
    }
    Ok(report)
}
