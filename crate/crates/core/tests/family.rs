use bishop_core::bishop::SolverOptions;
use bishop_core::disc::{BoundaryFunction, DiscGrid, ValueKind};
use bishop_core::family::*;
use bishop_core::geometry::{HypersurfaceSpec, Monomial, Polynomial};
use bishop_core::scenarios::{builtin, Scenario};
use bishop_core::bishop::{solve_bishop, DiscParameters};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn opts(n: usize, m: usize) -> FamilyOptions {
    FamilyOptions { solver: SolverOptions::with_grid(n, m), ..FamilyOptions::default() }
}

fn linear_data(grid: &std::sync::Arc<DiscGrid>, nt: usize) -> BoundaryFunction {
    BoundaryFunction::from_fn_real(grid.clone(), nt, |j, t| if j == 0 { t.cos() - 1.0 } else { t.sin() + 0.3 * ((2.0 * t).cos() - 1.0) })
}

fn chart(sc: &Scenario, base: BoundaryFunction, eps: f64, degree: usize) -> FamilyChart {
    FamilyChart::new(sc.point().to_vec(), base, eps, degree, None, c(-1.0, 0.0)).unwrap()
}

#[test]
fn ir_rank_is_five_off_the_constant_disc() {
    let sc = builtin("ivashkovich-rosay").unwrap();
    let o = opts(64, 16);
    let grid = DiscGrid::shared(64, 16).unwrap();
    let r = evaluation_jacobian(&sc.structure, &sc.hypersurface, &chart(&sc, linear_data(&grid, 2), 0.1, 2), &o).unwrap();
    assert_eq!(r.rank, 5);
    assert!(r.singular_values[4] / r.singular_values[0] >= 1e-3);
    assert_eq!(r.rank_stable, Some(true));
    let r0 = evaluation_jacobian(&sc.structure, &sc.hypersurface, &chart(&sc, BoundaryFunction::zeros(grid, 2, ValueKind::Real), 0.1, 2), &o).unwrap();
    assert!(r0.rank <= 4);
}

#[test]
fn standard_flat_rank_four_and_hypersurface() {
    let sc = builtin("standard-leviflat-C3").unwrap();
    let o = opts(64, 16);
    let grid = DiscGrid::shared(64, 16).unwrap();
    let ch = chart(&sc, linear_data(&grid, 2), 0.1, 2);
    let r = evaluation_jacobian(&sc.structure, &sc.hypersurface, &ch, &o).unwrap();
    assert_eq!(r.rank, 4);
    let v = detect_complex_hypersurface(&sc.structure, &sc.hypersurface, &ch, &o, 2, &circle_points(8)).unwrap();
    assert!(v.detected);
    assert!(v.j_invariance_defect <= 1e-8);
    assert!(v.witnesses.iter().all(|w| w.point[2][0].abs() <= 1e-8 && w.point[2][1].abs() <= 1e-8));
    let ir = builtin("ivashkovich-rosay").unwrap();
    let v = detect_complex_hypersurface(&ir.structure, &ir.hypersurface, &ch, &o, 1, &[c(-1.0, 0.0)]).unwrap();
    assert!(!v.detected);
}

#[test]
fn levi_scans() {
    let o = SolverOptions::with_grid(64, 16);
    let grid = DiscGrid::shared(64, 16).unwrap();
    let ir = builtin("ivashkovich-rosay").unwrap();
    let p = DiscParameters::new(ir.point().to_vec(), linear_data(&grid, 2), 0.1, o.clone()).unwrap();
    let d = solve_bishop(&ir.structure, &ir.hypersurface, &p).unwrap();
    let scan = levi_vanishing_scan(&d, &ir.hypersurface, &ir.structure).unwrap();
    assert!(scan.max_abs <= 1e-8);
    let sp = builtin("sphere-C2").unwrap();
    let p = DiscParameters::new(sp.point().to_vec(), linear_data(&grid, 1), 0.15, o.clone()).unwrap();
    let d = solve_bishop(&sp.structure, &sp.hypersurface, &p).unwrap();
    let scan = levi_vanishing_scan(&d, &sp.hypersurface, &sp.structure).unwrap();
    assert!(scan.min >= 0.9);
    // Im z3 = |z1|², flat in the z2 direction
    let rho = Polynomial::new(3, vec![Monomial::new(c(0.0, -1.0), vec![0, 0, 1], vec![0; 3]), Monomial::new(c(-1.0, 0.0), vec![1, 0, 0], vec![1, 0, 0])]).unwrap();
    let e = HypersurfaceSpec::from_polynomials(3, vec![rho], vec![c(0.0, 0.0); 3]).unwrap();
    let st = bishop_core::geometry::StructureSpec::standard(3).unwrap();
    let p = DiscParameters::new(vec![c(0.0, 0.0); 3], linear_data(&grid, 2), 0.05, o).unwrap();
    let d = solve_bishop(&st, &e, &p).unwrap();
    let scan = levi_vanishing_scan(&d, &e, &st).unwrap();
    let mut dirs = scan.per_direction_max_abs.clone();
    dirs.sort_by(f64::total_cmp);
    assert!(dirs[0] <= 1e-8, "{dirs:?}");
    assert!((dirs[1] - 4.0).abs() <= 1e-6, "{dirs:?}");
}

#[test]
fn sphere_fill_is_one_sided_and_covers() {
    let sc = builtin("sphere-C2").unwrap();
    let r = fill_one_sided(&sc.structure, &sc.hypersurface, &opts(64, 16), &FillOptions::default()).unwrap();
    assert_eq!(r.side, Side::Inside);
    assert_eq!(r.coverage.outside_fraction, 0.0);
    assert_eq!(r.points_outside, 0);
    assert!(r.coverage.fraction >= 0.95, "{r:?}");
    assert!(r.transversality < 0.0);
    assert!(r.disc_solves <= 10_000);
}

#[test]
fn fill_ir_has_no_transverse_disc() {
    let sc = builtin("ivashkovich-rosay").unwrap();
    match fill_one_sided(&sc.structure, &sc.hypersurface, &opts(64, 16), &FillOptions::default()) {
        Err(FamilyError::NoTransverseDisc { max_abs_rho, collected, max_transversality, .. }) => {
            assert!(collected > 0);
            assert!(max_abs_rho <= 1e-8);
            assert!(max_transversality <= 1e-7);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn dichotomy_outcomes() {
    for name in ["sphere-C2", "standard-leviflat-C3", "ivashkovich-rosay", "quadric-signature(+,-)", "ir-scaled(0)"] {
        let sc = builtin(name).unwrap();
        let r = dichotomy(&sc.structure, &sc.hypersurface, &opts(64, 16), &DichotomyOptions::default()).unwrap();
        assert_eq!(r.outcome, sc.oracle.expected_outcome, "{name}: {:?}", r.inconclusive_reason);
    }
}

#[test]
fn quadric_fill_reaches_both_sides() {
    let sc = builtin("quadric-signature(+,-)").unwrap();
    let r = fill_one_sided(&sc.structure, &sc.hypersurface, &opts(64, 16), &FillOptions { sweep_size: 400, ..FillOptions::default() }).unwrap();
    assert_eq!(r.side, Side::Both);
    assert!(r.points_inside > 0 && r.points_outside > 0);
}

#[test]
fn coverage_grows_with_sweep_size() {
    let sp = builtin("sphere-C2").unwrap();
    let mut last = 0.0;
    for sw in [50, 100, 200, 400] {
        let r = fill_one_sided(&sp.structure, &sp.hypersurface, &opts(64, 16), &FillOptions { sweep_size: sw, ..FillOptions::default() }).unwrap();
        assert!(r.coverage.fraction >= last, "sweep {sw}: {} < {last}", r.coverage.fraction);
        last = r.coverage.fraction;
    }
}

#[test]
fn sweeps_do_not_depend_on_worker_count() {
    let sp = builtin("sphere-C2").unwrap();
    let fill = FillOptions { sweep_size: 100, ..FillOptions::default() };
    let a = fill_one_sided(&sp.structure, &sp.hypersurface, &FamilyOptions { workers: 1, ..opts(32, 8) }, &fill).unwrap();
    let b = fill_one_sided(&sp.structure, &sp.hypersurface, &FamilyOptions { workers: 4, ..opts(32, 8) }, &fill).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
