//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use bishop_core::bishop::{solve_bishop, solve_linearized, BishopDisc, DiscParameters, SolverOptions};
use bishop_core::disc::{cauchy_green_t, cauchy_integral_k, d_bar, BoundaryFunction, DiscFunction, DiscGrid, ValueKind};
use bishop_core::experiment::{run, ExperimentConfig, RunOptions};
use bishop_core::family::{
    detect_complex_hypersurface, evaluation_jacobian, fill_one_sided, levi_vanishing_scan, FamilyChart, FamilyError, FamilyOptions, FillOptions, Side,
};
use bishop_core::geometry::{levi_form_direct, levi_form_via_disc, Monomial, Polynomial, RealPolynomialField, StructureSpec};
use bishop_core::scenarios::{builtin, OracleParameters};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn minus(a: &DiscFunction, b: &DiscFunction) -> f64 {
    a.add_scaled(b, c(-1.0, 0.0)).sup_norm()
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20_261_014);
    r.set_stream(stream);
    r
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn operator_identities() -> Outcome {
    let grid = DiscGrid::shared(256, 64).unwrap();
    let mut r = rng(1);
    let mut t_err: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for degree in 0..=8u32 {
        let mut coefs = Vec::new();
        for a in 0..=degree {
            for b in 0..=degree - a {
                coefs.push((a, b, c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))));
            }
        }
        let f = DiscFunction::from_fn(grid.clone(), 1, |_, z| coefs.iter().map(|(a, b, w)| w * z.powu(*a) * z.conj().powu(*b)).sum());
        let (tf, dt) = timed(|| cauchy_green_t(&f));
        slowest = slowest.max(dt);
        t_err = t_err.max(minus(&d_bar(&tf), &f) / f.sup_norm());
    }
    let one = DiscFunction::from_fn(grid.clone(), 1, |_, _| c(1.0, 0.0));
    let tau = DiscFunction::from_fn(grid.clone(), 1, |_, z| z);
    let t1 = minus(&cauchy_green_t(&one), &DiscFunction::from_fn(grid.clone(), 1, |_, z| z.conj()));
    let tt = minus(&cauchy_green_t(&tau), &DiscFunction::from_fn(grid.clone(), 1, |_, z| c(z.norm_sqr() - 1.0, 0.0)));
    let mut k_err: f64 = 0.0;
    for k in 0..=64u32 {
        let b = BoundaryFunction::from_fn_complex(grid.clone(), 1, |_, w| w.powu(k));
        let (kb, dt) = timed(|| cauchy_integral_k(&b));
        slowest = slowest.max(dt);
        k_err = k_err.max(minus(&kb, &DiscFunction::from_fn(grid.clone(), 1, |_, z| z.powu(k))));
    }
    Outcome {
        pass: t_err <= 1e-6 && t1 <= 1e-6 && tt <= 1e-6 && k_err <= 1e-10 && slowest <= Duration::from_secs(1),
        detail: format!("dbar T f - f {t_err:.1e}, T(1) {t1:.1e}, T(tau) {tt:.1e}, K zeta^k {k_err:.1e}, slowest application {slowest:.2?}"),
    }
}

/// Random `Σ_{k≤3} a_k (ζ^k − 1)` pair with `sup|d/dθ Re P| ≈ target`.
fn random_pair(r: &mut ChaCha8Rng, target: f64) -> OracleParameters {
    let mut tang = Vec::new();
    for _ in 0..2 {
        let mut p = vec![c(0.0, 0.0); 4];
        for k in 1..=3 {
            let a = c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            p[k] += a;
            p[0] -= a;
        }
        tang.push(p);
    }
    let probe = DiscGrid::shared(256, 4).unwrap();
    let sup = (0..2)
        .map(|j| BoundaryFunction::from_fn_real(probe.clone(), 1, |_, t| {
            tang[j].iter().enumerate().map(|(k, a)| a * Complex64::from_polar(1.0, k as f64 * t)).sum::<Complex64>().re
        }).d_theta().sup_norm())
        .fold(0.0, f64::max);
    OracleParameters::new(tang.into_iter().map(|p| p.into_iter().map(|v| v * (target / sup)).collect()).collect()).unwrap()
}

fn example_fidelity() -> Outcome {
    let sc = builtin("ivashkovich-rosay").unwrap();
    let o = SolverOptions::default();
    let grid = DiscGrid::shared(o.n, o.m).unwrap();
    let eps = 0.1;
    let mut r = rng(2);
    let (mut dev, mut im, mut slowest): (f64, f64, Duration) = (0.0, 0.0, Duration::ZERO);
    let mut failures = 0;
    for _ in 0..20 {
        let target = r.random_range(0.5..1.8);
        let p = random_pair(&mut r, target);
        let data = sc.tangential_data(&p, grid.clone());
        let params = DiscParameters::new(sc.point().to_vec(), data, eps, o.clone()).unwrap();
        let (disc, dt) = timed(|| solve_bishop(&sc.structure, &sc.hypersurface, &params));
        slowest = slowest.max(dt);
        let Ok(disc) = disc else {
            failures += 1;
            continue;
        };
        let scaled = OracleParameters { tangential: p.tangential.iter().map(|q| q.iter().map(|v| v * eps).collect()).collect() };
        let oracle = sc.oracle_disc(&scaled, grid.clone()).unwrap();
        dev = dev.max(minus(&disc.z.component(2), &oracle.component(2)));
        im = im.max(disc.z.component(2).component_values(0).iter().fold(0.0, |m, v| m.max(v.im.abs())));
    }
    Outcome {
        pass: failures == 0 && dev <= 1e-6 && im <= 1e-8 && slowest <= Duration::from_secs(5),
        detail: format!("20 discs at 256x64: z3 vs closed form {dev:.1e}, max |Im z3| {im:.1e}, slowest solve {slowest:.2?}, failures {failures}"),
    }
}

fn family_options() -> FamilyOptions {
    FamilyOptions { solver: SolverOptions::with_grid(64, 16), ..FamilyOptions::default() }
}

fn rank_reproduction() -> Outcome {
    let sc = builtin("ivashkovich-rosay").unwrap();
    let grid = DiscGrid::shared(64, 16).unwrap();
    let base = BoundaryFunction::from_fn_real(grid.clone(), 2, |j, t| if j == 0 { t.cos() - 1.0 } else { t.sin() + 0.3 * ((2.0 * t).cos() - 1.0) });
    let opts = family_options();
    let chart = FamilyChart::new(sc.point().to_vec(), base, 0.1, 2, None, c(-1.0, 0.0)).unwrap();
    let rep = evaluation_jacobian(&sc.structure, &sc.hypersurface, &chart, &opts).unwrap();
    let ratio = rep.singular_values[4] / rep.singular_values[0];
    let sixth = rep.singular_values.get(5).map_or(0.0, |s| s / rep.singular_values[0]);
    let constant = FamilyChart::new(sc.point().to_vec(), BoundaryFunction::zeros(grid, 2, ValueKind::Real), 0.1, 2, None, c(-1.0, 0.0)).unwrap();
    let rep0 = evaluation_jacobian(&sc.structure, &sc.hypersurface, &constant, &opts).unwrap();
    Outcome {
        pass: rep.rank == 5 && rep.chart_rows == 5 && ratio >= 1e-3 && sixth <= opts.rank_threshold && rep.rank_stable == Some(true) && rep0.rank <= 4,
        detail: format!(
            "rank {} in a {}-row chart, sigma5/sigma1 {ratio:.3}, doubled-degree rank {:?}, constant disc rank {}",
            rep.rank, rep.chart_rows, rep.rank_doubled_degree, rep0.rank
        ),
    }
}

fn solve_linear(name: &str, eps: f64) -> BishopDisc {
    let sc = builtin(name).unwrap();
    let grid = DiscGrid::shared(64, 16).unwrap();
    let nt = sc.dim() - 1;
    let u = BoundaryFunction::from_fn_real(grid, nt, |j, t| if j == 0 { t.cos() - 1.0 } else { t.sin() });
    let params = DiscParameters::new(sc.point().to_vec(), u, eps, SolverOptions::with_grid(64, 16)).unwrap();
    solve_bishop(&sc.structure, &sc.hypersurface, &params).unwrap()
}

fn random_field(r: &mut ChaCha8Rng, dim: usize, terms: usize) -> Polynomial {
    let mut monos = Vec::new();
    for i in 0..dim {
        let mut e = vec![0; dim];
        e[i] = 1;
        monos.push(Monomial::new(c(r.random_range(0.5..1.5), 0.0), e.clone(), e));
    }
    for _ in 0..terms {
        let z: Vec<u32> = (0..dim).map(|_| r.random_range(0..3)).collect();
        let zb: Vec<u32> = (0..dim).map(|_| r.random_range(0..2)).collect();
        monos.push(Monomial::new(c(r.random_range(-0.5..0.5), r.random_range(-0.5..0.5)), z, zb));
    }
    Polynomial::new(dim, monos).unwrap()
}

fn random_structure(r: &mut ChaCha8Rng, dim: usize) -> StructureSpec {
    let mut entries = Vec::new();
    for row in 0..dim {
        for col in 0..dim {
            if r.random_bool(0.5) {
                let z: Vec<u32> = (0..dim).map(|_| r.random_range(0..2)).collect();
                let zb: Vec<u32> = (0..dim).map(|_| r.random_range(0..2)).collect();
                let m = Monomial::new(c(r.random_range(-0.08..0.08), r.random_range(-0.08..0.08)), z, zb);
                entries.push((row, col, Polynomial::new(dim, vec![m]).unwrap()));
            }
        }
    }
    StructureSpec::from_polynomials(dim, entries).unwrap()
}

fn levi_scans() -> Outcome {
    let ir = builtin("ivashkovich-rosay").unwrap();
    let sp = builtin("sphere-C2").unwrap();
    let ir_scan = levi_vanishing_scan(&solve_linear("ivashkovich-rosay", 0.1), &ir.hypersurface, &ir.structure).unwrap();
    let sp_scan = levi_vanishing_scan(&solve_linear("sphere-C2", 0.15), &sp.hypersurface, &sp.structure).unwrap();
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let dim = 2 + i % 2;
        let s = if i % 5 == 0 { StructureSpec::standard(dim).unwrap() } else { random_structure(&mut r, dim) };
        let u = RealPolynomialField::new(random_field(&mut r, dim, 4));
        let q: Vec<Complex64> = (0..dim).map(|_| c(r.random_range(-0.4..0.4), r.random_range(-0.4..0.4))).collect();
        let v = DVector::from_fn(2 * dim, |_, _| r.random_range(-1.0..1.0));
        let a = levi_form_direct(&u, &q, &v, &s).unwrap();
        let b = levi_form_via_disc(&u, &q, &v, &s).unwrap();
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
    }
    Outcome {
        pass: ir_scan.max_abs <= 1e-8 && sp_scan.min >= 0.9 && worst <= 1e-4,
        detail: format!(
            "ivashkovich-rosay max |L| {:.1e}, sphere-C2 min L {:.3}, direct vs disc worst relative gap {worst:.1e} over 100 cases",
            ir_scan.max_abs, sp_scan.min
        ),
    }
}

fn linearization() -> Outcome {
    let grid = DiscGrid::shared(64, 16).unwrap();
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    let names = ["ivashkovich-rosay", "sphere-C2", "quadric-signature(+,-)"];
    for i in 0..20 {
        let sc = builtin(names[i % 3]).unwrap();
        let nt = sc.dim() - 1;
        let disc = solve_linear(names[i % 3], 0.08);
        let a: Vec<f64> = (0..4 * nt).map(|_| r.random_range(-1.0..1.0)).collect();
        let udot = BoundaryFunction::from_fn_real(grid.clone(), nt, |j, t| {
            let a = &a[4 * j..4 * j + 4];
            a[0] * (t.cos() - 1.0) + a[1] * t.sin() + a[2] * ((2.0 * t).cos() - 1.0) + a[3] * (3.0 * t).sin()
        });
        let lin = solve_linearized(&disc, &sc.structure, &sc.hypersurface, &udot).unwrap();
        let delta = 1e-5;
        let at = |s: f64| {
            let data = disc.data().add_scaled(&udot, s).unwrap();
            let o = SolverOptions { tol: Some(1e-13), ..SolverOptions::with_grid(64, 16) };
            solve_bishop(&sc.structure, &sc.hypersurface, &DiscParameters::new(sc.point().to_vec(), data, disc.epsilon, o).unwrap()).unwrap()
        };
        let fd = at(delta).z.add_scaled(&at(-delta).z, c(-1.0, 0.0)).scaled(c(0.5 / delta, 0.0));
        worst = worst.max(minus(&fd, &lin.zdot) / fd.sup_norm());
    }
    Outcome { pass: worst <= 1e-3, detail: format!("20 directions over 3 scenarios, worst relative gap {worst:.1e} at delta = 1e-5") }
}

fn dichotomy_experiments() -> Outcome {
    let opts = family_options();
    let sp = builtin("sphere-C2").unwrap();
    let fill = fill_one_sided(&sp.structure, &sp.hypersurface, &opts, &FillOptions { delta: 0.05, h: 0.01, ..FillOptions::default() }).unwrap();
    let sphere_ok = fill.side == Side::Inside && fill.coverage.outside_fraction == 0.0 && fill.coverage.fraction >= 0.95 && fill.disc_solves <= 10_000;

    let st = builtin("standard-leviflat-C3").unwrap();
    let grid = DiscGrid::shared(64, 16).unwrap();
    let base = BoundaryFunction::from_fn_real(grid, 2, |j, t| if j == 0 { t.cos() - 1.0 } else { t.sin() });
    let chart = FamilyChart::new(st.point().to_vec(), base, 0.1, 2, None, c(-1.0, 0.0)).unwrap();
    let mut zetas = vec![c(-1.0, 0.0)];
    zetas.extend(bishop_core::family::circle_points(8));
    let v = detect_complex_hypersurface(&st.structure, &st.hypersurface, &chart, &opts, 2, &zetas).unwrap();
    let max_z3 = v.witnesses.iter().map(|w| w.point[2][0].hypot(w.point[2][1])).fold(0.0, f64::max);
    let flat_ok = v.detected && v.j_invariance_defect <= 1e-8 && max_z3 <= 1e-8;

    let ir = builtin("ivashkovich-rosay").unwrap();
    let (ir_ok, ir_detail) = match fill_one_sided(&ir.structure, &ir.hypersurface, &opts, &FillOptions::default()) {
        Err(FamilyError::NoTransverseDisc { max_abs_rho, collected, .. }) => (max_abs_rho <= 1e-8, format!("NoTransverseDisc, {collected} points with max |Im z3| {max_abs_rho:.1e}")),
        other => (false, format!("unexpected {other:?}")),
    };
    Outcome {
        pass: sphere_ok && flat_ok && ir_ok,
        detail: format!(
            "sphere-C2 side {} coverage {:.3} with {} solves; standard-leviflat-C3 detected {} with J defect {:.1e}, max |z3| {max_z3:.1e}; ivashkovich-rosay {ir_detail}",
            fill.side.as_str(),
            fill.coverage.fraction,
            fill.disc_solves,
            v.detected,
            v.j_invariance_defect
        ),
    }
}

fn determinism() -> Outcome {
    let configs = [
        r#"{"scenario": "sphere-C2", "command": "fill", "grid": {"N": 64, "M": 16}, "fill": {"sweep_size": 500}, "seed": 3}"#,
        r#"{"scenario": "ivashkovich-rosay", "command": "rank", "grid": {"N": 64, "M": 16}, "seed": 3}"#,
        r#"{"scenario": "quadric-signature(+,-)", "command": "dichotomy", "grid": {"N": 32, "M": 8}, "seed": 3}"#,
    ];
    let mut same = true;
    for cfg in configs {
        let cfg = ExperimentConfig::from_json(cfg).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(&cfg, a.path(), &RunOptions { workers: 2, seed: None }).unwrap();
        run(&cfg, b.path(), &RunOptions { workers: 4, seed: None }).unwrap();
        same &= std::fs::read(a.path().join("report.json")).unwrap() == std::fs::read(b.path().join("report.json")).unwrap();
    }
    Outcome { pass: same, detail: format!("fill, rank and dichotomy reports byte-identical across two runs: {same}") }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("operator identities", operator_identities),
        ("closed-form disc fidelity", example_fidelity),
        ("rank of the evaluation map", rank_reproduction),
        ("Levi scans", levi_scans),
        ("linearization", linearization),
        ("dichotomy experiments", dichotomy_experiments),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (o, dt) = timed(f);
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {}. {name}: {} ({dt:.1?})", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    let total = start.elapsed();
    println!("acceptance: {} of {} criteria passed in {total:.1?}", criteria.len() - failed, criteria.len());
    if failed > 0 || total > Duration::from_secs(15 * 60) {
        std::process::exit(1);
    }
}
