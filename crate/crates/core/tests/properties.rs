use bishop_core::bishop::{solve_bishop, DiscParameters, SolverOptions};
use bishop_core::disc::{cauchy_green_t, cauchy_integral_k, d_bar, schwarz, BoundaryFunction, DiscFunction, DiscGrid};
use bishop_core::experiment::ExperimentConfig;
use bishop_core::family::numerical_rank;
use bishop_core::geometry::{a_from_j, j_from_a, levi_form_direct, CMatrix, Monomial, Polynomial, RealPolynomialField, StructureSpec};
use bishop_core::scenarios::{builtin, OracleParameters};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn coef() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

fn poly(coefs: &[Complex64], degree: u32) -> impl Fn(Complex64) -> Complex64 + '_ {
    move |z| {
        let mut acc = c(0.0, 0.0);
        let mut i = 0;
        for a in 0..=degree {
            for b in 0..=degree - a {
                acc += coefs[i] * z.powu(a) * z.conj().powu(b);
                i += 1;
            }
        }
        acc
    }
}

fn small_structure(entries: &[(usize, usize, Complex64, Vec<u32>, Vec<u32>)]) -> StructureSpec {
    let polys = entries.iter().map(|(r, k, w, z, zb)| (*r, *k, Polynomial::new(2, vec![Monomial::new(*w * 0.1, z.clone(), zb.clone())]).unwrap())).collect();
    StructureSpec::from_polynomials(2, polys).unwrap()
}

fn structure_entries() -> impl Strategy<Value = Vec<(usize, usize, Complex64, Vec<u32>, Vec<u32>)>> {
    prop::collection::vec((0..2usize, 0..2usize, coef(), prop::collection::vec(0..2u32, 2), prop::collection::vec(0..2u32, 2)), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dbar_inverts_t(coefs in prop::collection::vec(coef(), 15)) {
        let grid = DiscGrid::shared(32, 8).unwrap();
        let f = DiscFunction::from_fn(grid, 1, |_, z| poly(&coefs, 4)(z));
        let back = d_bar(&cauchy_green_t(&f));
        prop_assert!(back.add_scaled(&f, c(-1.0, 0.0)).sup_norm() < 1e-10);
    }

    #[test]
    fn t_is_linear(a in prop::collection::vec(coef(), 6), b in prop::collection::vec(coef(), 6), s in coef()) {
        let grid = DiscGrid::shared(32, 8).unwrap();
        let f = DiscFunction::from_fn(grid.clone(), 1, |_, z| poly(&a, 2)(z));
        let g = DiscFunction::from_fn(grid, 1, |_, z| poly(&b, 2)(z));
        let lhs = cauchy_green_t(&f.add_scaled(&g, s));
        let rhs = cauchy_green_t(&f).add_scaled(&cauchy_green_t(&g), s);
        prop_assert!(lhs.add_scaled(&rhs, c(-1.0, 0.0)).sup_norm() < 1e-12);
    }

    #[test]
    fn k_keeps_holomorphic_and_drops_antiholomorphic_traces(hol in prop::collection::vec(coef(), 6), anti in prop::collection::vec(coef(), 5)) {
        let grid = DiscGrid::shared(32, 8).unwrap();
        let h = |z: Complex64| hol.iter().enumerate().map(|(k, w)| w * z.powu(k as u32)).sum::<Complex64>();
        let a = |z: Complex64| anti.iter().enumerate().map(|(k, w)| w * z.conj().powu(k as u32 + 1)).sum::<Complex64>();
        let b = BoundaryFunction::from_fn_complex(grid.clone(), 1, |_, w| h(w) + a(w));
        let want = DiscFunction::from_fn(grid, 1, |_, z| h(z));
        prop_assert!(cauchy_integral_k(&b).add_scaled(&want, c(-1.0, 0.0)).sup_norm() < 1e-12);
    }

    #[test]
    fn schwarz_is_holomorphic_with_given_real_part(a in prop::collection::vec(-1.0..1.0f64, 7)) {
        let grid = DiscGrid::shared(32, 8).unwrap();
        let u = BoundaryFunction::from_fn_real(grid, 1, |_, t| a[0] + (1..4).map(|k| a[2 * k - 1] * (k as f64 * t).cos() + a[2 * k] * (k as f64 * t).sin()).sum::<f64>());
        let s = schwarz(&u);
        prop_assert!(d_bar(&s).sup_norm() < 1e-11);
        for (l, v) in s.boundary_values(0).iter().enumerate() {
            prop_assert!((v.re - u.samples(0)[l].re).abs() < 1e-12);
        }
    }

    #[test]
    fn levi_form_is_quadratic_and_j_invariant(
        entries in structure_entries(),
        u in prop::collection::vec(coef(), 4),
        q in prop::collection::vec(-0.4..0.4f64, 4),
        v in prop::collection::vec(-1.0..1.0f64, 4),
        t in -3.0..3.0f64,
    ) {
        let s = small_structure(&entries);
        let terms = vec![
            Monomial::new(u[0], vec![1, 0], vec![1, 0]),
            Monomial::new(u[1], vec![2, 0], vec![0, 1]),
            Monomial::new(u[2], vec![0, 1], vec![1, 1]),
            Monomial::new(u[3], vec![1, 1], vec![0, 0]),
        ];
        let field = RealPolynomialField::new(Polynomial::new(2, terms).unwrap());
        let q = [c(q[0], q[1]), c(q[2], q[3])];
        let v = DVector::from_vec(v);
        let l = levi_form_direct(&field, &q, &v, &s).unwrap();
        let lt = levi_form_direct(&field, &q, &(&v * t), &s).unwrap();
        prop_assert!((lt - t * t * l).abs() <= 1e-9 * (1.0 + l.abs()) * (1.0 + t * t));
        let jv = s.j(&q).unwrap() * &v;
        let lj = levi_form_direct(&field, &q, &jv, &s).unwrap();
        prop_assert!((lj - l).abs() <= 1e-6 * (1.0 + l.abs()), "L(v) = {l}, L(Jv) = {lj}");
    }

    #[test]
    fn structure_round_trips_through_j(a in prop::collection::vec(coef(), 4), scale in 0.0..0.6f64) {
        let a = CMatrix::from_fn(2, 2, |r, k| a[2 * r + k] * (scale / 2.0));
        let j = j_from_a(&a).unwrap();
        let back = a_from_j(&j).unwrap();
        prop_assert!((&back - &a).camax() < 1e-12);
        let jj = &j * &j + nalgebra::DMatrix::<f64>::identity(4, 4);
        prop_assert!(jj.amax() < 1e-12);
    }

    #[test]
    fn rank_is_scale_invariant(sv in prop::collection::vec(1e-12..1.0f64, 1..8), s in 1e-6..1e6f64) {
        let mut sv = sv;
        sv.sort_by(|a, b| b.total_cmp(a));
        let scaled: Vec<f64> = sv.iter().map(|x| x * s).collect();
        prop_assert_eq!(numerical_rank(&sv, 1e-6), numerical_rank(&scaled, 1e-6));
    }

    #[test]
    fn grid_sizes_outside_range_are_rejected(n in 1usize..5000) {
        let cfg = format!(r#"{{"scenario": "sphere-C2", "command": "solve", "grid": {{"N": {n}, "M": 16}}}}"#);
        let ok = ExperimentConfig::from_json(&cfg).is_ok();
        prop_assert_eq!(ok, n.is_power_of_two() && (8..=4096).contains(&n));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sphere_discs_follow_the_slice_oracle(re in -1.0..1.0f64, im in -1.0..1.0f64, eps in 0.02..0.18f64) {
        let dir = c(re, im) / c(re, im).norm().max(1e-3);
        let sc = builtin("sphere-C2").unwrap();
        let p = OracleParameters::linear(&[dir]);
        let grid = DiscGrid::shared(32, 8).unwrap();
        let params = DiscParameters::new(sc.point().to_vec(), sc.tangential_data(&p, grid.clone()), eps, SolverOptions::with_grid(32, 8)).unwrap();
        let disc = solve_bishop(&sc.structure, &sc.hypersurface, &params).unwrap();
        let oracle = sc.oracle_disc(&OracleParameters::linear(&[dir * eps]), grid).unwrap();
        prop_assert!(disc.z.add_scaled(&oracle, c(-1.0, 0.0)).sup_norm() < 1e-8);
    }

    #[test]
    fn unknown_keys_are_rejected(key in "[a-z]{3,10}") {
        let known = ["scenario", "command", "grid", "solver", "data", "family", "fill", "output", "seed"];
        prop_assume!(!known.contains(&key.as_str()));
        let cfg = format!(r#"{{"scenario": "sphere-C2", "command": "solve", "{key}": 1}}"#);
        prop_assert!(ExperimentConfig::from_json(&cfg).is_err());
    }
}
