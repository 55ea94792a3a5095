use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::disc::{cauchy_green_t, cauchy_integral_k, d, d_bar, harmonic_conjugate, schwarz, BoundaryFunction, DiscFunction, DiscGrid};

const SELFTEST_STREAM: u64 = 0x7365_6c66_0000;

#[derive(Clone, Debug, Serialize)]
pub struct SelftestCheck {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: &str, max_error: f64, tolerance: f64) -> SelftestCheck {
    SelftestCheck { name: name.into(), max_error, tolerance, pass: max_error <= tolerance }
}

fn minus(a: &DiscFunction, b: &DiscFunction) -> f64 {
    a.add_scaled(b, Complex64::new(-1.0, 0.0)).sup_norm()
}

/// Random `Σ c_ab ζ^a ζ̄^b` with `a + b ≤ degree` and coefficients of modulus below one.
fn random_polynomial(grid: &Arc<DiscGrid>, degree: u32, rng: &mut ChaCha8Rng) -> DiscFunction {
    let mut coefs = Vec::new();
    for a in 0..=degree {
        for b in 0..=degree - a {
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) / (degree + 1) as f64;
            coefs.push((a, b, c));
        }
    }
    DiscFunction::from_fn(grid.clone(), 1, |_, z| coefs.iter().map(|(a, b, c)| c * z.powu(*a) * z.conj().powu(*b)).sum())
}

/// Operator identities on `grid`: `∂̄T = id` on polynomials, the closed
/// forms of `T(1)` and `T(ζ)`, reproduction of `ζ^k` by `K` and the
/// Schwarz boundary values, and `∂ζ^k = kζ^{k−1}`.
pub fn selftest(grid: &Arc<DiscGrid>, seed: u64) -> Vec<SelftestCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SELFTEST_STREAM);
    let mut out = Vec::new();

    let mut err: f64 = 0.0;
    for degree in [0, 1, 3, 5, 8] {
        let f = random_polynomial(grid, degree, &mut rng);
        err = err.max(minus(&d_bar(&cauchy_green_t(&f)), &f));
    }
    out.push(check("dbar_t_identity", err, 1e-6));

    let one = DiscFunction::from_fn(grid.clone(), 1, |_, _| Complex64::new(1.0, 0.0));
    let zbar = DiscFunction::from_fn(grid.clone(), 1, |_, z| z.conj());
    out.push(check("t_of_one", minus(&cauchy_green_t(&one), &zbar), 1e-6));
    let zeta = DiscFunction::from_fn(grid.clone(), 1, |_, z| z);
    let m = DiscFunction::from_fn(grid.clone(), 1, |_, z| Complex64::new(z.norm_sqr() - 1.0, 0.0));
    out.push(check("t_of_zeta", minus(&cauchy_green_t(&zeta), &m), 1e-6));

    let mut err: f64 = 0.0;
    for k in 0..=(grid.n() as u32 / 4).min(32) {
        let b = BoundaryFunction::from_fn_complex(grid.clone(), 1, |_, w| w.powu(k));
        let want = DiscFunction::from_fn(grid.clone(), 1, |_, z| z.powu(k));
        err = err.max(minus(&cauchy_integral_k(&b), &want));
    }
    out.push(check("k_reproduces_powers", err, 1e-10));

    let mut err: f64 = 0.0;
    for _ in 0..4 {
        let a: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = BoundaryFunction::from_fn_real(grid.clone(), 1, |_, t| {
            a[0] + a[1] * t.cos() + a[2] * t.sin() + a[3] * (3.0 * t).cos() + a[4] * (5.0 * t).sin() + a[5] * (2.0 * t).cos()
        });
        let s = schwarz(&u).boundary_values(0);
        let h = harmonic_conjugate(&u);
        for (l, v) in s.iter().enumerate() {
            err = err.max((v.re - u.samples(0)[l].re).abs()).max((v.im - h.samples(0)[l].re).abs());
        }
    }
    out.push(check("schwarz_boundary_values", err, 1e-10));

    let mut err: f64 = 0.0;
    for k in 1..=8u32 {
        let f = DiscFunction::from_fn(grid.clone(), 1, |_, z| z.powu(k));
        let want = DiscFunction::from_fn(grid.clone(), 1, |_, z| z.powu(k - 1) * k as f64);
        err = err.max(minus(&d(&f), &want));
    }
    out.push(check("d_of_powers", err, 1e-8));
    out
}
