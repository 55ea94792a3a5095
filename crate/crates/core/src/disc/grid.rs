use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::DiscError;

/// Polar grid on the closed unit disc: `N` equispaced angles and `M`
/// Chebyshev radii in `(0, 1]`.
///
/// Radii are the positive half of the Chebyshev–Lobatto grid with `2M`
/// points on `[−1, 1]`, so `r = 0` is never a node and `r_0 = 1`. A mode
/// `f_k(r) e^{ikθ}` of a smooth function extends to `[−1, 1]` with parity
/// `(−1)^k`, which is how radial derivatives are folded onto the half grid.
pub struct DiscGrid {
    n: usize,
    m: usize,
    radii: Vec<f64>,
    full_nodes: Vec<f64>,
    bary_weights: Vec<f64>,
    /// Folded radial derivative for even (index 0) and odd (index 1) modes.
    d_fold: [DMatrix<f64>; 2],
    /// Per mode index: solve matrix of the Cauchy–Green radial problem.
    t_solve: Vec<DMatrix<f64>>,
    conj: DMatrix<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DiscGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscGrid").field("n", &self.n).field("m", &self.m).finish()
    }
}

pub const DEFAULT_N: usize = 256;
pub const DEFAULT_M: usize = 64;

fn cache() -> &'static Mutex<HashMap<(usize, usize), Arc<DiscGrid>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<DiscGrid>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl DiscGrid {
    /// Cached grid for `(n, m)`; construction cost is paid once per process.
    pub fn shared(n: usize, m: usize) -> Result<Arc<DiscGrid>, DiscError> {
        if let Some(g) = cache().lock().unwrap().get(&(n, m)) {
            return Ok(g.clone());
        }
        let g = Arc::new(DiscGrid::new(n, m)?);
        Ok(cache().lock().unwrap().entry((n, m)).or_insert(g).clone())
    }

    pub fn new(n: usize, m: usize) -> Result<DiscGrid, DiscError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(DiscError::BadAngularSize(n));
        }
        if m < 4 {
            return Err(DiscError::BadRadialSize(m));
        }
        let p = 2 * m - 1;
        let full_nodes: Vec<f64> = (0..=p).map(|j| (j as f64 * PI / p as f64).cos()).collect();
        let radii = full_nodes[..m].to_vec();
        let d = cheb_matrix(&full_nodes);
        let mut bary_weights: Vec<f64> = (0..=p).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        bary_weights[0] *= 0.5;
        bary_weights[p] *= 0.5;

        let fold = |sigma: f64| {
            DMatrix::from_fn(m, m, |i, j| d[(i, j)] + sigma * d[(i, p - j)])
        };
        let d_fold = [fold(1.0), fold(-1.0)];

        let mut t_solve = Vec::with_capacity(n);
        for idx in 0..n {
            let k = mode_of(idx, n);
            // h is mode k − 1
            let parity = (k - 1).rem_euclid(2) as usize;
            let mut l = DMatrix::from_fn(m, m, |i, j| radii[i] * d_fold[parity][(i, j)]);
            for i in 0..m {
                l[(i, i)] -= (k - 1) as f64;
            }
            if k >= 1 {
                for j in 0..m {
                    l[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
                }
            }
            let inv = l.try_inverse().ok_or(DiscError::SingularRadialSystem(k))?;
            t_solve.push(inv);
        }

        let theta: Vec<f64> = (0..n).map(|l| 2.0 * PI * l as f64 / n as f64).collect();
        let half = n / 2;
        let kernel = |delta: f64| -> f64 {
            (1..half).map(|k| (k as f64 * delta).sin()).sum::<f64>() * 2.0 / n as f64
        };
        let raw = DMatrix::from_fn(n, n, |l, j| kernel(theta[l] - theta[j]));
        let conj = DMatrix::from_fn(n, n, |l, j| raw[(l, j)] - raw[(0, j)]);

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        Ok(DiscGrid { n, m, radii, full_nodes, bary_weights, d_fold, t_solve, conj, fft, ifft })
    }

    /// Number of angular samples.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of radial nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn theta(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.n as f64
    }

    /// Angular mode stored at FFT index `idx`; range `[−N/2, N/2)`.
    pub fn mode(&self, idx: usize) -> i64 {
        mode_of(idx, self.n)
    }

    /// FFT index of mode `k`, if representable.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            None
        } else {
            Some(k.rem_euclid(self.n as i64) as usize)
        }
    }

    pub fn point(&self, m: usize, l: usize) -> Complex64 {
        Complex64::from_polar(self.radii[m], self.theta(l))
    }

    pub(crate) fn d_fold(&self, k: i64) -> &DMatrix<f64> {
        &self.d_fold[k.rem_euclid(2) as usize]
    }

    pub(crate) fn t_solve(&self, idx: usize) -> &DMatrix<f64> {
        &self.t_solve[idx]
    }

    /// Real matrix mapping boundary samples of `u` to samples of its
    /// harmonic conjugate vanishing at `θ = 0`.
    pub fn conjugate_matrix(&self) -> &DMatrix<f64> {
        &self.conj
    }

    /// `c_k = (1/N) Σ_l f_l e^{−ikθ_l}` in FFT order, in place.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.fft.process(buf);
        let s = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    /// Inverse of [`forward`](Self::forward), in place.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.ifft.process(buf);
    }

    /// Folded barycentric weights `(ℓ⁺, ℓ⁻)` at radius `r ∈ [0, 1]`: the value
    /// of a mode with parity `±` at `r` is `Σ_m ℓ^±_m f(r_m)`.
    pub(crate) fn radial_weights(&self, r: f64) -> (Vec<f64>, Vec<f64>) {
        let p = self.full_nodes.len();
        let mut ell = vec![0.0; p];
        if let Some(j) = self.full_nodes.iter().position(|x| (x - r).abs() < 1e-15) {
            ell[j] = 1.0;
        } else {
            let mut denom = 0.0;
            for j in 0..p {
                let t = self.bary_weights[j] / (r - self.full_nodes[j]);
                ell[j] = t;
                denom += t;
            }
            for v in ell.iter_mut() {
                *v /= denom;
            }
        }
        let m = self.m;
        let even = (0..m).map(|i| ell[i] + ell[p - 1 - i]).collect();
        let odd = (0..m).map(|i| ell[i] - ell[p - 1 - i]).collect();
        (even, odd)
    }
}

fn mode_of(idx: usize, n: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Chebyshev differentiation matrix on the Lobatto nodes `x`.
fn cheb_matrix(x: &[f64]) -> DMatrix<f64> {
    let p = x.len();
    let c = |j: usize| {
        let base = if j == 0 || j == p - 1 { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let mut d = DMatrix::zeros(p, p);
    for i in 0..p {
        let mut row = 0.0;
        for j in 0..p {
            if i != j {
                let v = c(i) / c(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row += v;
            }
        }
        d[(i, i)] = -row;
    }
    d
}
