use std::sync::Arc;

use num_complex::Complex64;

use super::{DiscError, DiscGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueKind {
    Real,
    Complex,
}

/// Samples of a vector-valued function on the unit circle at `θ_l = 2πl/N`.
#[derive(Clone, Debug)]
pub struct BoundaryFunction {
    grid: Arc<DiscGrid>,
    kind: ValueKind,
    /// `samples[c][l]`
    samples: Vec<Vec<Complex64>>,
}

impl BoundaryFunction {
    pub fn zeros(grid: Arc<DiscGrid>, comps: usize, kind: ValueKind) -> Self {
        let n = grid.n();
        BoundaryFunction { grid, kind, samples: vec![vec![Complex64::new(0.0, 0.0); n]; comps] }
    }

    pub fn from_samples(grid: Arc<DiscGrid>, samples: Vec<Vec<Complex64>>) -> Result<Self, DiscError> {
        for s in &samples {
            if s.len() != grid.n() {
                return Err(DiscError::SampleCount { expected: grid.n(), got: s.len() });
            }
        }
        Ok(BoundaryFunction { grid, kind: ValueKind::Complex, samples })
    }

    pub fn from_real_samples(grid: Arc<DiscGrid>, samples: Vec<Vec<f64>>) -> Result<Self, DiscError> {
        for s in &samples {
            if s.len() != grid.n() {
                return Err(DiscError::SampleCount { expected: grid.n(), got: s.len() });
            }
        }
        let samples = samples.into_iter().map(|s| s.into_iter().map(|x| Complex64::new(x, 0.0)).collect()).collect();
        Ok(BoundaryFunction { grid, kind: ValueKind::Real, samples })
    }

    /// Samples `f(θ)` for each component.
    pub fn from_fn_real(grid: Arc<DiscGrid>, comps: usize, f: impl Fn(usize, f64) -> f64) -> Self {
        let n = grid.n();
        let samples = (0..comps)
            .map(|c| (0..n).map(|l| Complex64::new(f(c, grid.theta(l)), 0.0)).collect())
            .collect();
        BoundaryFunction { grid, kind: ValueKind::Real, samples }
    }

    pub fn from_fn_complex(grid: Arc<DiscGrid>, comps: usize, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let n = grid.n();
        let samples = (0..comps)
            .map(|c| (0..n).map(|l| f(c, Complex64::from_polar(1.0, grid.theta(l)))).collect())
            .collect();
        BoundaryFunction { grid, kind: ValueKind::Complex, samples }
    }

    /// Build from Fourier coefficients in FFT order, one vector per component.
    pub fn from_coefficients(grid: Arc<DiscGrid>, kind: ValueKind, coefs: Vec<Vec<Complex64>>) -> Result<Self, DiscError> {
        let mut samples = Vec::with_capacity(coefs.len());
        for mut c in coefs {
            if c.len() != grid.n() {
                return Err(DiscError::SampleCount { expected: grid.n(), got: c.len() });
            }
            grid.inverse(&mut c);
            if kind == ValueKind::Real {
                for v in c.iter_mut() {
                    v.im = 0.0;
                }
            }
            samples.push(c);
        }
        Ok(BoundaryFunction { grid, kind, samples })
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn comps(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self, c: usize) -> &[Complex64] {
        &self.samples[c]
    }

    pub fn real_samples(&self, c: usize) -> Vec<f64> {
        self.samples[c].iter().map(|v| v.re).collect()
    }

    /// Fourier coefficients of component `c` in FFT order.
    pub fn coefficients(&self, c: usize) -> Vec<Complex64> {
        let mut buf = self.samples[c].clone();
        self.grid.forward(&mut buf);
        buf
    }

    /// Value at `θ = 0`.
    pub fn value_at_one(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s[0]).collect()
    }

    /// Trigonometric interpolant at an arbitrary angle. The Nyquist mode is
    /// split evenly between `±N/2` so real data stays real.
    pub fn eval(&self, theta: f64) -> Vec<Complex64> {
        let n = self.grid.n();
        (0..self.comps())
            .map(|c| {
                let co = self.coefficients(c);
                let mut acc = Complex64::new(0.0, 0.0);
                for (idx, ck) in co.iter().enumerate() {
                    let k = self.grid.mode(idx);
                    if idx == n / 2 {
                        acc += ck * (k as f64 * theta).cos();
                    } else {
                        acc += ck * Complex64::from_polar(1.0, k as f64 * theta);
                    }
                }
                acc
            })
            .collect()
    }

    /// Spectral `d/dθ`.
    pub fn d_theta(&self) -> BoundaryFunction {
        let n = self.grid.n();
        let coefs = (0..self.comps())
            .map(|c| {
                let mut co = self.coefficients(c);
                for (idx, v) in co.iter_mut().enumerate() {
                    let k = if idx == n / 2 { 0 } else { self.grid.mode(idx) };
                    *v *= Complex64::new(0.0, k as f64);
                }
                co
            })
            .collect();
        BoundaryFunction::from_coefficients(self.grid.clone(), self.kind, coefs).expect("sizes match")
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().flatten().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn scaled(&self, s: f64) -> BoundaryFunction {
        let samples = self.samples.iter().map(|c| c.iter().map(|v| v * s).collect()).collect();
        BoundaryFunction { grid: self.grid.clone(), kind: self.kind, samples }
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, other: &BoundaryFunction, s: f64) -> Result<BoundaryFunction, DiscError> {
        if other.comps() != self.comps() || other.grid.n() != self.grid.n() {
            return Err(DiscError::ShapeMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * s).collect())
            .collect();
        let kind = if self.kind == ValueKind::Real && other.kind == ValueKind::Real { ValueKind::Real } else { ValueKind::Complex };
        Ok(BoundaryFunction { grid: self.grid.clone(), kind, samples })
    }

    /// Resample onto another grid via the trigonometric interpolant.
    pub fn resampled(&self, grid: Arc<DiscGrid>) -> BoundaryFunction {
        let n = grid.n();
        let mut samples = vec![vec![Complex64::new(0.0, 0.0); n]; self.comps()];
        for l in 0..n {
            let v = self.eval(grid.theta(l));
            for c in 0..self.comps() {
                samples[c][l] = if self.kind == ValueKind::Real { Complex64::new(v[c].re, 0.0) } else { v[c] };
            }
        }
        BoundaryFunction { grid, kind: self.kind, samples }
    }
}
