use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{BoundaryFunction, DiscError, DiscGrid, ValueKind};

/// A map `𝔻̄ → ℂ^c` stored as polar-Fourier coefficients `f_k(r_m)`.
#[derive(Clone, Debug)]
pub struct DiscFunction {
    grid: Arc<DiscGrid>,
    /// `coef[c][idx * M + m]`, `idx` in FFT order.
    coef: Vec<Vec<Complex64>>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl DiscFunction {
    pub fn zeros(grid: Arc<DiscGrid>, comps: usize) -> Self {
        let len = grid.n() * grid.m();
        DiscFunction { grid, coef: vec![vec![ZERO; len]; comps] }
    }

    /// From grid values `values[c][m * N + l]` at `(r_m, θ_l)`.
    pub fn from_values(grid: Arc<DiscGrid>, values: Vec<Vec<Complex64>>) -> Result<Self, DiscError> {
        let (n, m) = (grid.n(), grid.m());
        let mut coef = Vec::with_capacity(values.len());
        for v in values {
            if v.len() != n * m {
                return Err(DiscError::SampleCount { expected: n * m, got: v.len() });
            }
            let mut out = vec![ZERO; n * m];
            let mut buf = vec![ZERO; n];
            for mi in 0..m {
                buf.copy_from_slice(&v[mi * n..(mi + 1) * n]);
                grid.forward(&mut buf);
                for (idx, c) in buf.iter().enumerate() {
                    out[idx * m + mi] = *c;
                }
            }
            coef.push(out);
        }
        Ok(DiscFunction { grid, coef })
    }

    /// Samples `f(ζ)` at every grid node.
    pub fn from_fn(grid: Arc<DiscGrid>, comps: usize, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let (n, m) = (grid.n(), grid.m());
        let values = (0..comps)
            .map(|c| {
                let mut v = Vec::with_capacity(n * m);
                for mi in 0..m {
                    for l in 0..n {
                        v.push(f(c, grid.point(mi, l)));
                    }
                }
                v
            })
            .collect();
        DiscFunction::from_values(grid, values).expect("sizes match")
    }

    /// Vector-valued variant of [`from_fn`](Self::from_fn).
    pub fn from_vec_fn(grid: Arc<DiscGrid>, comps: usize, f: impl Fn(Complex64) -> Vec<Complex64>) -> Self {
        let (n, m) = (grid.n(), grid.m());
        let mut values = vec![Vec::with_capacity(n * m); comps];
        for mi in 0..m {
            for l in 0..n {
                let v = f(grid.point(mi, l));
                for c in 0..comps {
                    values[c].push(v[c]);
                }
            }
        }
        DiscFunction::from_values(grid, values).expect("sizes match")
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    pub fn comps(&self) -> usize {
        self.coef.len()
    }

    pub(crate) fn coef(&self, c: usize) -> &[Complex64] {
        &self.coef[c]
    }

    pub(crate) fn coef_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.coef[c]
    }

    /// Coefficient of mode `k` at radial node `m`, zero if not representable.
    pub fn mode_coefficient(&self, c: usize, k: i64, m: usize) -> Complex64 {
        match self.grid.index_of(k) {
            Some(idx) => self.coef[c][idx * self.grid.m() + m],
            None => ZERO,
        }
    }

    /// Grid values `[c][m * N + l]`.
    pub fn values(&self) -> Vec<Vec<Complex64>> {
        (0..self.comps()).map(|c| self.component_values(c)).collect()
    }

    pub fn component_values(&self, c: usize) -> Vec<Complex64> {
        let (n, m) = (self.grid.n(), self.grid.m());
        let mut out = vec![ZERO; n * m];
        let mut buf = vec![ZERO; n];
        for mi in 0..m {
            for idx in 0..n {
                buf[idx] = self.coef[c][idx * m + mi];
            }
            self.grid.inverse(&mut buf);
            out[mi * n..(mi + 1) * n].copy_from_slice(&buf);
        }
        out
    }

    /// Values on the boundary circle (radial node `r = 1`).
    pub fn boundary_values(&self, c: usize) -> Vec<Complex64> {
        let (n, m) = (self.grid.n(), self.grid.m());
        let mut buf: Vec<Complex64> = (0..n).map(|idx| self.coef[c][idx * m]).collect();
        self.grid.inverse(&mut buf);
        buf
    }

    pub fn boundary_trace(&self) -> BoundaryFunction {
        let samples = (0..self.comps()).map(|c| self.boundary_values(c)).collect();
        BoundaryFunction::from_samples(self.grid.clone(), samples).expect("sizes match")
    }

    /// Evaluate at `|ζ| ≤ 1` by radial barycentric interpolation and Fourier
    /// summation.
    pub fn eval(&self, zeta: Complex64) -> Vec<Complex64> {
        let (n, m) = (self.grid.n(), self.grid.m());
        let r = zeta.norm().min(1.0);
        let theta = zeta.arg();
        let (even, odd) = self.grid.radial_weights(r);
        let phases: Vec<Complex64> = (0..n).map(|idx| Complex64::from_polar(1.0, self.grid.mode(idx) as f64 * theta)).collect();
        (0..self.comps())
            .map(|c| {
                let mut acc = ZERO;
                for idx in 0..n {
                    let w = if self.grid.mode(idx).rem_euclid(2) == 0 { &even } else { &odd };
                    let col = &self.coef[c][idx * m..(idx + 1) * m];
                    let fk: Complex64 = col.iter().zip(w).map(|(a, b)| a * b).sum();
                    acc += fk * phases[idx];
                }
                acc
            })
            .collect()
    }

    /// Sup norm over grid values, taken componentwise as `max_c |f_c|`.
    pub fn sup_norm(&self) -> f64 {
        (0..self.comps())
            .flat_map(|c| self.component_values(c))
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Sup over grid nodes of the Euclidean norm of the vector value.
    pub fn sup_vector_norm(&self) -> f64 {
        let vals = self.values();
        let len = vals.first().map_or(0, |v| v.len());
        (0..len)
            .map(|i| vals.iter().map(|v| v[i].norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: Complex64) -> DiscFunction {
        let coef = self.coef.iter().map(|c| c.iter().map(|v| v * s).collect()).collect();
        DiscFunction { grid: self.grid.clone(), coef }
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, other: &DiscFunction, s: Complex64) -> DiscFunction {
        assert_eq!(self.comps(), other.comps());
        let coef = self
            .coef
            .iter()
            .zip(&other.coef)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * s).collect())
            .collect();
        DiscFunction { grid: self.grid.clone(), coef }
    }

    /// Adds the constant vector `v`.
    pub fn add_constant(&self, v: &[Complex64]) -> DiscFunction {
        let m = self.grid.m();
        let mut out = self.clone();
        for (c, vc) in v.iter().enumerate() {
            for mi in 0..m {
                out.coef[c][mi] += vc;
            }
        }
        out
    }

    pub fn component(&self, c: usize) -> DiscFunction {
        DiscFunction { grid: self.grid.clone(), coef: vec![self.coef[c].clone()] }
    }

    pub fn stack(parts: &[DiscFunction]) -> DiscFunction {
        let grid = parts[0].grid.clone();
        let coef = parts.iter().flat_map(|p| p.coef.iter().cloned()).collect();
        DiscFunction { grid, coef }
    }

    /// `∂f/∂r` on the boundary circle.
    pub fn boundary_radial_derivative(&self) -> BoundaryFunction {
        let (n, m) = (self.grid.n(), self.grid.m());
        let mut samples = Vec::with_capacity(self.comps());
        for c in 0..self.comps() {
            let mut buf = vec![ZERO; n];
            for (idx, b) in buf.iter_mut().enumerate() {
                let d = self.grid.d_fold(self.grid.mode(idx));
                let col = &self.coef[c][idx * m..(idx + 1) * m];
                *b = d.row(0).iter().zip(col).map(|(w, v)| v * *w).sum();
            }
            self.grid.inverse(&mut buf);
            samples.push(buf);
        }
        BoundaryFunction::from_samples(self.grid.clone(), samples).expect("sizes match")
    }

    /// Transfer to another grid by evaluation at its nodes.
    pub fn resampled(&self, grid: Arc<DiscGrid>) -> DiscFunction {
        let comps = self.comps();
        DiscFunction::from_vec_fn(grid, comps, |z| self.eval(z))
    }

    /// Mode table of component `c` as CSV with columns `k, r_index, re, im`.
    pub fn write_modes_csv<W: Write>(&self, c: usize, w: W) -> Result<(), DiscError> {
        let (n, m) = (self.grid.n(), self.grid.m());
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "r_index", "re", "im"])?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|idx| self.grid.mode(*idx));
        for idx in order {
            for mi in 0..m {
                let v = self.coef[c][idx * m + mi];
                wr.write_record(&[
                    self.grid.mode(idx).to_string(),
                    mi.to_string(),
                    format!("{:?}", v.re),
                    format!("{:?}", v.im),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads a single-component mode table written by
    /// [`write_modes_csv`](Self::write_modes_csv). Missing entries are zero.
    pub fn read_modes_csv<R: Read>(grid: Arc<DiscGrid>, r: R) -> Result<DiscFunction, DiscError> {
        let m = grid.m();
        let mut out = DiscFunction::zeros(grid.clone(), 1);
        let mut rd = csv::Reader::from_reader(r);
        for rec in rd.deserialize::<(i64, usize, f64, f64)>() {
            let (k, mi, re, im) = rec?;
            let idx = grid.index_of(k).ok_or(DiscError::ModeOutOfRange(k))?;
            if mi >= m {
                return Err(DiscError::RadialIndexOutOfRange(mi));
            }
            out.coef[0][idx * m + mi] = Complex64::new(re, im);
        }
        Ok(out)
    }

    /// Boundary values viewed as real data, component `c`.
    pub fn boundary_real(&self, c: usize) -> BoundaryFunction {
        let vals = self.boundary_values(c).into_iter().map(|v| v.re).collect();
        BoundaryFunction::from_real_samples(self.grid.clone(), vec![vals]).expect("sizes match")
    }
}

impl BoundaryFunction {
    /// Whether all samples are real to within `tol`.
    pub fn is_real_within(&self, tol: f64) -> bool {
        self.kind() == ValueKind::Real || (0..self.comps()).all(|c| self.samples(c).iter().all(|v| v.im.abs() <= tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<DiscGrid> {
        DiscGrid::shared(32, 12).unwrap()
    }

    #[test]
    fn evaluation_matches_closed_form() {
        let f = DiscFunction::from_fn(grid(), 1, |_, z| z * z * z.conj() + 2.0 * z.conj().powu(3) - 1.0);
        for zeta in [Complex64::new(0.3, -0.4), Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, 2.0)] {
            let expect = zeta * zeta * zeta.conj() + 2.0 * zeta.conj().powu(3) - 1.0;
            assert!((f.eval(zeta)[0] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_trace_matches_eval() {
        let f = DiscFunction::from_fn(grid(), 1, |_, z| (z * 0.5).exp());
        let tr = f.boundary_trace();
        for l in [0, 3, 17] {
            let z = Complex64::from_polar(1.0, f.grid().theta(l));
            assert!((tr.samples(0)[l] - f.eval(z)[0]).norm() < 1e-10);
        }
    }

    #[test]
    fn radial_derivative_of_modulus_squared() {
        let f = DiscFunction::from_fn(grid(), 1, |_, z| z.norm_sqr() * z);
        let d = f.boundary_radial_derivative();
        // d/dr r^3 e^{iθ} = 3 r^2 e^{iθ}
        for l in [0, 5] {
            let t = d.grid().theta(l);
            assert!((d.samples(0)[l] - 3.0 * Complex64::from_polar(1.0, t)).norm() < 1e-11);
        }
    }

    #[test]
    fn mode_csv_round_trip() {
        let f = DiscFunction::from_fn(grid(), 1, |_, z| z * z.conj() + Complex64::new(0.25, -1.0) * z.conj());
        let mut buf = Vec::new();
        f.write_modes_csv(0, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,r_index,re,im"));
        let g = DiscFunction::read_modes_csv(grid(), buf.as_slice()).unwrap();
        assert_eq!(g.coef(0), f.coef(0));
    }
}
