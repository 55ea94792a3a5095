//! CSV export of converged discs and a plain-text replay format.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{BishopDisc, SolverError};
use crate::disc::{DiscFunction, DiscGrid};

/// Version tag of the CSV column layout.
pub const CSV_VERSION: &str = "1";

fn header(prefix: &[&str], comps: usize) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    for c in 1..=comps {
        h.push(format!("re_z{c}"));
        h.push(format!("im_z{c}"));
    }
    h
}

/// Boundary samples: `theta, re_z1, im_z1, …`.
pub fn write_boundary_csv<W: Write>(z: &DiscFunction, w: W) -> Result<(), SolverError> {
    let grid = z.grid();
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header(&["theta"], z.comps()))?;
    let vals = z.boundary_trace_values();
    for l in 0..grid.n() {
        let mut rec = vec![format!("{:?}", grid.theta(l))];
        for v in &vals {
            rec.push(format!("{:?}", v[l].re));
            rec.push(format!("{:?}", v[l].im));
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Interior grid values: `r_index, theta_index, r, theta, re_z1, im_z1, …`.
pub fn write_interior_csv<W: Write>(z: &DiscFunction, w: W) -> Result<(), SolverError> {
    let grid = z.grid();
    let (n, m) = (grid.n(), grid.m());
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header(&["r_index", "theta_index", "r", "theta"], z.comps()))?;
    let vals = z.values();
    for mi in 0..m {
        for l in 0..n {
            let mut rec = vec![mi.to_string(), l.to_string(), format!("{:?}", grid.radii()[mi]), format!("{:?}", grid.theta(l))];
            for v in &vals {
                rec.push(format!("{:?}", v[mi * n + l].re));
                rec.push(format!("{:?}", v[mi * n + l].im));
            }
            wr.write_record(&rec)?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Grid values of a replayed disc together with its summary numbers.
#[derive(Clone, Debug)]
pub struct DiscReplay {
    pub z: DiscFunction,
    pub point: Vec<Complex64>,
    pub epsilon: f64,
    pub residual_pde: f64,
    pub residual_bc: f64,
    pub residual_pin: f64,
    pub iterations: usize,
}

/// Text format: a header line, key/value lines and one `v` line per grid
/// node. Floats use the shortest round-trip representation.
pub fn write_replay<W: Write>(disc: &BishopDisc, mut w: W) -> Result<(), SolverError> {
    let grid = disc.grid();
    writeln!(w, "bishop-disc-replay 1")?;
    writeln!(w, "grid {} {}", grid.n(), grid.m())?;
    writeln!(w, "comps {}", disc.z.comps())?;
    write!(w, "point")?;
    for p in disc.point() {
        write!(w, " {:?} {:?}", p.re, p.im)?;
    }
    writeln!(w)?;
    writeln!(w, "epsilon {:?}", disc.epsilon)?;
    writeln!(w, "residuals {:?} {:?} {:?}", disc.residual_pde, disc.residual_bc, disc.residual_pin)?;
    writeln!(w, "iterations {}", disc.iterations)?;
    let vals = disc.z.values();
    let nodes = grid.n() * grid.m();
    for i in 0..nodes {
        write!(w, "v")?;
        for v in &vals {
            write!(w, " {:?} {:?}", v[i].re, v[i].im)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn parse_err(msg: impl Into<String>) -> SolverError {
    SolverError::Replay(msg.into())
}

fn floats(parts: &[&str]) -> Result<Vec<f64>, SolverError> {
    parts.iter().map(|s| s.parse::<f64>().map_err(|e| parse_err(format!("bad number {s:?}: {e}")))).collect()
}

pub fn read_replay<R: BufRead>(r: R) -> Result<DiscReplay, SolverError> {
    let mut lines = r.lines();
    let mut next = || -> Result<String, SolverError> { lines.next().ok_or_else(|| parse_err("unexpected end of input"))?.map_err(SolverError::from) };
    if next()?.trim() != "bishop-disc-replay 1" {
        return Err(parse_err("missing replay header"));
    }
    let mut grid: Option<Arc<DiscGrid>> = None;
    let mut comps = 0usize;
    let mut point = Vec::new();
    let mut epsilon = 0.0;
    let mut res = [0.0; 3];
    let mut iterations = 0;
    let mut values: Vec<Vec<Complex64>> = Vec::new();
    loop {
        let line = match next() {
            Ok(l) => l,
            Err(SolverError::Replay(_)) => break,
            Err(e) => return Err(e),
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        let Some((key, rest)) = parts.split_first() else { continue };
        match *key {
            "grid" => {
                let n: usize = rest.first().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad grid line"))?;
                let m: usize = rest.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad grid line"))?;
                grid = Some(DiscGrid::shared(n, m)?);
            }
            "comps" => {
                comps = rest.first().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad comps line"))?;
                values = vec![Vec::new(); comps];
            }
            "point" => point = floats(rest)?.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect(),
            "epsilon" => epsilon = floats(rest)?.first().copied().ok_or_else(|| parse_err("bad epsilon"))?,
            "residuals" => {
                let f = floats(rest)?;
                if f.len() != 3 {
                    return Err(parse_err("bad residuals line"));
                }
                res.copy_from_slice(&f);
            }
            "iterations" => iterations = rest.first().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad iterations"))?,
            "v" => {
                let f = floats(rest)?;
                if f.len() != 2 * comps {
                    return Err(parse_err("value line has wrong width"));
                }
                for c in 0..comps {
                    values[c].push(Complex64::new(f[2 * c], f[2 * c + 1]));
                }
            }
            other => return Err(parse_err(format!("unknown key {other:?}"))),
        }
    }
    let grid = grid.ok_or_else(|| parse_err("missing grid line"))?;
    let z = DiscFunction::from_values(grid, values)?;
    Ok(DiscReplay { z, point, epsilon, residual_pde: res[0], residual_bc: res[1], residual_pin: res[2], iterations })
}
