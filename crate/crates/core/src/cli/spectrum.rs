//! The `spectrum` command: analytic against numerical plane-wave eigenvalues.

use std::fmt::Write as _;
use std::path::PathBuf;

use super::output::write_atomic;
use super::{CliError, CliResult};
use crate::grid::{
    kinetic_eigenvalue, kinetic_operator, momentum_eigenvalue, momentum_operator, plane_wave,
    GridSpec,
};
use crate::numerics::{inner, StructuredOperator, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub mode: usize,
    pub momentum_analytic: f64,
    pub momentum_numeric: f64,
    pub kinetic_analytic: f64,
    pub kinetic_numeric: f64,
}

impl SpectrumRow {
    pub fn max_diff(&self) -> f64 {
        (self.momentum_analytic - self.momentum_numeric)
            .abs()
            .max((self.kinetic_analytic - self.kinetic_numeric).abs())
    }
}

fn rayleigh(op: &StructuredOperator, v: &[C64]) -> CliResult<f64> {
    let av = op.apply(v).map_err(|e| CliError::Failure(e.to_string()))?;
    Ok((inner(v, &av) / inner(v, v)).re)
}

/// One row per mode `n = 0..N`, numerics from Rayleigh quotients of plane waves.
pub fn spectrum(grid: &GridSpec, mu: f64) -> CliResult<Vec<SpectrumRow>> {
    let invalid = |e: crate::Error| CliError::Usage(e.to_string());
    let p = momentum_operator(grid).map_err(invalid)?;
    let t = kinetic_operator(grid, mu).map_err(invalid)?;
    (0..grid.size())
        .map(|n| {
            let mode = plane_wave(grid, n as isize);
            Ok(SpectrumRow {
                mode: n,
                momentum_analytic: momentum_eigenvalue(grid, n as isize),
                momentum_numeric: rayleigh(&p, &mode)?,
                kinetic_analytic: kinetic_eigenvalue(grid, mu, n as isize),
                kinetic_numeric: rayleigh(&t, &mode)?,
            })
        })
        .collect()
}

pub fn to_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from(
        "n,momentum_analytic,momentum_numeric,momentum_diff,kinetic_analytic,kinetic_numeric,kinetic_diff\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.mode,
            r.momentum_analytic,
            r.momentum_numeric,
            r.momentum_numeric - r.momentum_analytic,
            r.kinetic_analytic,
            r.kinetic_numeric,
            r.kinetic_numeric - r.kinetic_analytic
        )
        .expect("writing to a String");
    }
    out
}

pub fn cmd_spectrum(
    length: f64,
    k: u32,
    mu: f64,
    centered: bool,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let grid = GridSpec::new(length, k, centered).map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = spectrum(&grid, mu)?;
    let csv = to_csv(&rows);
    let worst = rows.iter().fold(0.0f64, |m, r| m.max(r.max_diff()));
    match out {
        Some(path) => {
            write_atomic(&path, csv.as_bytes())?;
            println!("{} modes, max |analytic - numeric| = {worst:e}", rows.len());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
