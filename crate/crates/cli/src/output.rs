//! CSV and JSON files. Floats are written in shortest round-trip form and
//! rows keep the order they are given in, so identical runs produce
//! identical bytes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};

use delay_sl_core::spectral::{eigenfunction, EigenRecord};
use delay_sl_core::{IntegratorConfig, ProblemSpec, Side};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Samples per piece in `eigfn_<n>.csv`.
pub const EIGFN_POINTS: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub s_n: f64,
    pub lambda_n: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub simplicity_margin: f64,
    pub iters: usize,
}

impl From<&EigenRecord> for SpectrumRow {
    fn from(r: &EigenRecord) -> Self {
        Self {
            n: r.n,
            s_n: r.s_n,
            lambda_n: r.lambda_n,
            bracket_lo: r.bracket.0,
            bracket_hi: r.bracket.1,
            simplicity_margin: r.simplicity_margin,
            iters: r.bisection_iters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigfnRow {
    pub x: f64,
    pub y: f64,
    pub yp: f64,
}

fn output_error(path: &Path, e: impl ToString) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    Ok(dir.to_path_buf())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<PathBuf, CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| output_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| output_error(path, e))?;
    }
    w.flush().map_err(|e| output_error(path, e))?;
    Ok(path.to_path_buf())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| output_error(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| output_error(path, e))?;
    Ok(path.to_path_buf())
}

pub fn write_spectrum(dir: &Path, records: &[EigenRecord]) -> Result<PathBuf, CliError> {
    let rows: Vec<SpectrumRow> = records.iter().map(SpectrumRow::from).collect();
    write_csv(&dir.join("spectrum.csv"), &rows)
}

/// `(x, y, y')` on [`EIGFN_POINTS`] equispaced points per piece. `x = π/2`
/// appears twice: the left limit, then the right one.
pub fn eigenfunction_samples(
    spec: &ProblemSpec,
    rec: &EigenRecord,
    cfg: &IntegratorConfig,
) -> Result<Vec<EigfnRow>, delay_sl_core::Error> {
    let sol = eigenfunction(spec, rec, cfg)?;
    let last = EIGFN_POINTS - 1;
    let mut rows = Vec::with_capacity(2 * EIGFN_POINTS);
    for (a, b, side) in [(0.0, FRAC_PI_2, Side::Left), (FRAC_PI_2, PI, Side::Right)] {
        for j in 0..=last {
            let x = if j == last {
                b
            } else {
                a + (b - a) * j as f64 / last as f64
            };
            let (y, yp) = sol.eval(x, side)?;
            rows.push(EigfnRow { x, y, yp });
        }
    }
    Ok(rows)
}

pub fn write_eigenfunction(
    dir: &Path,
    spec: &ProblemSpec,
    rec: &EigenRecord,
    cfg: &IntegratorConfig,
) -> Result<PathBuf, CliError> {
    let rows = eigenfunction_samples(spec, rec, cfg).map_err(CliError::Numeric)?;
    write_csv(&dir.join(format!("eigfn_{}.csv", rec.n)), &rows)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_path(path)?.deserialize().collect()
}
