//! Pipelines behind the `delay-sl-spectra` binary: spectrum and
//! eigenfunction export, numeric-versus-asymptotic comparison tables and the
//! property suite.

pub mod config;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use delay_sl_core::asymptotics::{refined_s, SignConvention};
use delay_sl_core::quadrature::oscillatory_panels;
use delay_sl_core::spectral::{spectrum, SpectrumReport};
use delay_sl_core::{Error as CoreError, ProblemSpec};
use serde::Serialize;
use thiserror::Error;

pub use config::{ConfigError, RunConfig};
pub use delay_sl_core::fit::{slope_fit, PowerFit};
pub use verify::{run_verify, CheckStatus, VerifyCheck, VerifyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid problem: {0}")]
    Invalid(CoreError),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("{} eigenvalue search(es) failed: {}", .0.len(), describe_failures(.0))]
    Spectrum(Vec<(usize, CoreError)>),
    #[error("numeric failure: {0}")]
    Numeric(CoreError),
}

impl CliError {
    /// 1 for anything wrong with the input or the output location, 2 for a
    /// numeric breakdown.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Invalid(_) | Self::Output { .. } => 1,
            Self::Spectrum(_) | Self::Numeric(_) => 2,
        }
    }
}

fn describe_failures(failures: &[(usize, CoreError)]) -> String {
    failures
        .iter()
        .map(|(n, e)| format!("n={n}: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Validate the problem and make sure every delayed point stays inside its
/// piece. Smoothness conditions only matter for the refined asymptotics,
/// so their failure is returned as warnings instead.
pub fn prepare(spec: &ProblemSpec) -> Result<(ProblemSpec, Vec<String>), CliError> {
    let spec = spec.clone().validate().map_err(CliError::Invalid)?;
    let report = spec.check_admissibility(512).map_err(CliError::Invalid)?;
    if !(report.delay_nonneg && report.range_left_ok && report.range_right_ok) {
        return Err(CliError::Invalid(CoreError::InvalidArgument(format!(
            "delay leaves its piece (nonneg {}, left range {}, right range {}, worst margin {:e})",
            report.delay_nonneg, report.range_left_ok, report.range_right_ok, report.worst_margin
        ))));
    }
    let mut warnings = Vec::new();
    if !report.cond_a_ok {
        warnings.push("q' or the delay's second derivative looks unbounded".to_string());
    }
    if !report.cond_b_ok {
        warnings.push(format!(
            "delay slope condition fails (max slope {}); refined asymptotics may not apply",
            report.max_delay_slope
        ));
    }
    Ok((spec, warnings))
}

pub fn compute_spectrum(cfg: &RunConfig, spec: &ProblemSpec) -> SpectrumReport {
    spectrum(
        spec,
        cfg.n_min,
        cfg.n_max,
        &cfg.integrator,
        cfg.scan_points,
        cfg.tol,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub report: SpectrumReport,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Eigenvalues for `n_min..=n_max`, written to `spectrum.csv`, plus one
/// `eigfn_<n>.csv` per eigenvalue found. Files for the successful indices
/// are written even when some searches fail.
pub fn run_solve(cfg: &RunConfig) -> Result<SolveOutcome, CliError> {
    let (spec, warnings) = prepare(&cfg.spec)?;
    let report = compute_spectrum(cfg, &spec);
    let dir = output::ensure_dir(&cfg.output_dir)?;
    let mut files = vec![output::write_spectrum(&dir, &report.records)?];
    for rec in &report.records {
        files.push(output::write_eigenfunction(
            &dir,
            &spec,
            rec,
            &cfg.integrator,
        )?);
    }
    if !report.failures.is_empty() {
        return Err(CliError::Spectrum(report.failures));
    }
    Ok(SolveOutcome {
        report,
        files,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub s_numeric: f64,
    pub s_leading: f64,
    pub s_refined: f64,
    pub delta_n: f64,
    pub err_leading: f64,
    pub err_refined: f64,
    pub simplicity_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub sign: SignConvention,
    pub rows: Vec<ComparisonRow>,
    /// Log-log fit of `err_leading` against `4n - 3`; absent when the fit is
    /// degenerate.
    pub fit_leading: Option<PowerFit>,
    pub fit_refined: Option<PowerFit>,
}

pub fn comparison_rows(
    spec: &ProblemSpec,
    report: &SpectrumReport,
    sign: SignConvention,
) -> Result<Vec<ComparisonRow>, CoreError> {
    report
        .records
        .iter()
        .map(|rec| {
            let s0 = delay_sl_core::asymptotics::leading_s(spec, rec.n);
            let est = refined_s(spec, rec.n, oscillatory_panels(s0), sign)?;
            Ok(ComparisonRow {
                n: rec.n,
                s_numeric: rec.s_n,
                s_leading: est.s_leading,
                s_refined: est.s_refined,
                delta_n: est.delta_n,
                err_leading: (rec.s_n - est.s_leading).abs(),
                err_refined: (rec.s_n - est.s_refined).abs(),
                simplicity_margin: rec.simplicity_margin,
            })
        })
        .collect()
}

pub fn index_fit(rows: &[ComparisonRow], err: impl Fn(&ComparisonRow) -> f64) -> Option<PowerFit> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (4.0 * r.n as f64 - 3.0, err(r)))
        .collect();
    slope_fit(&points).ok()
}

pub fn compare(
    spec: &ProblemSpec,
    report: &SpectrumReport,
    sign: SignConvention,
) -> Result<Comparison, CoreError> {
    let rows = comparison_rows(spec, report, sign)?;
    Ok(Comparison {
        sign,
        fit_leading: index_fit(&rows, |r| r.err_leading),
        fit_refined: index_fit(&rows, |r| r.err_refined),
        rows,
    })
}

/// Numeric eigenvalues against the leading and refined asymptotic
/// estimates, written to `compare.csv` and `compare.json`.
pub fn run_compare(cfg: &RunConfig) -> Result<(Comparison, Vec<PathBuf>), CliError> {
    let (spec, _) = prepare(&cfg.spec)?;
    let report = compute_spectrum(cfg, &spec);
    let comparison = compare(&spec, &report, cfg.sign).map_err(CliError::Numeric)?;
    let dir = output::ensure_dir(&cfg.output_dir)?;
    let files = vec![
        output::write_csv(&dir.join("compare.csv"), &comparison.rows)?,
        output::write_json(&dir.join("compare.json"), &comparison)?,
    ];
    if !report.failures.is_empty() {
        return Err(CliError::Spectrum(report.failures));
    }
    Ok((comparison, files))
}
