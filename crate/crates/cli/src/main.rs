use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use delay_sl_core::asymptotics::SignConvention;
use delay_sl_spectra::{run_compare, run_solve, run_verify, CheckStatus, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "delay-sl-spectra",
    version,
    about = "Eigenvalues of a delayed Sturm-Liouville problem with transmission conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sign {
    Paper,
    Corrected,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sign of the refined correction; overrides `sign` in the config.
    #[arg(long, value_enum)]
    sign: Option<Sign>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and eigenfunctions: spectrum.csv, eigfn_<n>.csv.
    Solve(Common),
    /// Numeric against asymptotic eigenvalues: compare.csv, compare.json.
    Compare(Common),
    /// Property suite: verify.json.
    Verify(Common),
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(sign) = common.sign {
        cfg.sign = match sign {
            Sign::Paper => SignConvention::Paper,
            Sign::Corrected => SignConvention::Corrected,
        };
    }
    Ok(cfg)
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = load(&c)?;
            let out = run_solve(&cfg)?;
            warn(&out.warnings);
            println!(
                "{} eigenvalues, {} files in {}",
                out.report.records.len(),
                out.files.len(),
                cfg.output_dir.display()
            );
        }
        Command::Compare(c) => {
            let (cmp, files) = run_compare(&load(&c)?)?;
            let slope = |f: Option<delay_sl_spectra::PowerFit>| {
                f.map_or("n/a".to_string(), |f| format!("{:.4}", f.slope))
            };
            println!(
                "{} rows, sign {}, leading slope {}, refined slope {}",
                cmp.rows.len(),
                cmp.sign,
                slope(cmp.fit_leading),
                slope(cmp.fit_refined)
            );
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Verify(c) => {
            let (report, path) = run_verify(&load(&c)?)?;
            warn(&report.warnings);
            for check in &report.checks {
                let tag = match check.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skip => "SKIP",
                };
                let measured = check
                    .measured
                    .map_or(String::new(), |m| format!(" measured={m:.6e}"));
                println!("{tag} {}{measured} {}", check.name, check.threshold);
            }
            println!("overall: {}", if report.passed() { "pass" } else { "fail" });
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
