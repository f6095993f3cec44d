use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lamom::maps::resolve_map;
use lamom::moments::{CriteriaConfig, DEFAULT_REPORT_TOL};
use lamom_cli::family::{self, check_family, Criterion};
use lamom_cli::{commands, dim_limit, output, CliError, EXIT_NUMERICAL};

/// Entanglement detection with Λ-moments.
#[derive(Debug, Parser)]
#[command(name = "lamom", version)]
struct Cli {
    /// Positive map: built-in name (lambda1, transpose, identity) or a map JSON file.
    #[arg(long, global = true, default_value = "lambda1")]
    map: String,

    /// Tolerance: report tolerance for analyze, bracket width for threshold.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Emit JSON instead of text where both are available.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every criterion on a state file.
    Analyze { state: PathBuf },
    /// Tabulate moments and margins over a parameter grid as CSV.
    Sweep {
        #[arg(long, default_value = "horodecki")]
        family: String,
        #[arg(long, default_value_t = 2.0)]
        from: f64,
        #[arg(long, default_value_t = 5.0)]
        to: f64,
        #[arg(long, default_value_t = 301)]
        steps: usize,
        /// Output file; standard output when omitted or "-".
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate the parameter where a criterion starts detecting.
    Threshold {
        #[arg(long, default_value = "horodecki")]
        family: String,
        /// q3, q3o or ppt3o.
        #[arg(long)]
        criterion: String,
    },
    /// Compare multi-copy observable expectations with spectral moments.
    VerifyOperators {
        #[arg(long, short)]
        k: usize,
        #[arg(long, short, default_value_t = 3.5)]
        a: f64,
    },
    /// Simulate finite-shot estimation of a moment.
    Simulate {
        #[arg(long, short)]
        k: usize,
        #[arg(long, short, default_value_t = 3.5)]
        a: f64,
        #[arg(long, default_value_t = 100_000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const DEFAULT_THRESHOLD_TOL: f64 = 1e-7;

fn emit(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    let res = if text.ends_with('\n') {
        out.write_all(text.as_bytes())
    } else {
        writeln!(out, "{text}")
    };
    match res.and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            Err(CliError::Input(format!("write failed: {e}")))
        }
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut cfg = CriteriaConfig::default();
    match cli.command {
        Command::Analyze { state } => {
            let tol = cli.tol.unwrap_or(DEFAULT_REPORT_TOL);
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::Input(format!(
                    "tol must be finite and nonnegative, got {tol}"
                )));
            }
            cfg.report_tol = tol;
            let report = commands::analyze(&state, &cli.map, &cfg)?;
            for n in &report.notes {
                eprintln!("note: {n}");
            }
            emit(&if cli.json {
                output::to_json(&report)
            } else {
                report.to_text()
            })?;
        }
        Command::Sweep {
            family,
            from,
            to,
            steps,
            out,
        } => {
            check_family(&family)?;
            let lam = resolve_map(&cli.map, 3)?;
            let rows = family::sweep(from, to, steps, &lam, &cfg)?;
            match out.filter(|p| p.as_os_str() != "-") {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| {
                        CliError::Input(format!("cannot create {}: {e}", path.display()))
                    })?;
                    family::write_csv(&rows, BufWriter::new(file)).map_err(|e| {
                        CliError::Input(format!("cannot write {}: {e}", path.display()))
                    })?;
                }
                None => {
                    let mut buf = Vec::new();
                    family::write_csv(&rows, &mut buf)
                        .map_err(|e| CliError::Input(e.to_string()))?;
                    emit(&String::from_utf8_lossy(&buf))?;
                }
            }
        }
        Command::Threshold { family, criterion } => {
            check_family(&family)?;
            let c: Criterion = criterion.parse()?;
            let lam = resolve_map(&cli.map, 3)?;
            let t = family::threshold(c, &lam, cli.tol.unwrap_or(DEFAULT_THRESHOLD_TOL), &cfg)?;
            emit(&if cli.json {
                output::to_json(&t)
            } else {
                format!("{:.6}", t.a_star)
            })?;
        }
        Command::VerifyOperators { k, a } => {
            let r = commands::verify_operators(k, a, &cli.map, dim_limit()?)?;
            emit(&output::to_json(&r))?;
            if !r.passed {
                eprintln!(
                    "error: operator expectation differs from the spectral moment by {:e}",
                    r.difference
                );
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::Simulate { k, a, shots, seed } => {
            let r = commands::simulate(k, a, shots, seed, &cli.map, dim_limit()?)?;
            emit(&output::to_json(&r))?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
