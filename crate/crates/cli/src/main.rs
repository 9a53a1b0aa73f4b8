use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use monoflux::config::load_scenario;
use monoflux::field::load_field;
use monoflux::monotonicity::{default_radii, full_audit, write_profile_csv};
use monoflux::oracle::solve_vortex;
use monoflux::scenario::{builtin, list_builtins, run_scenario, Expect, Scenario};
use monoflux::tensor::tensor_report;
use monoflux::{Error, PotentialKind, PotentialSpec, Verdict};

/// Stress-energy and monotonicity checks for Δu = ∇W(u).
///
/// Exit status: 0 all asserted verdicts hold, 1 a verdict failed,
/// 2 bad input or configuration, 3 solver divergence.
/// MONOFLUX_THREADS caps the worker count (0 or unset: all cores).
#[derive(Parser)]
#[command(name = "monoflux", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file or a built-in.
    Run {
        /// Scenario config file.
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        config: Option<PathBuf>,
        /// Name of a built-in scenario (see `monoflux list`).
        #[arg(long)]
        builtin: Option<String>,
        /// Override the artifact directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    List,
    /// Reference solutions.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Stress-tensor identities and Pohozaev balances of a field file.
    CheckTensor {
        #[arg(long)]
        field: PathBuf,
        /// Pohozaev radius; repeatable. Defaults to L/4 and L/2.
        #[arg(long = "R", value_name = "R")]
        radius: Vec<f64>,
        /// Coefficients for custom-polynomial fields (comma-separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coefficients: Option<Vec<f64>>,
    },
    /// Monotonicity audit of a field file on K default radii.
    CheckMonotonicity {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 32)]
        radii: usize,
        /// Write the profile CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coefficients: Option<Vec<f64>>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Radial Ginzburg–Landau vortex profile by shooting.
    Vortex {
        #[arg(long, default_value_t = 12.0)]
        rmax: f64,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        /// CSV output (`r,g`); stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("MONOFLUX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("MONOFLUX_THREADS must be a nonnegative integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn print_verdicts(out: &mut impl Write, verdicts: &[Verdict]) -> io::Result<()> {
    for v in verdicts {
        writeln!(out, "{}", v.summary_line())?;
    }
    Ok(())
}

fn field_potential(
    path: &Path,
    coefficients: Option<Vec<f64>>,
) -> Result<Option<PotentialSpec>, Error> {
    let Some(coefs) = coefficients else {
        return Ok(None);
    };
    // m comes from the file header
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut header = String::new();
    io::BufReader::new(file)
        .read_line(&mut header)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    let m = header
        .split_whitespace()
        .find_map(|t| t.strip_prefix("m="))
        .and_then(|v| v.parse().ok())
        .unwrap_or(1);
    PotentialSpec::new(PotentialKind::CustomPolynomial, m, coefs).map(Some)
}

fn run(cli: Cli) -> Result<u8, Error> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |e: io::Error| Error::Io {
        path: "<stdout>".into(),
        source: e,
    };
    match cli.command {
        Command::List => {
            write!(out, "{}", list_builtins()).map_err(io_err)?;
            Ok(0)
        }
        Command::Run {
            config,
            builtin: name,
            out_dir,
        } => {
            let mut scenario: Scenario = match (config, name) {
                (Some(path), _) => load_scenario(path)?,
                (None, Some(name)) => builtin(&name)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            if let Some(dir) = out_dir {
                scenario.output_dir = dir;
            }
            let (report, written) = run_scenario(&scenario)?;
            write!(out, "{}", report.verdict_lines()).map_err(io_err)?;
            for (v, role) in &report.verdicts {
                if *role != Expect::Pass {
                    writeln!(
                        out,
                        "# {} is {}",
                        v.property.name(),
                        match role {
                            Expect::Fail => "expected to fail",
                            _ => "report-only",
                        }
                    )
                    .map_err(io_err)?;
                }
            }
            for p in written {
                writeln!(out, "# wrote {}", p.display()).map_err(io_err)?;
            }
            let unexpected = report.unexpected();
            if unexpected.is_empty() {
                writeln!(out, "scenario {}: ok", report.name).map_err(io_err)?;
            } else {
                let names: Vec<_> = unexpected.iter().map(|v| v.property.name()).collect();
                writeln!(
                    out,
                    "scenario {}: FAILED ({})",
                    report.name,
                    names.join(", ")
                )
                .map_err(io_err)?;
            }
            Ok(report.exit_code() as u8)
        }
        Command::Oracle {
            which:
                OracleCommand::Vortex {
                    rmax,
                    step,
                    out: dest,
                },
        } => {
            let profile = solve_vortex(rmax, step)?;
            eprintln!("slope_at_zero {}", monoflux::fmt_f64(profile.slope_at_zero));
            match dest {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    let mut w = io::BufWriter::new(file);
                    profile
                        .write_csv(&mut w)
                        .and_then(|_| w.flush())
                        .map_err(|e| Error::Io { path, source: e })?;
                }
                None => profile.write_csv(&mut out).map_err(io_err)?,
            }
            Ok(0)
        }
        Command::CheckTensor {
            field,
            radius,
            coefficients,
        } => {
            let potential = field_potential(&field, coefficients)?;
            let f = load_field(&field, potential)?;
            let radii = if radius.is_empty() {
                monoflux::scenario::default_pohozaev_radii(f.grid())
            } else {
                radius
            };
            let report = tensor_report(&f, &radii)?;
            write!(out, "{}", report.render()).map_err(io_err)?;
            let verdicts = report.verdicts();
            print_verdicts(&mut out, &verdicts).map_err(io_err)?;
            Ok(u8::from(verdicts.iter().any(|v| !v.passed)))
        }
        Command::CheckMonotonicity {
            field,
            radii,
            csv,
            coefficients,
        } => {
            let potential = field_potential(&field, coefficients)?;
            let f = load_field(&field, potential)?;
            let (profile, verdicts) = full_audit(&f, &default_radii(f.grid(), radii))?;
            if let Some(path) = csv {
                let mut buf = Vec::new();
                write_profile_csv(&profile, &mut buf).map_err(io_err)?;
                std::fs::write(&path, buf).map_err(|e| Error::Io { path, source: e })?;
            }
            print_verdicts(&mut out, &verdicts).map_err(io_err)?;
            // the Modica bound only gates the strong formulas here
            let failed = verdicts
                .iter()
                .any(|v| !v.passed && v.property != monoflux::Property::ModicaPointwise);
            Ok(u8::from(failed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("monoflux: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("monoflux: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
