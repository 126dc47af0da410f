use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use padic_slopes::bounds::{
    bounds_report, c_exact, compare_c, hilbert_profile_truncated, CBound, KappaChoice,
};
use padic_slopes::family::{run_experiment, ExperimentConfig, Mode};
use padic_slopes::lattice::{
    profile_mod, quotient_profile, smith_normal_form, DivisorProfile, SnfReport,
};
use padic_slopes::newton::PolygonReport;
use padic_slopes::{Error, IntMatrix, Prime};

/// Newton polygons, lattice quotients and eigenvalue-congruence experiments.
#[derive(Parser)]
#[command(name = "padic-slopes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArg {
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; the report does not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    Prop,
    Constancy,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic polynomial and Newton polygon of a matrix.
    Polygon {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Smith normal form `A = U·D·V`.
    Snf {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Divisor profile from generators of K, or the tensor profile for (d, h, n).
    Profile {
        #[arg(long, requires_all = ["prime", "level"], conflicts_with_all = ["d", "h"])]
        input: Option<PathBuf>,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long)]
        level: Option<u32>,
        #[arg(long, requires_all = ["h", "n"])]
        d: Option<u32>,
        #[arg(long)]
        h: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        max_rank: Option<usize>,
        /// Also report the profile of L/(K + p^{n'}L).
        #[arg(long = "mod")]
        nprime: Option<u32>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Boundary functions, slope bound and κ estimates for a tensor profile.
    Bounds {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        h: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        alpha: u32,
        #[arg(long, default_value = "auto")]
        kappa: KappaChoice,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Eigenvalue-congruence experiment.
    VerifyProp(VerifyArgs),
    /// Slope-multiplicity constancy experiment.
    VerifyConstancy(VerifyArgs),
    /// Either experiment, selected by `--mode`.
    Verify {
        #[arg(long)]
        mode: VerifyMode,
        #[command(flatten)]
        args: VerifyArgs,
    },
    /// Exact slope bound against the closed-form estimate.
    CompareC {
        #[arg(long, value_delimiter = ',', required = true)]
        d_list: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        h_list: Vec<u32>,
        #[arg(long)]
        n_max: u32,
        #[command(flatten)]
        out: OutputArg,
    },
}

#[derive(Serialize)]
struct ProfileReport {
    profile: DivisorProfile,
    multiplicities: Vec<usize>,
    c_exact: CBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduced: Option<Box<ProfileReport>>,
}

impl ProfileReport {
    fn new(profile: DivisorProfile) -> Self {
        ProfileReport {
            multiplicities: profile.multiplicities(),
            c_exact: c_exact(&profile),
            profile,
            reduced: None,
        }
    }
}

/// Errors that map to exit code 2.
#[derive(Debug)]
struct InputError(String);

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        InputError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<IntMatrix, InputError> {
    Ok(IntMatrix::from_json(&read(path)?)?)
}

fn emit<T: Serialize>(value: &T, out: &OutputArg) -> Result<(), InputError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    match &out.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(args: &VerifyArgs, mode: Mode) -> Result<ExitCode, InputError> {
    let config = ExperimentConfig::from_json(&read(&args.config)?)?;
    let report = run_experiment(&config, mode, args.jobs.max(1))?;
    emit(&report, &args.out)?;
    let s = &report.summary;
    eprintln!(
        "{} trials: {} accepted, {} rejected, {} violations, {} warnings",
        s.trials,
        s.accepted,
        s.rejected.values().sum::<u32>(),
        s.violations,
        s.warnings.len()
    );
    Ok(if s.violations > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn run(cli: Cli) -> Result<ExitCode, InputError> {
    match cli.command {
        Command::Polygon { prime, input, out } => {
            let p = Prime::new(prime)?;
            emit(&PolygonReport::for_matrix(&read_matrix(&input)?, p), &out)?;
        }
        Command::Snf { input, out } => {
            let snf = smith_normal_form(&read_matrix(&input)?);
            emit(&SnfReport::from(&snf), &out)?;
        }
        Command::Profile {
            input,
            prime,
            level,
            d,
            h,
            n,
            max_rank,
            nprime,
            out,
        } => {
            let profile = match (input, d, h, n) {
                (Some(path), ..) => {
                    let p = Prime::new(prime.expect("clap enforces --prime"))?;
                    quotient_profile(
                        &read_matrix(&path)?,
                        p,
                        level.expect("clap enforces --level"),
                    )?
                }
                (None, Some(d), Some(h), Some(n)) => {
                    hilbert_profile_truncated(d, h, n, max_rank.unwrap_or(usize::MAX))?
                }
                _ => {
                    return Err(InputError(
                        "give --input with --prime and --level, or --d, --h and --n".into(),
                    ))
                }
            };
            let mut report = ProfileReport::new(profile);
            if let Some(np) = nprime {
                report.reduced = Some(Box::new(ProfileReport::new(profile_mod(
                    &report.profile,
                    np,
                )?)));
            }
            emit(&report, &out)?;
        }
        Command::Bounds {
            d,
            h,
            n,
            alpha,
            kappa,
            out,
        } => {
            emit(&bounds_report(d, h, n, alpha, kappa)?, &out)?;
        }
        Command::VerifyProp(args) => return verify(&args, Mode::Proposition),
        Command::VerifyConstancy(args) => return verify(&args, Mode::Constancy),
        Command::Verify { mode, args } => {
            let mode = match mode {
                VerifyMode::Prop => Mode::Proposition,
                VerifyMode::Constancy => Mode::Constancy,
            };
            return verify(&args, mode);
        }
        Command::CompareC {
            d_list,
            h_list,
            n_max,
            out,
        } => {
            emit(&compare_c(&d_list, &h_list, n_max)?, &out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
