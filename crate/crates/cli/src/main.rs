//! `polybetti` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | an experiment ran but a declared check failed |
//! | 2 | unparsable arguments, lengths or model |
//! | 3 | invalid experiment config |
//! | 4 | file could not be read or written |
//! | 10 | `n` above the enumeration cap |
//! | 11 | length vector is not generic |
//! | 12 | float subset sum too close to zero to classify |
//! | 13 | closed form requested for even `n` |
//! | 14 | `t <= 0` |
//! | 15 | internal consistency failure |

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polybetti::asymptotics::{run_experiment, ExperimentConfig};
use polybetti::exact::Enumerator;
use polybetti::quadrature::compute_c_alpha;
use polybetti::stats::{ks_normal, mean, variance};
use polybetti::stochastic::{tau, tau_tilde, LengthLaw, MonteCarlo};
use polybetti::{Error, Kind, LengthVector, RandomModel};

use report::{Emit, Report, Row};

pub const EXIT_CHECKS_FAILED: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_CAP: u8 = 10;
pub const EXIT_NON_GENERIC: u8 = 11;
pub const EXIT_AMBIGUOUS: u8 = 12;
pub const EXIT_EVEN_N: u8 = 13;
pub const EXIT_T_NONPOSITIVE: u8 = 14;
pub const EXIT_INTERNAL: u8 = 15;

#[derive(Parser, Debug)]
#[command(name = "polybetti", version, about = "Betti numbers of polygon spaces and their random-length statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Print JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,

    /// Also write the results as CSV to this path.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct LengthInput {
    /// Comma-separated side lengths: all integers (exact) or all decimals (float).
    #[arg(long, allow_hyphen_values = true)]
    lengths: Option<String>,

    /// All sides equal to one.
    #[arg(long, value_name = "N")]
    equilateral: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact short-subset profile, Betti numbers and Poincaré polynomial.
    Exact {
        #[command(flatten)]
        input: LengthInput,
        #[arg(long, default_value = "planar")]
        kind: Kind,
        /// Largest n accepted for enumeration.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Monte Carlo estimates: a short-subset profile for given lengths, or the
    /// normalized mean Poincaré value for a random model.
    Mc {
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["equilateral", "model"])]
        lengths: Option<String>,
        #[arg(long, conflicts_with = "model")]
        equilateral: Option<usize>,
        #[arg(long, requires_all = ["n", "t"])]
        model: Option<RandomModel>,
        #[arg(long, default_value = "planar")]
        kind: Kind,
        #[arg(long, default_value_t = 100_000)]
        perms: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The stopping time: its values for given lengths, or sample statistics
    /// of the normalized stopping time under a random model.
    TauStats {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "model")]
        lengths: Option<String>,
        #[arg(long, requires = "n")]
        model: Option<RandomModel>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 5000)]
        samples: u64,
        /// Swap the longest side into the last slot before each draw.
        #[arg(long)]
        tilde: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment described by a config file.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// The limiting constant C(alpha) for a side-length law.
    Calpha {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value = "uniform:0,1")]
        model: RandomModel,
    },
    /// Closed-form values for equal side lengths (odd n).
    Equilateral {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "planar")]
        kind: Kind,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidLengths(_) | Error::InvalidModel(_) | Error::Parse(_) => EXIT_PARSE,
        Error::ConfigInvalid(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::NonGeneric => EXIT_NON_GENERIC,
        Error::ToleranceAmbiguous { .. } => EXIT_AMBIGUOUS,
        Error::EvenN(_) => EXIT_EVEN_N,
        Error::TNonpositive(_) => EXIT_T_NONPOSITIVE,
        Error::DivisionRemainder(_) | Error::Inconsistent(_) | Error::Json(_) => EXIT_INTERNAL,
    }
}

/// Integers give an exact vector, decimals a float one; mixing is an error.
pub fn parse_lengths(text: &str) -> polybetti::Result<LengthVector> {
    let tokens: Vec<&str> = text.split(',').map(str::trim).collect();
    let is_decimal = |s: &str| s.contains(['.', 'e', 'E']);
    let decimals = tokens.iter().filter(|s| is_decimal(s)).count();
    if decimals == 0 {
        let v = tokens
            .iter()
            .map(|s| s.parse::<i64>().map_err(|e| Error::Parse(format!("length `{s}`: {e}"))))
            .collect::<polybetti::Result<Vec<_>>>()?;
        LengthVector::exact(v)
    } else if decimals == tokens.len() {
        let v = tokens
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("length `{s}`: {e}"))))
            .collect::<polybetti::Result<Vec<_>>>()?;
        LengthVector::float(v)
    } else {
        Err(Error::Parse("lengths mix integers and decimals; use one form throughout".into()))
    }
}

fn length_input(lengths: Option<&str>, equilateral: Option<usize>) -> polybetti::Result<Option<LengthVector>> {
    match (lengths, equilateral) {
        (Some(text), None) => parse_lengths(text).map(Some),
        (None, Some(n)) => LengthVector::equilateral(n).map(Some),
        (None, None) => Ok(None),
        (Some(_), Some(_)) => Err(Error::Parse("give either --lengths or --equilateral".into())),
    }
}

fn run(cli: &Cli, invocation: Vec<String>) -> polybetti::Result<(Report, bool)> {
    let mut report = Report::new(invocation);
    let ok = match &cli.command {
        Command::Exact { input, kind, cap } => {
            let l = length_input(input.lengths.as_deref(), input.equilateral)?.expect("clap enforces one input");
            let e = match cap {
                Some(c) => Enumerator::with_cap(*c)?,
                None => Enumerator::default(),
            };
            report.exact = Some(report::exact_report(&l, *kind, &e)?);
            true
        }
        Command::Mc { lengths, equilateral, model, kind, perms, samples, n, t, seed } => {
            report.seed = Some(*seed);
            let mc = MonteCarlo::new(*seed);
            if let Some(l) = length_input(lengths.as_deref(), *equilateral)? {
                let prefix = if *kind == Kind::Planar { "a" } else { "a_hat" };
                for (p, est) in mc.short_profile(&l, *kind, *perms)?.into_iter().enumerate() {
                    report.rows.push(Row::estimate(&format!("{prefix}_{p}"), Some(p), &est));
                }
            } else if let Some(model) = model {
                let (n, t) = (n.expect("clap requires n"), t.expect("clap requires t"));
                let est = mc.mean_poincare(model, n, t, *samples, *kind)?;
                report.rows.push(Row::estimate("normalized_mean_poincare", Some(n), &est.normalized));
                report.rows.push(Row::value("log_normalizer", Some(n), est.log_normalizer));
            } else {
                return Err(Error::Parse("mc needs --lengths, --equilateral or --model".into()));
            }
            true
        }
        Command::TauStats { lengths, model, n, samples, tilde, seed } => {
            if let Some(text) = lengths {
                let l = parse_lengths(text)?;
                let id: Vec<usize> = (0..l.n() - 1).collect();
                report.rows.push(Row::value("tau", None, tau(&l, &id)? as f64));
                report.rows.push(Row::value("tau_tilde", None, tau_tilde(&l) as f64));
            } else if let Some(model) = model {
                report.seed = Some(*seed);
                let n = n.expect("clap requires n");
                let taus = MonteCarlo::new(*seed).tau_samples(model, n, *samples, *tilde)?;
                let root = (n as f64).sqrt();
                let z: Vec<f64> = taus.iter().map(|&t| (t as f64 - n as f64 / 2.0) / root).collect();
                let sd = model.sigma_tau();
                report.rows.push(Row::value("mean_normalized", Some(n), mean(&z)));
                report.rows.push(Row::value("variance_normalized", Some(n), variance(&z)));
                report.rows.push(Row::value("sigma_tau_sq", Some(n), sd * sd));
                report.rows.push(Row::value("ks_distance", Some(n), ks_normal(&z, sd)));
            } else {
                return Err(Error::Parse("tau-stats needs --lengths or --model".into()));
            }
            true
        }
        Command::Verify { config } => {
            let cfg = ExperimentConfig::from_file(config)?;
            let result = run_experiment(&cfg)?;
            let json_path = cfg.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.json", cfg.experiment)));
            let csv_path = cli.csv.clone().unwrap_or_else(|| json_path.with_extension("csv"));
            report::write_experiment(&result, &report.invocation, &json_path, &csv_path)?;
            report.seed = Some(result.seed);
            let pass = result.pass;
            report.experiment = Some(result);
            report.pass = pass;
            report.written = vec![json_path, csv_path];
            pass
        }
        Command::Calpha { alpha, model } => {
            report.rows.push(Row::value("c_alpha", None, compute_c_alpha(*alpha, model)?));
            true
        }
        Command::Equilateral { n, kind } => {
            report.equilateral = Some(report::equilateral_report(*n, *kind)?);
            true
        }
    };
    if let (Some(path), false) = (&cli.csv, matches!(cli.command, Command::Verify { .. })) {
        report.write_csv(path)?;
    }
    Ok((report, ok))
}

fn main() -> ExitCode {
    let invocation: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    }
    match run(&cli, invocation) {
        Ok((report, ok)) => {
            let emitted = if cli.json { report.emit(Emit::Json) } else { report.emit(Emit::Table) };
            if let Err(e) = emitted {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_IO);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECKS_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use polybetti::Arithmetic;

    #[test]
    fn length_modes() {
        assert_eq!(parse_lengths("1, 1,1,2").unwrap().mode(), Arithmetic::Exact);
        assert_eq!(parse_lengths("1.0,1.5,2.25").unwrap().mode(), Arithmetic::Float);
        assert!(matches!(parse_lengths("1,1.5,2"), Err(Error::Parse(_))));
        assert!(matches!(parse_lengths("1,x,2"), Err(Error::Parse(_))));
        assert!(matches!(parse_lengths("1,0,2"), Err(Error::InvalidLengths(_))));
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&Error::NonGeneric), EXIT_NON_GENERIC);
        assert_eq!(exit_code(&Error::CapExceeded { n: 40, cap: 30 }), EXIT_CAP);
        assert_eq!(exit_code(&Error::EvenN(6)), EXIT_EVEN_N);
        assert_eq!(exit_code(&Error::TNonpositive(0.0)), EXIT_T_NONPOSITIVE);
        assert_eq!(exit_code(&Error::ConfigInvalid(String::new())), EXIT_CONFIG);
    }
}
