//! `heightlab`: canonical heights, Green's functions and the lemma checks
//! from the command line.
//!
//! Exit codes: 0 pass, 1 assertion failure, 2 usage or parse error,
//! 3 resource cap or undecided computation.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heightlab::Error;

use commands::{Experiment, Method, Outcome};
use config::{Config, Format};

#[derive(Parser, Debug)]
#[command(name = "heightlab", version, about = "Canonical heights of polynomial maps over the rationals")]
struct Cli {
    /// Significand bits of floating-point work (only 53 is available).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Iteration cap for both archimedean and p-adic orbits.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Largest accepted polynomial degree.
    #[arg(long, global = true)]
    degree_cap: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Replaces the spec's RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rewrite recorded fixtures instead of comparing against them.
    #[arg(long, global = true)]
    fixtures_regen: bool,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Polynomial as "d;c1,...,c_{d-1}" in critical-point normal form, in
    /// place of the coefficient list.
    #[arg(long, global = true)]
    normal_form: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical height of ALPHA. POLY is comma-separated coefficients,
    /// lowest degree first, e.g. "1/5,0,3" for 3z^2 + 1/5. With
    /// --normal-form, POLY is left out and the remaining arguments shift.
    Height {
        #[arg(allow_hyphen_values = true, value_name = "POLY")]
        first: String,
        /// ALPHA, or METHOD when --normal-form gives the polynomial.
        #[arg(allow_hyphen_values = true, value_name = "ALPHA")]
        second: Option<String>,
        /// local, naive or both (default).
        #[arg(value_name = "METHOD")]
        third: Option<String>,
    },
    /// Local Green's function at a place ("inf" or a prime).
    Green {
        #[arg(allow_hyphen_values = true, value_name = "POLY")]
        first: String,
        #[arg(allow_hyphen_values = true, value_name = "Z")]
        second: String,
        #[arg(value_name = "PLACE")]
        third: Option<String>,
    },
    /// Affine conjugation to critical-point normal form.
    NormalForm {
        #[arg(allow_hyphen_values = true)]
        poly: Option<String>,
    },
    /// Places of bad reduction.
    BadPlaces {
        #[arg(allow_hyphen_values = true)]
        poly: Option<String>,
    },
    /// Run one lemma check; exit 0 iff it passes.
    Verify {
        lemma_id: String,
        /// JSON or TOML spec; defaults when omitted.
        spec_file: Option<PathBuf>,
    },
    /// Run an experiment and write `<id>.json` and `<id>.csv` to OUT_DIR.
    Experiment {
        #[arg(value_enum)]
        which: Experiment,
        spec_file: PathBuf,
        out_dir: PathBuf,
    },
    /// Recompute the recorded runs and compare them with their fixtures.
    Fixtures,
    /// Print the effective configuration as TOML.
    Config,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Domain(_) | Error::Unsupported(_) | Error::Io(_) => 2,
        Error::Resource(_) | Error::Undecided(_) | Error::Numeric { .. } | Error::Factorization { .. } => 3,
    }
}

/// Defaults, then `HEIGHTLAB_CONFIG`, then flags.
fn configure(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = Config::from_env().map_err(Failure::Usage)?;
    if let Some(p) = cli.precision {
        cfg.precision = p;
    }
    if let Some(n) = cli.max_iter {
        cfg.caps.arch = n;
        cfg.caps.padic = n;
    }
    if let Some(n) = cli.degree_cap {
        cfg.degree_cap = n;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(s) = cli.seed {
        cfg.rng_seed = Some(s);
    }
    cfg.fixtures_regen |= cli.fixtures_regen;
    cfg.validate().map_err(Failure::Usage)?;
    Ok(cfg)
}

/// Splits `[POLY] rest...` depending on whether `--normal-form` supplies the
/// polynomial.
fn split_poly<'a>(args: &'a [String], cli: &Cli, rest: usize) -> Result<(Option<&'a str>, &'a [String]), Failure> {
    let with_poly = cli.normal_form.is_none();
    let need = rest + usize::from(with_poly);
    if args.len() < need {
        return Err(Failure::Usage(format!("expected {need} positional arguments, got {}", args.len())));
    }
    if with_poly {
        Ok((Some(args[0].as_str()), &args[1..]))
    } else {
        Ok((None, args))
    }
}

fn positional<const N: usize>(args: [Option<&String>; N]) -> Vec<String> {
    args.into_iter().flatten().cloned().collect()
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let cfg = configure(&cli)?;
    let nf = cli.normal_form.as_deref();
    let outcome: Outcome = match &cli.command {
        Command::Height { first, second, third } => {
            let args = positional([Some(first), second.as_ref(), third.as_ref()]);
            let (poly, rest) = split_poly(&args, &cli, 1)?;
            if rest.len() > 2 {
                return Err(Failure::Usage("too many arguments".into()));
            }
            let method = match rest.get(1) {
                None => Method::Both,
                Some(m) => <Method as clap::ValueEnum>::from_str(m, true)
                    .map_err(|_| Failure::Usage(format!("unknown method {m:?}; expected local, naive or both")))?,
            };
            let phi = commands::read_poly(poly, nf, &cfg)?;
            commands::height(&phi, &rest[0], method, &cfg)?
        }
        Command::Green { first, second, third } => {
            let args = positional([Some(first), Some(second), third.as_ref()]);
            let (poly, rest) = split_poly(&args, &cli, 2)?;
            if rest.len() != 2 {
                return Err(Failure::Usage("expected Z and PLACE".into()));
            }
            let phi = commands::read_poly(poly, nf, &cfg)?;
            commands::green(&phi, &rest[0], &rest[1], &cfg)?
        }
        Command::NormalForm { poly } => commands::normal_form(&commands::read_poly(poly.as_deref(), nf, &cfg)?, &cfg)?,
        Command::BadPlaces { poly } => {
            commands::bad_places_cmd(&commands::read_poly(poly.as_deref(), nf, &cfg)?, &cfg)?
        }
        Command::Verify { lemma_id, spec_file } => {
            if !heightlab::harness::LEMMA_IDS.contains(&lemma_id.as_str()) {
                return Err(Failure::Usage(format!(
                    "unknown lemma id {lemma_id:?}; expected one of {}",
                    heightlab::harness::LEMMA_IDS.join(", ")
                )));
            }
            let spec = cfg.apply(commands::load_spec(spec_file.as_deref())?, cli.max_iter.is_some());
            commands::verify(lemma_id, &spec, &cfg)?
        }
        Command::Experiment { which, spec_file, out_dir } => {
            let spec = cfg.apply(commands::load_spec(Some(spec_file))?, cli.max_iter.is_some());
            commands::experiment(*which, &spec, out_dir, &cfg)?
        }
        Command::Fixtures => commands::fixtures_cmd(&cfg)?,
        Command::Config => Outcome { text: cfg.to_toml().map_err(Failure::Usage)?, pass: true },
    };
    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|e| Failure::Core(e.into()))?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome.pass)
}
