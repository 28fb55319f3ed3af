use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gelfand_cetlin::flagcombi::FlagType;
use gelfand_cetlin::rational::{parse_rational_list, Q};
use gelfand_cetlin::Error;
use serde_json::Value;

mod commands;
mod verify;

#[derive(Parser, Debug)]
#[command(name = "gc", version, about = "Gelfand-Cetlin polytopes, degenerations and potential functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Facets, vertices, lattice points, volume and reflexivity of Δ_λ.
    Polytope {
        #[command(flatten)]
        target: Target,
        /// Write the lattice points as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Critical points of the potential function at a fixed T.
    Critical {
        #[command(flatten)]
        target: Target,
        #[arg(long = "T", default_value = "e-1", value_parser = parse_t)]
        t: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Laurent form of the potential function.
    Potential {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        out: Output,
    },
    /// Property suites with a pass/fail summary.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Largest n for suites that sweep flag types.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Restrict flag-specific suites to one flag type.
        #[arg(long)]
        flag: Option<String>,
        /// Relation checked along the degeneration family, e.g.
        /// "t Z[1,2]Z[3,4] - Z[1,3]Z[2,4] + Z[1,4]Z[2,3]".
        #[arg(long)]
        relation: Option<String>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Toda-lattice checks for a full flag: phase function, D_i level set.
    Toda {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
struct Target {
    /// Flag type as steps and n, e.g. "1,2|3" or "2|4".
    #[arg(long)]
    flag: String,
    /// Comma-separated rationals, weakly decreasing.
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
}

#[derive(Args, Debug)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Polytope,
    Refinement,
    Gcsystem,
    Degeneration,
    Toda,
}

/// Failure of a run, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidFlag(_)
            | Error::InvalidLambda(_)
            | Error::InvalidIndexSet(_)
            | Error::DimensionMismatch { .. }
            | Error::NonIntegral(_)
            | Error::MalformedRelation(_)
            | Error::OutOfRange(_)
            | Error::PartialFlag
            | Error::Interlacing { .. } => Failure::Input(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

/// Accepts decimals and `e-k` for `e^{−k}`.
fn parse_t(s: &str) -> Result<f64, String> {
    let t = match s.trim().parse::<f64>() {
        Ok(t) => t,
        Err(_) => match s.trim().strip_prefix("e-").map(str::parse::<f64>) {
            Some(Ok(k)) => (-k).exp(),
            _ => return Err(format!("cannot read T from {s:?}")),
        },
    };
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(format!("T = {t} is not in (0,1)"))
    }
}

impl Target {
    fn parse(&self) -> Result<(FlagType, Vec<Q>), Failure> {
        let flag: FlagType = self.flag.parse()?;
        let lambda = parse_rational_list(&self.lambda)?;
        Ok((flag, lambda))
    }
}

fn emit(doc: &Value, out: &Output) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Internal(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Polytope { target, csv, out } => {
            let (flag, lambda) = target.parse()?;
            let (doc, points) = commands::polytope(&flag, &lambda)?;
            if let Some(path) = csv {
                commands::write_lattice_csv(&path, &points)?;
            }
            emit(&doc, &out)?;
            Ok(true)
        }
        Command::Critical { target, t, out } => {
            let (flag, lambda) = target.parse()?;
            emit(&commands::critical(&flag, &lambda, t)?, &out)?;
            Ok(true)
        }
        Command::Potential { target, out } => {
            let (flag, lambda) = target.parse()?;
            emit(&commands::potential(&flag, &lambda)?, &out)?;
            Ok(true)
        }
        Command::Verify { suite, n, flag, relation, samples, seed, out } => {
            let flag = flag.map(|f| f.parse::<FlagType>()).transpose()?;
            if relation.is_some() && flag.is_none() {
                return Err(Failure::Input("--relation needs --flag".into()));
            }
            let cfg = verify::Config { n, flag, relation, samples, seed };
            let (doc, pass) = verify::run(suite, &cfg)?;
            emit(&doc, &out)?;
            Ok(pass)
        }
        Command::Toda { lambda, samples, seed, out } => {
            emit(&commands::toda(&lambda, samples, seed)?, &out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
