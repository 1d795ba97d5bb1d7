//! Command-line front end: emit fixtures, run pipeline stages, write reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harmdom::{emit_fixture, run_stage, Error, PipelineConfig, Stage};

const EXIT_FAILURE: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser)]
#[command(name = "harmdom", version, about = "Harmonic maps, conical surfaces and domination certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy and report the solver outcome.
    Solve(RunArgs),
    /// Build the conical surface and run the curvature and Lipschitz checks.
    Certify(RunArgs),
    /// Classify degeneracy and run the perturbation path.
    Desing(RunArgs),
    /// Run the link-polygon rigidity test.
    Rigidity(RunArgs),
    /// Run every stage.
    Pipeline(RunArgs),
    /// Print a shipped fixture config.
    Fixture {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Seed for the solver and the pair sampler.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Number of sampled pairs in the Lipschitz checks.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::InvalidGenus(_)
            | Error::RelatorCheck(_)
            | Error::UnknownFixture(_)
            | Error::NotALengthFunction { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            _ => EXIT_FAILURE,
        }
    }
}

fn load(args: &RunArgs) -> Result<PipelineConfig, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = PipelineConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        config.solver.seed = seed;
        config.sampling.seed = seed;
    }
    if let Some(tol) = args.tol {
        config.solver.tol = tol;
    }
    if let Some(n) = args.max_iter {
        config.solver.max_iter = n;
    }
    if let Some(n) = args.samples {
        config.sampling.pairs = n;
    }
    config.solver.validate()?;
    Ok(config)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, format!("{text}\n")).map_err(|source| CliError::Write { path: path.into(), source })
        }
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            // a closed pipe (`| head`) is not a failure of the run
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(CliError::Write { path: PathBuf::from("<stdout>"), source: e })
            }
            _ => Ok(()),
        },
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (args, stage) = match cli.command {
        Command::Fixture { name, out } => {
            let config = emit_fixture(&name)?;
            emit(&config.to_json(), out.as_deref())?;
            return Ok(0);
        }
        Command::Solve(a) => (a, Stage::Solve),
        Command::Certify(a) => (a, Stage::Certify),
        Command::Desing(a) => (a, Stage::Desing),
        Command::Rigidity(a) => (a, Stage::Rigidity),
        Command::Pipeline(a) => (a, Stage::Full),
    };
    let config = load(&args)?;
    let report = run_stage(&config, stage)?;
    let out = args.out.clone().or_else(|| config.output.as_ref().map(PathBuf::from));
    emit(&report.to_json(), out.as_deref())?;
    Ok(if report.diverged() { EXIT_DIVERGED } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INVALID);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("harmdom: {e}");
            ExitCode::from(e.code())
        }
    }
}
