use axicone_cli::config::{ConfigSource, REFERENCE};
use axicone_cli::{analytic, solve, verify, CliError, Outcome};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Axisymmetric flow in cone sectors: inequality checks, simulation, audits and exact solutions.
///
/// Exit codes: 0 success, 1 check or convergence failure, 2 usage or configuration error.
/// The output directory can be overridden with the OUTPUT_DIR environment variable.
#[derive(Parser)]
#[command(name = "axicone", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// TOML configuration file.
    config: Option<PathBuf>,
    /// Built-in preset: inequalities, example, swirl, gamma1, analytic.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn resolve(self) -> ConfigSource {
        match (self.config, self.preset) {
            (Some(p), _) => ConfigSource::File(p),
            (None, Some(name)) => ConfigSource::Preset(name),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Poincaré, Hardy, curl-vs-gradient and H1-equivalence checks.
    VerifyInequalities(Source),
    /// March a simulation, write its outputs and audit it.
    Solve(Source),
    /// Re-audit a stored solve run.
    Diagnose {
        /// Output directory of a previous `solve`.
        run_dir: PathBuf,
    },
    /// Stationary swirl and cusp blow-up oracles.
    AnalyticTests(Source),
    /// Print the annotated reference configuration.
    Reference,
}

fn report(o: &Outcome) {
    for l in &o.lines {
        println!("{l}");
    }
    for w in &o.warnings {
        eprintln!("warning: {w}");
    }
    println!("{} ({})", if o.pass { "PASS" } else { "FAIL" }, o.output_dir.display());
}

fn run(cmd: Command) -> Result<Outcome, CliError> {
    let out = std::env::var_os("OUTPUT_DIR").map(PathBuf::from);
    let out = out.as_deref();
    Ok(match cmd {
        Command::VerifyInequalities(s) => verify::verify_inequalities(&s.resolve().load()?, out)?.outcome,
        Command::Solve(s) => solve::solve(&s.resolve().load()?, out)?.outcome,
        Command::Diagnose { run_dir } => solve::diagnose(&run_dir, out)?.0,
        Command::AnalyticTests(s) => analytic::analytic_tests(&s.resolve().load()?, out)?.outcome,
        Command::Reference => {
            print!("{REFERENCE}");
            std::process::exit(0);
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(o) => {
            report(&o);
            ExitCode::from(o.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(r) = solve::failure_ratios(&e) {
                eprintln!("contraction ratios per attempt: {r:?}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
