use clap::{Parser, ValueEnum};
use neutrix_opt::commands::{run_command, RunOptions};
use neutrix_opt::problem::{load_problem, parse_problem, COMMANDS};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const INPUT_ERROR: u8 = 4;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Limits, neutrix derivatives and near-optimality over external numbers.
///
/// Exit status: 0 certified or computed, 2 not certified, hypotheses unmet
/// or failed, 3 undecided, 4 input error.
#[derive(Parser, Debug)]
#[command(name = "neutrix-opt", version)]
struct Cli {
    /// eval, limit, derive, optimize, fermat, implicit, lagrange or selftest
    command: String,
    /// Problem file (TOML); optional for `selftest`.
    problem: Option<PathBuf>,
    /// Numerical value of ε used by the probe oracle.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Decimal digits of oracle working precision.
    #[arg(long)]
    precision: Option<usize>,
    /// Exponent guard band of the oracle classifier.
    #[arg(long = "guard-band")]
    guard_band: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Print every monotonicity shrink step and side condition.
    #[arg(long)]
    audit: bool,
    /// Seed for oracle draws and self-test generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include wall-clock timing in the report.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !COMMANDS.contains(&cli.command.as_str()) {
        eprintln!("error: unknown command `{}` (expected one of {})", cli.command, COMMANDS.join(", "));
        return ExitCode::from(INPUT_ERROR);
    }
    let loaded = match &cli.problem {
        Some(path) => load_problem(path).map_err(|e| format!("{}: {e}", path.display())),
        None if cli.command == "selftest" => parse_problem("").map_err(|e| e.to_string()),
        None => Err(format!("`{}` needs a problem file", cli.command)),
    };
    let mut problem = match loaded {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };
    if let Some(c) = &problem.command {
        if *c != cli.command {
            eprintln!("error: problem file is for `{c}`, not `{}`", cli.command);
            return ExitCode::from(INPUT_ERROR);
        }
    }
    if let Some(e) = cli.epsilon {
        problem.oracle.epsilon = e;
    }
    if let Some(d) = cli.precision {
        problem.oracle.digits = d;
    }
    if let Some(g) = cli.guard_band {
        problem.oracle.guard_band = g;
    }
    problem.oracle.seed = cli.seed;
    let opts = RunOptions {
        audit: cli.audit,
        seed: cli.seed,
    };
    let start = Instant::now();
    let mut report = match run_command(&cli.command, &problem, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    match cli.format {
        Format::Text => print!("{}", report.render_text()),
        Format::Json => print!("{}", report.render_json()),
    }
    ExitCode::from(report.exit_code() as u8)
}
