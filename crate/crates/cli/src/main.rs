use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use dyadlab::{output, run, Overrides, Suite};

#[derive(Parser)]
#[command(name = "dyadlab", version, about = "Dyadic shift commutator laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Nine-part decomposition identity and shift algebra
    VerifyAlgebra,
    /// The 25 tested operators against the commutator
    TestedOperators,
    /// Rectangular and Chang-Fefferman norms of a symbol
    Bmo,
    /// Lower bound constant by the rectangular norm
    TheoremBmor,
    /// Vanishing battery and the scale-skipping constant
    TheoremMainskip,
    /// Which lines survive in the adjoint frame
    Survivors,
    /// Horizontal equality and vertical witnesses
    Smallness,
    /// Tree and bi-tree matrix norms
    Schur,
    /// One-variable model: uncle function, averages, constant
    OneParam,
    /// Hill climbing on the norm ratio
    Extremal,
    /// Strip autocorrelation exponents
    Counterexample,
    /// Every suite in turn
    All,
}

impl Command {
    fn suites(self) -> Vec<Suite> {
        let one = match self {
            Command::VerifyAlgebra => Suite::VerifyAlgebra,
            Command::TestedOperators => Suite::TestedOperators,
            Command::Bmo => Suite::Bmo,
            Command::TheoremBmor => Suite::TheoremBmor,
            Command::TheoremMainskip => Suite::TheoremMainskip,
            Command::Survivors => Suite::Survivors,
            Command::Smallness => Suite::Smallness,
            Command::Schur => Suite::Schur,
            Command::OneParam => Suite::OneParam,
            Command::Extremal => Suite::Extremal,
            Command::Counterexample => Suite::Counterexample,
            Command::All => return Suite::ALL.to_vec(),
        };
        vec![one]
    }
}

const USAGE: u8 = 2;
const FAILED: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let mut first_failure = None;
    for suite in cli.command.suites() {
        let started = Instant::now();
        let rep = match run(suite, &cfg) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error in {}: {e:#}", suite.name());
                return ExitCode::from(USAGE);
            }
        };
        let written = match output::write(&rep, &cfg, &cfg.out) {
            Ok(w) => w,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(USAGE);
            }
        };
        for a in &rep.assertions {
            println!("{} {}: {} ({})", if a.passed { "PASS" } else { "FAIL" }, rep.suite, a.name, a.detail);
        }
        println!("{}: {} rows -> {} ({:.1}s)", rep.suite, rep.rows.len(), written.csv.display(), started.elapsed().as_secs_f64());
        if first_failure.is_none() {
            if let Some(a) = rep.first_failure() {
                first_failure = Some(format!("{}: {} (report {})", rep.suite, a.name, written.json.display()));
            }
        }
    }
    match first_failure {
        Some(f) => {
            eprintln!("assertion failed: {f}");
            ExitCode::from(FAILED)
        }
        None => ExitCode::SUCCESS,
    }
}
