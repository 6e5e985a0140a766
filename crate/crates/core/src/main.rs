use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lagrange_ops::cli::{load_problem, run, Command, Flags, EXIT_INPUT_ERROR};

/// Verify factorization identities and solution constructions for
/// first-order totally linear PDEs.
#[derive(Debug, Parser)]
#[command(name = "lagrange-ops", version)]
struct Args {
    /// verify-kernel, verify-solution, factor, build-general, cross-ratio,
    /// eigen-shift, independence, characteristics or all
    command: String,
    #[arg(long)]
    problem: PathBuf,
    /// Emit one JSON record per check instead of text blocks.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Kernel element: a declared name or an expression.
    #[arg(long)]
    eta: Option<String>,
    /// Candidate solution: a declared name or an expression.
    #[arg(long)]
    candidate: Option<String>,
    /// Template: a declared name or an expression over u1, u2, ...
    #[arg(long)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT_ERROR as u8) } else { ExitCode::SUCCESS };
        }
    };
    let input = args.command.parse::<Command>().and_then(|cmd| Ok((cmd, load_problem(&args.problem)?)));
    let (command, spec) = match input {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT_ERROR as u8);
        }
    };
    let flags = Flags {
        tol: args.tol,
        samples: args.samples,
        seed: args.seed,
        eta: args.eta,
        candidate: args.candidate,
        f: args.f,
        lambda: args.lambda,
        alpha: args.alpha,
        k: args.k,
    };
    match run(command, &spec, &flags) {
        Ok(outcome) => {
            if args.json {
                print!("{}", outcome.json_lines());
            } else {
                print!("{}", outcome.text());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}
