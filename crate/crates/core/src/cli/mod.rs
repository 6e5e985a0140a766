//! Batch interface: problem files in, verification reports out.

mod problem;
mod run;

pub use problem::{load_problem, parse_problem, InputError, Named, ProblemSpec, Settings, LAMBDA};
pub use run::{run, Command, Flags, RunOutcome, LOOSE_TOLERANCE, ORACLE_TOLERANCE};

/// Exit code for malformed input.
pub const EXIT_INPUT_ERROR: i32 = 2;
