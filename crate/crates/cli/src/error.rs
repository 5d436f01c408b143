//! Exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | any other failure (I/O, internal) |
//! | 2 | configuration or input error: bad flags, missing or malformed files, mismatched campaigns |
//! | 3 | evaluator failure during a campaign |

use std::fmt;

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_EVALUATOR: u8 = 3;

/// An error that carries its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub source: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

impl std::error::Error for Failure {}

pub fn config(e: impl Into<anyhow::Error>) -> anyhow::Error {
    Failure { code: EXIT_CONFIG, source: e.into() }.into()
}

pub fn evaluator(e: impl Into<anyhow::Error>) -> anyhow::Error {
    Failure { code: EXIT_EVALUATOR, source: e.into() }.into()
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    e.chain().find_map(|c| c.downcast_ref::<Failure>()).map_or(EXIT_OTHER, |f| f.code)
}

/// Maps optimizer errors onto exit codes.
pub fn optimize(e: fenopt::optimize::OptimizeError) -> anyhow::Error {
    use fenopt::optimize::OptimizeError;
    match e {
        OptimizeError::Evaluation(_) => evaluator(e),
        OptimizeError::Config(_) => config(e),
    }
}
