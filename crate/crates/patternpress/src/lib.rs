//! Experiment and tooling layer for pattern compression: seeded samplers,
//! a Monte Carlo redundancy laboratory, the small-`n` maximum-probability
//! search, text/binary file formats, and the `patternpress` CLI.
//!
//! The probability models, bounds, and the range coder live in
//! [`patternpress_core`]; this crate adds everything that needs an RNG, a
//! thread pool, or a filesystem.

pub mod cli;
pub mod io;
pub mod lab;
pub mod pml;
pub mod report;
pub mod samplers;
pub mod verify;

use patternpress_core::coder::CoderError;
use patternpress_core::estimators::ParamError;
use patternpress_core::oracle::OracleError;
use patternpress_core::pattern::PatternError;
use patternpress_core::redundancy::RedundancyError;

/// Default seed for randomized subcommands.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Unified error type for the tooling layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Coder(#[from] CoderError),
    #[error(transparent)]
    Redundancy(#[from] RedundancyError),
    #[error("invalid source spec '{0}'")]
    SourceSpec(String),
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("{0}")]
    Guard(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            _ => 1,
        }
    }
}
