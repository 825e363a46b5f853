//! Batch front end for the networked SIR toolkit: scenario ingestion,
//! pipeline orchestration, and CSV/JSON artifact output.

pub mod config;
pub mod csvio;
pub mod pipeline;

/// Command outcomes map to process exit codes: validation problems
/// (structure, parameters, assumption violations) exit 1, runtime
/// failures (I/O and the like) exit 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(anyhow::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Runtime(err) => write!(f, "{err}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
