//! Command implementations behind the `hamsym` binary: job resolution,
//! classification and theorem-verification reports, trajectory CSV output and
//! the exit-code contract (0 pass, 1 verdict fail, 2 input error, 3 runtime
//! or domain error).

pub mod job;
pub mod report;

mod classify;
mod integrate;
mod verify;

pub use classify::cmd_classify;
pub use integrate::cmd_integrate;
pub use verify::cmd_verify;

use thiserror::Error;

/// Command failure with its exit code.
#[derive(Debug, Error)]
pub enum CmdError {
    /// Exit code 2: unparseable input, wrong geometry, missing arguments.
    #[error("{0}")]
    Input(String),
    /// Exit code 3: runtime or domain failure while computing.
    #[error("{0}")]
    Runtime(String),
    /// Exit code 3 with partial output already produced (a truncated
    /// trajectory's CSV still goes to stdout).
    #[error("{message}")]
    RuntimeWithOutput { output: String, message: String },
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Input(_) => 2,
            CmdError::Runtime(_) | CmdError::RuntimeWithOutput { .. } => 3,
        }
    }

    /// Output that should still reach stdout despite the failure.
    pub fn partial_output(&self) -> Option<&str> {
        match self {
            CmdError::RuntimeWithOutput { output, .. } => Some(output),
            _ => None,
        }
    }
}

/// Successful command outcome: rendered output plus the verdict that decides
/// between exit codes 0 and 1.
#[derive(Debug)]
pub struct Outcome {
    pub pass: bool,
    pub output: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub(crate) fn runtime_err(err: impl std::fmt::Display) -> CmdError {
    CmdError::Runtime(err.to_string())
}

pub(crate) fn input_err(err: impl std::fmt::Display) -> CmdError {
    CmdError::Input(err.to_string())
}
