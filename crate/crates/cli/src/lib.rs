//! Configuration-driven front end for `modular-dirichlet`.
//!
//! The binary is a thin wrapper: [`commands`] turns a resolved [`RunConfig`]
//! into the exact bytes that get written, so tests can drive it in-process.

pub mod commands;
pub mod config;

pub use commands::{run, Command, Format, Invocation};
pub use config::RunConfig;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] modular_dirichlet::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("usage error: {0}")]
    Usage(String),
}

impl CliError {
    /// 1 for malformed requests, 2 for numerical failures, 3 for capacity limits.
    pub fn exit_code(&self) -> i32 {
        use modular_dirichlet::Error as E;
        match self {
            CliError::Core(E::Numeric { .. } | E::Convergence { .. }) => 2,
            CliError::Core(E::Capacity { .. }) => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use modular_dirichlet::Error as E;
        match self {
            CliError::Core(E::Structural(_)) => "structural",
            CliError::Core(E::Argument(_)) => "argument",
            CliError::Core(E::Numeric { .. }) => "numeric",
            CliError::Core(E::Convergence { .. }) => "convergence",
            CliError::Core(E::Capability(_)) => "capability",
            CliError::Core(E::Capacity { .. }) => "capacity",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
        }
    }

    /// Single-line JSON written to stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            exit_code: i32,
            message: String,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Doc {
            error: Body {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: self.to_string(),
            },
        })
        .expect("plain strings serialize")
    }
}
