use std::path::PathBuf;

use thiserror::Error;

use crate::model::AttrRef;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: contextBlock is never closed with `end`")]
    UnclosedBlock { line: usize },

    #[error("invalid description or pattern `{0}`")]
    InvalidDescription(String),

    #[error("element `{0}` is already attached")]
    DuplicateElement(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("unknown handler `{0}`")]
    UnknownHandler(String),

    #[error("alias `{0}` matches no attached element")]
    UnresolvedAlias(String),

    #[error("alias `{alias}` is ambiguous: matches {}", .matches.join(", "))]
    AmbiguousAlias { alias: String, matches: Vec<String> },

    #[error("flow into {target} names source `{source_name}`, which resolves to no element")]
    UnresolvedSource { target: AttrRef, source_name: String },

    #[error("flow into {target} names source `{source_name}`, which matches several dependencies: {}", .matches.join(", "))]
    AmbiguousSource {
        target: AttrRef,
        source_name: String,
        matches: Vec<String>,
    },

    #[error("attribute {0} is not set")]
    MissingAttribute(AttrRef),

    #[error("no run-time argument `{0}` was supplied")]
    MissingArg(String),

    #[error("metadata flow cycle: {}", display_path(.path))]
    Cycle { path: Vec<AttrRef> },

    #[error("dependency cycle: {}", .path.join(" -> "))]
    DependencyCycle { path: Vec<String> },

    #[error("check failed on {target}: expected `{expected}`, found `{actual}`")]
    CheckFailed {
        target: AttrRef,
        expected: String,
        actual: String,
    },

    #[error("handler for task `{task}` on `{element}` failed: {cause}")]
    Handler {
        element: String,
        task: String,
        cause: String,
    },

    #[error("workflow is not fully reduced: {remaining} metadata flow(s) remain")]
    NotReduced { remaining: usize },

    #[error("`{command}` cannot emit `{target}`")]
    UnsupportedEmit { command: String, target: String },

    #[error("{count} metadata collision(s) detected in strict mode")]
    Collision { count: usize },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn display_path(path: &[AttrRef]) -> String {
    path.iter().map(ToString::to_string).collect::<Vec<_>>().join(" -> ")
}

impl Error {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Cycle { .. } | Error::DependencyCycle { .. } => 2,
            Error::Collision { .. } => 3,
            _ => 1,
        }
    }
}
