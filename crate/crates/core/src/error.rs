use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single validation failure with enough context to locate it.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub source: String,
    pub line: Option<usize>,
    pub message: String,
}

impl Issue {
    pub fn new(source: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            source: source.into(),
            line: None,
            message: message.into(),
        }
    }

    pub fn at_line(source: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Issue {
            source: source.into(),
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.source, line, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{} validation error(s):\n{}", .0.len(), render_issues(.0))]
    Validation(Vec<Issue>),

    #[error("data error: {0}")]
    Data(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("computation error: {0}")]
    Computation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(source: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation(vec![Issue::new(source, message)])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for bad input data, 3 for failures during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Data(_) | Error::Io { .. } => 2,
            Error::Domain(_) | Error::Computation(_) => 3,
        }
    }

    pub fn issues(&self) -> &[Issue] {
        match self {
            Error::Validation(issues) => issues,
            _ => &[],
        }
    }
}

fn render_issues(issues: &[Issue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}
