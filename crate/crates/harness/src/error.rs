use std::path::PathBuf;

/// Failure category, reported on stderr and as the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Io,
    Numerical,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 3,
            Category::Io => 4,
            Category::Numerical => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Io => "io",
            Category::Numerical => "numerical",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] dbs_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{failed} of {total} runs failed; first failure: {first}")]
    RunsFailed { failed: usize, total: usize, first: String },
}

impl HarnessError {
    pub fn category(&self) -> Category {
        match self {
            HarnessError::Parse { .. } | HarnessError::UnknownKey { .. } | HarnessError::Invalid(_) => Category::Config,
            HarnessError::Core(e) => match e {
                dbs_core::Error::Config(_)
                | dbs_core::Error::UnknownProblem(_)
                | dbs_core::Error::Shape { .. }
                | dbs_core::Error::Domain(_) => Category::Config,
                _ => Category::Numerical,
            },
            HarnessError::Io { .. } | HarnessError::Csv(_) => Category::Io,
            HarnessError::RunsFailed { .. } => Category::Numerical,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
