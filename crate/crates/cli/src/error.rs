use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ARGS: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const EXPECTATION: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: rrmcv_core::Error,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Expectation(String),
}

impl CliError {
    pub fn core(context: impl Into<String>, source: rrmcv_core::Error) -> Self {
        CliError::Core { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use rrmcv_core::Error as E;
        match self {
            CliError::Args(_) | CliError::Parse { .. } | CliError::Schema(_) | CliError::Io(_) => exit::ARGS,
            CliError::Core { source, .. } => match source {
                E::InvalidArgument(_) | E::Infeasible(_) => exit::ARGS,
                E::NonConvergence { .. } | E::Singular | E::DegenerateData(_) | E::Overflow { .. } => {
                    exit::NUMERIC
                }
            },
            CliError::Expectation(_) => exit::EXPECTATION,
        }
    }
}
