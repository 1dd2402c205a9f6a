use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure in {module}: {source}")]
    Numeric {
        module: &'static str,
        #[source]
        source: perceptronium::Error,
    },
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric { .. } | CliError::Mismatch(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Tags a core error with the module that raised it.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> CliResult<T>;
}

impl<T> InModule<T> for perceptronium::Result<T> {
    fn in_module(self, module: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Numeric { module, source })
    }
}
