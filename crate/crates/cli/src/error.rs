use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Model(#[from] redundancy_core::Error),

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 2 for instability or degeneracy of the model, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if e.is_domain_error() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
