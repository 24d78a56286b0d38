use std::io;

use droplet::DropletError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Numerical(#[from] DropletError),

    #[error("i/o: {0}")]
    Io(#[from] io::Error),

    #[error("{failed} of {total} checks failed")]
    Property { failed: usize, total: usize },
}

impl CliError {
    /// 2 config, 3 numerical or i/o, 4 failed checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
            CliError::Property { .. } => 4,
        }
    }
}
