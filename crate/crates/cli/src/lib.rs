//! Front end for `rnml-core`: CSV datasets in, model JSON and sweep CSVs out.

use std::io;
use std::path::{Path, PathBuf};

pub mod args;
pub mod commands;
pub mod formats;
pub mod repro;

pub use args::Cli;
pub use commands::run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("CSV line {line}: {message}")]
    CsvParse { line: u64, message: String },
    #[error("model file: {0}")]
    ModelParse(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("expected exactly two distinct labels, found {0}")]
    NotTwoClasses(usize),
    #[error(
        "Gram matrix is not positive definite (pivot {pivot_index}); \
         rerun with a small ridge such as --lambda 1e-8"
    )]
    NotPositiveDefinite { pivot_index: usize },
    #[error(transparent)]
    Core(rnml_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 invalid configuration, 3 numerical failure, 4 I/O or unreadable input.
    pub fn exit_code(&self) -> i32 {
        use rnml_core::Error as E;
        match self {
            CliError::InvalidConfig(_) | CliError::NotTwoClasses(_) => 2,
            CliError::NotPositiveDefinite { .. } => 3,
            CliError::Io { .. } | CliError::CsvParse { .. } | CliError::ModelParse(_) => 4,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(E::InvalidDataset(_) | E::InvalidModel(_)) => 4,
            CliError::Core(_) => 2,
        }
    }
}

impl From<rnml_core::Error> for CliError {
    fn from(e: rnml_core::Error) -> Self {
        match e {
            rnml_core::Error::NotPositiveDefinite { pivot_index } => {
                CliError::NotPositiveDefinite { pivot_index }
            }
            rnml_core::Error::InvalidModel(m) => CliError::ModelParse(m),
            other => CliError::Core(other),
        }
    }
}
