use std::path::{Path, PathBuf};

use latticeweave::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 2 config error, 3 invariant violation, 4 resource cap exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                CoreError::TooManyQubits { .. } | CoreError::SubsetCapExceeded { .. } => 4,
                CoreError::InvalidExtent { .. }
                | CoreError::Parse { .. }
                | CoreError::NonHalfInteger { .. }
                | CoreError::SameSpeciesDisplacement
                | CoreError::MeasurementBeforeCz { .. }
                | CoreError::InvalidRegion(_)
                | CoreError::NoTrajectories
                | CoreError::OutOfRange { .. } => 2,
                _ => 3,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::TooManyQubits { n: 30, cap: 22 }).exit_code(), 4);
        assert_eq!(CliError::from(CoreError::NotBipartite { mode: "columns", a: 0, b: 1 }).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::Parse { line: 1, message: "x".into() }).exit_code(), 2);
    }
}
