use thiserror::Error;

/// Runner failure, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("plan error: {0}")]
    Plan(String),
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("analysis error: {0}")]
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Plan(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Analysis(_) => 4,
        }
    }

    pub fn analysis(e: impl std::fmt::Display) -> Self {
        CliError::Analysis(e.to_string())
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Analysis(format!("{}: {e}", path.display()))
    }
}
