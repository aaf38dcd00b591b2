use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error: validate_supersonic rejected the base flow: {source}")]
    Subsonic { source: shearflow::Error },

    #[error("case eps = {eps} failed during {stage}: {source}")]
    Case { eps: f64, stage: &'static str, source: shearflow::Error },

    #[error("slope fit failed: {0}")]
    Fit(#[from] crate::fit::FitError),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Subsonic { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
