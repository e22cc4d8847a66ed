use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(#[from] chiral_qed::Error),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed file {path}: {message}")]
    Format { path: String, message: String },
}

impl CliError {
    pub fn config(field: impl AsRef<str>, reason: impl AsRef<str>) -> Self {
        CliError::Config(format!("field `{}`: {}", field.as_ref(), reason.as_ref()))
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// 2 for anything wrong with the input configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
