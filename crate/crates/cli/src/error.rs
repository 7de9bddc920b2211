use lpn_qrng::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lpn_qrng::Error),

    #[error("more than one input mode given: {0}")]
    AmbiguousInput(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("cannot read config `{path}`: {source}")]
    ConfigIo {
        path: String,
        source: std::io::Error,
    },

    #[error("invalid config `{path}`: {reason}")]
    InvalidConfig { path: String, reason: String },

    #[error("all {0} sweep points failed")]
    AllPointsFailed(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::AmbiguousInput(_) => "ambiguous-input",
            CliError::MissingInput(_) => "missing-input",
            CliError::ConfigIo { .. } => "config-io",
            CliError::InvalidConfig { .. } => "invalid-config",
            CliError::AllPointsFailed(_) => "all-points-failed",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Core(e) => e.class(),
            CliError::AmbiguousInput(_)
            | CliError::MissingInput(_)
            | CliError::InvalidConfig { .. } => ErrorClass::Validation,
            CliError::ConfigIo { .. } | CliError::Io(_) | CliError::Json(_) => ErrorClass::Io,
            CliError::AllPointsFailed(_) => ErrorClass::Domain,
        }
    }

    /// Process exit status: 2 validation, 3 I/O, 4 domain.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Validation => 2,
            ErrorClass::Io => 3,
            ErrorClass::Domain => 4,
        }
    }

    /// One-line JSON reason for stderr.
    pub fn to_line(&self) -> String {
        let class = match self.class() {
            ErrorClass::Validation => "validation",
            ErrorClass::Io => "io",
            ErrorClass::Domain => "domain",
        };
        serde_json::json!({
            "error": self.kind(),
            "class": class,
            "message": self.to_string(),
        })
        .to_string()
    }
}
