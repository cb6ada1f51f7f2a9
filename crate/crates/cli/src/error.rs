use std::fmt;

/// Failure at the command-line boundary, carrying a stable code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// The scenario file is not well-formed.
    Parse(String),
    /// A field violates a constraint. `field` is the dotted path.
    Validation { field: String, detail: String },
    /// A model, solver or integrator failure while running.
    Runtime { code: &'static str, detail: String },
    Io(String),
}

impl CliError {
    pub fn validation(field: impl Into<String>, detail: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub fn code(&self) -> &str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Validation { .. } => "ValidationError",
            CliError::Runtime { code, .. } => code,
            CliError::Io(_) => "IoError",
        }
    }

    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation { .. } => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(d) | CliError::Io(d) => write!(f, "{d}"),
            CliError::Validation { field, detail } => write!(f, "{field}: {detail}"),
            CliError::Runtime { detail, .. } => write!(f, "{detail}"),
        }
    }
}

impl std::error::Error for CliError {}

macro_rules! runtime_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Runtime { code: e.code(), detail: e.to_string() }
            }
        }
    )*};
}

runtime_from!(
    solvable_plane::exact::ExactError,
    solvable_plane::integrate::IntegrateError,
    solvable_plane::cxla::LinalgError,
    solvable_plane::classify::ClassifyError
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
