use std::fmt;

/// CLI failure, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input data: exit 2.
    Validation(String),
    /// A solver or quadrature did not converge: exit 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation failure: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<cusplab::Error> for CliError {
    fn from(e: cusplab::Error) -> Self {
        match e {
            cusplab::Error::NumericFailure { .. } | cusplab::Error::ReductionFailure { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
