use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs.
    Usage(String),
    /// A check ran and failed.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Verification(m) => f.write_str(m),
        }
    }
}

impl From<qgradcam::Error> for CliError {
    fn from(e: qgradcam::Error) -> Self {
        match e {
            qgradcam::Error::Diverged { .. } => CliError::Verification(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub fn usage(flag: &str, msg: impl fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {msg}"))
}
