use std::fmt;

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable input, bad flags or configuration (exit 2).
    Input(anyhow::Error),
    /// Fitting or simulation failed numerically (exit 3).
    Numerical(anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn input(msg: impl fmt::Display) -> Self {
        CliError::Input(anyhow::anyhow!("{msg}"))
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        CliError::Numerical(anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = match self {
            CliError::Input(e) | CliError::Numerical(e) => e,
        };
        if f.alternate() {
            write!(f, "{inner:#}")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl std::error::Error for CliError {}

/// Tags an error with its exit class.
pub trait Classify<T> {
    fn or_input(self) -> CliResult<T>;
    fn or_numerical(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_input(self) -> CliResult<T> {
        self.map_err(|e| CliError::Input(e.into()))
    }

    fn or_numerical(self) -> CliResult<T> {
        self.map_err(|e| CliError::Numerical(e.into()))
    }
}
