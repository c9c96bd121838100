use std::fmt;

use classicml::ErrorClass;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// A failure with the exit status it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_DATA, message: msg.into() }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_NUMERIC, message: msg.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<classicml::Error> for CliError {
    fn from(e: classicml::Error) -> Self {
        let code = match e.class() {
            ErrorClass::Config => EXIT_CONFIG,
            ErrorClass::Data => EXIT_DATA,
            ErrorClass::Numeric => EXIT_NUMERIC,
        };
        CliError { code, message: e.to_string() }
    }
}
