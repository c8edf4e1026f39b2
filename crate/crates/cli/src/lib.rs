//! Support library for the `sympl` binary: the matrix file format and the
//! exit-code-carrying error type.

pub mod io;

use sympl_core::Error;

/// Error carrying the process exit code.
///
/// Codes: 2 usage/parse, 3 domain (e.g. not positive definite), 4 numeric
/// failure, 5 insufficient data.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Domain(_) | Error::NotPositiveDefinite(_) => 3,
            Error::Numeric(_) | Error::IsotropicRange(_) | Error::DegenerateInput(_) => 4,
            Error::InsufficientData(_) => 5,
        };
        Self::new(code, e.to_string())
    }
}
