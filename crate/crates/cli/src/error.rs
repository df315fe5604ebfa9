use extreme_conformal::simlab::SimError;
use extreme_conformal::{ConformalError, SampleError};
use std::fmt;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Numerical,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Usage => 2,
            Kind::Data => 3,
            Kind::Numerical => 4,
        }
    }
}

/// A failure with an exit class and a short machine-readable code.
#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Usage,
            code: "usage",
            message: message.into(),
        }
    }

    pub fn data(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Data,
            code,
            message: message.into(),
        }
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("xcp: error[{}]: {}", self.code, self.message);
        ExitCode::from(self.kind.exit_code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.message, self.code)
    }
}

impl From<ConformalError> for CliError {
    fn from(e: ConformalError) -> Self {
        let kind = if e.is_numerical() {
            Kind::Numerical
        } else if matches!(e, ConformalError::InvalidAlpha(_)) {
            Kind::Usage
        } else {
            Kind::Data
        };
        Self {
            kind,
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl From<SampleError> for CliError {
    fn from(e: SampleError) -> Self {
        Self::data("invalid_sample", e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Config(_) => "config",
            SimError::Predictions(_) => "predictions",
            SimError::Io(_) => "io",
            SimError::Csv(_) => "csv",
            SimError::Json(_) => "json",
        };
        Self::data(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data("io", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::data("csv", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data("json", e.to_string())
    }
}
