use std::fmt;

/// Exit status classes: 2 usage, 3 data, 4 numeric validity.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric validity error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<powertriad::Error> for CliError {
    fn from(e: powertriad::Error) -> Self {
        use powertriad::Error as E;
        if e.is_numeric_validity() {
            return CliError::Numeric(e.to_string());
        }
        match e {
            E::InvalidParameter(_)
            | E::InvalidTapCount(_)
            | E::CutoffTooHigh { .. }
            | E::ZeroImpedance
            | E::DuplicateHarmonic(_)
            | E::InvalidGrid(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
