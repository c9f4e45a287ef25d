use std::fmt;

use nonfree_core::NonfreeError;

/// CLI-level errors carrying the exit-code contract: 2 parse/validation,
/// 3 numerical, 4 capacity.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Capacity(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Capacity(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Numerical(msg) | CliError::Capacity(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

impl From<NonfreeError> for CliError {
    fn from(err: NonfreeError) -> Self {
        match err {
            NonfreeError::CapacityExceeded(_) => CliError::Capacity(err.to_string()),
            NonfreeError::ModeCount(d, max) if d > max => CliError::Capacity(err.to_string()),
            NonfreeError::Numerical(_) | NonfreeError::DegenerateGroundState(_) => {
                CliError::Numerical(err.to_string())
            }
            _ => CliError::Validation(err.to_string()),
        }
    }
}
