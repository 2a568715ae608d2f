use serde::{Deserialize, Serialize};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// Verification failed or a desk cap was hit.
    VerificationFailed,
    InvalidInput,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::VerificationFailed => 2,
            Status::InvalidInput => 3,
        }
    }
}

/// A failure with a machine-readable reason.
#[derive(Debug, thiserror::Error)]
#[error("{reason}: {message}")]
pub struct CliError {
    pub status: Status,
    pub reason: &'static str,
    pub message: String,
}

impl CliError {
    pub fn invalid(reason: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: Status::InvalidInput,
            reason,
            message: message.into(),
        }
    }

    pub fn failed(reason: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: Status::VerificationFailed,
            reason,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::invalid("io", format!("{}: {err}", path.display()))
    }

    /// The JSON object written to stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            status: Status,
            exit_code: i32,
            reason: &'a str,
            message: &'a str,
        }
        crate::decimal::to_json(&Body {
            status: self.status,
            exit_code: self.status.code(),
            reason: self.reason,
            message: &self.message,
        })
    }
}
