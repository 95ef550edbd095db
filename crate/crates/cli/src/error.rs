use std::fmt;

use casimir_core::Error as CoreError;
use serde::Serialize;

/// Failure category, also used for the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Schema or constraint violation in the config or flags.
    Config,
    /// The model is well formed but physically invalid (unstable, divergent).
    Model,
    /// A numerical failure during the sweep.
    Computation,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Model => 3,
            ErrorKind::Computation => 4,
            ErrorKind::Io => 5,
        }
    }
}

/// An error carrying the name of the offending parameter. Serializes to a
/// single-line JSON record.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
pub struct CliError {
    #[serde(rename = "error")]
    kind: ErrorKind,
    parameter: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.parameter, self.message)
    }
}

impl CliError {
    pub fn new(kind: ErrorKind, parameter: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind,
            parameter: parameter.into(),
            value: None,
            message: message.into(),
        }
    }

    pub fn config(parameter: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, parameter, message)
    }

    pub fn io(path: impl Into<String>, err: std::io::Error) -> Self {
        Self::new(ErrorKind::Io, path, err.to_string())
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub fn kind(&self) -> ErrorKind {
        self.kind
    }

    pub fn parameter(&self) -> &str {
        &self.parameter
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("error record serializes")
    }

    /// Maps a library error to a record. `model_key` names the config entry
    /// to blame for instabilities.
    pub fn from_core(err: CoreError, model_key: &str) -> Self {
        let message = err.to_string();
        match err {
            CoreError::Domain { name, value, .. } => {
                let key = match name {
                    "T" => "sweep.T".to_string(),
                    "rel_tol" | "n_max_cap" => format!("tolerances.{name}"),
                    "mediator a" | "mediator c" => "model.mediators".to_string(),
                    other => format!("model.{other}"),
                };
                Self::new(ErrorKind::Config, key, message).with_value(value)
            }
            CoreError::InvalidModel(_) => Self::new(ErrorKind::Config, "model", message),
            CoreError::Unstable { root } => Self::new(ErrorKind::Model, model_key, message).with_value(root),
            CoreError::DipoleUnstable { product, .. } => {
                Self::new(ErrorKind::Model, model_key, message).with_value(product)
            }
            CoreError::NonConvergence { n_max, .. } => {
                Self::new(ErrorKind::Computation, "tolerances.n_max_cap", message).with_value(n_max as f64)
            }
            CoreError::AtTemperature { temperature, source } => {
                let inner = Self::from_core(*source, model_key);
                let kind = match inner.kind {
                    ErrorKind::Config => ErrorKind::Computation,
                    k => k,
                };
                Self {
                    kind,
                    parameter: if inner.parameter.starts_with("tolerances.") {
                        inner.parameter
                    } else {
                        "T".to_string()
                    },
                    value: Some(temperature),
                    message,
                }
            }
            CoreError::SingularSelfFactor { .. } | CoreError::Numeric(_) => {
                Self::new(ErrorKind::Computation, model_key, message)
            }
        }
    }
}
