use serde::Serialize;
use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every variant serializes to a tagged JSON object so the command-line
/// front end can report failures in machine-readable form.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("integration failed near s = {last_s}: {reason}")]
    IntegrationFailure { last_s: f64, reason: String },

    #[error("numeric blow-up at s = {s}")]
    NumericBlowup { s: f64 },

    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        what: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("curve is not yet asymptotic at s_max = {s_max} (tail curvature ratio {ratio:e}); increase s_max")]
    NotAsymptotic { s_max: f64, ratio: f64 },

    #[error("tail bound unavailable: distance slope {slope} is not positive in the tail")]
    TailBoundUnavailable { slope: f64 },

    #[error("domain of integration is empty for radius {r}")]
    DegenerateDomain { r: f64 },

    #[error("solver did not converge: {reason}")]
    SolverFailure { reason: String, trace: Vec<f64> },

    #[error("missing prerequisite: {0}")]
    MissingDependency(String),
}

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// JSON rendering used on standard error by the CLI.
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).unwrap_or_else(|_| serde_json::json!({}));
        if let Some(map) = value.as_object_mut() {
            map.insert(
                "message".into(),
                serde_json::Value::String(self.to_string()),
            );
        }
        value.to_string()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
