use thiserror::Error;

use crate::scenario::ScenarioIssue;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("invalid scenario: {}", join_issues(.0))]
    InvalidScenario(Vec<ScenarioIssue>),

    #[error("invalid power constraints: {0}")]
    InvalidConstraints(String),

    #[error("invalid solver config: {0}")]
    InvalidSolverConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("oracle instance too large: {0}")]
    OracleTooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join_issues(issues: &[ScenarioIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
