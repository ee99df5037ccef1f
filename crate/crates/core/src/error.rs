use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("delay schedule incomplete: {0}")]
    ScheduleIncomplete(String),

    #[error("invalid delay schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid interval: a = {a} > b = {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("segment length B = {segment_length} too small: mean segment score {mean_score} <= threshold {threshold}")]
    SegmentTooShort {
        segment_length: f64,
        mean_score: f64,
        threshold: f64,
    },

    #[error("invalid interval query: {0}")]
    InvalidQuery(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("trace parse error at line {line}: {reason}")]
    TraceParse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        SimError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
