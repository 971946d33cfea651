use thiserror::Error;
use yao_core::interpret::InterpretError;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("`{op}` is not allowed in state {state}")]
    InvalidState { op: &'static str, state: &'static str },
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("casting is not complete")]
    IncompleteCasting,
    #[error("music plan is not ready")]
    PlanNotReady,
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("session is busy with another state-changing call")]
    Busy,
    #[error("interpretation provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("malformed provider output ({reason})")]
    MalformedProviderOutput { reason: String, raw: String },
    #[error("event log is corrupt: {0}")]
    LogCorrupt(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl SessionError {
    /// Stable machine-readable code for the wire API.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::InvalidState { .. } => "invalid_state",
            SessionError::EmptyQuestion => "empty_question",
            SessionError::InvalidRequest(_) => "invalid_request",
            SessionError::IncompleteCasting => "incomplete_casting",
            SessionError::PlanNotReady => "plan_not_ready",
            SessionError::UnknownSession(_) => "unknown_session",
            SessionError::Busy => "busy",
            SessionError::ProviderUnavailable(_) => "provider_unavailable",
            SessionError::MalformedProviderOutput { .. } => "malformed_provider_output",
            SessionError::LogCorrupt(_) => "log_corrupt",
            SessionError::Io(_) => "io_error",
            SessionError::Internal(_) => "internal",
        }
    }
}

impl From<InterpretError> for SessionError {
    fn from(e: InterpretError) -> Self {
        match e {
            InterpretError::EmptyQuestion => SessionError::EmptyQuestion,
            InterpretError::EmptyName => SessionError::InvalidRequest(e.to_string()),
            InterpretError::IncompleteCasting => SessionError::IncompleteCasting,
            InterpretError::ProviderUnavailable(m) => SessionError::ProviderUnavailable(m),
            InterpretError::MalformedProviderOutput { reason, raw } => {
                SessionError::MalformedProviderOutput { reason, raw }
            }
            InterpretError::Corpus(_) | InterpretError::InvalidPlan(_) => SessionError::Internal(e.to_string()),
        }
    }
}
