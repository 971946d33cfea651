//! Session service for the casting ritual: the state machine, its event log
//! and the HTTP API the UI and CLI drive it through.

pub mod api;
mod error;
pub mod log;
mod service;
pub mod session;

pub use error::SessionError;
pub use log::{replay_log, replay_session, EventLog, LogEvent, LogRecord};
pub use service::{Clock, ManualClock, ServiceConfig, SessionService, SystemClock};
pub use session::{LayerSummary, Session, SessionState, TossOutcome};
