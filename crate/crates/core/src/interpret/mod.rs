//! From a finished cast to the music plan.
//!
//! [`assemble_prompt`] gathers the question and the corpus texts into a
//! [`PromptDocument`]; an [`InterpretationProvider`] turns the document into
//! raw output that [`interpret`] validates into a [`Reading`];
//! [`build_music_plan`] derives the [`MusicPlan`] that conditions playback.

mod mock;
mod plan;
mod prompt;
mod reading;
mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{mock_reading, MockProvider, MOCK_PROVIDER_ID};
pub use plan::{
    build_music_plan, dynamics_density, energy_bpm, MusicPlan, PlanConfig, Provenance, WeightedPrompt,
    DEFAULT_DURATION_SECONDS,
};
pub use prompt::{
    assemble_prompt, assemble_prompt_with, ChangingLineText, HexagramSummary, PromptDocument, PromptOptions,
    TEMPLATE_VERSION,
};
pub use reading::{Keywords, Reading, CATEGORIES};
pub use remote::{remote_provider_stub, RemoteConfig, RemoteProvider};

#[derive(Debug, Error)]
pub enum InterpretError {
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error("name, when given, must not be empty")]
    EmptyName,
    #[error("casting is not complete")]
    IncompleteCasting,
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error("interpretation provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("malformed provider output ({reason})")]
    MalformedProviderOutput { reason: String, raw: String },
    #[error("invalid music plan: {0}")]
    InvalidPlan(String),
}

/// The user's consultation: a question and an optional name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InquiryRepr")]
pub struct Inquiry {
    question: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

#[derive(Deserialize)]
struct InquiryRepr {
    question: String,
    #[serde(default)]
    name: Option<String>,
}

impl TryFrom<InquiryRepr> for Inquiry {
    type Error = InterpretError;

    fn try_from(raw: InquiryRepr) -> Result<Self, Self::Error> {
        Inquiry::new(raw.question, raw.name)
    }
}

impl Inquiry {
    /// The question is kept verbatim; it only has to contain something other
    /// than whitespace.
    pub fn new(question: impl Into<String>, name: Option<String>) -> Result<Self, InterpretError> {
        let question = question.into();
        if question.trim().is_empty() {
            return Err(InterpretError::EmptyQuestion);
        }
        if name.as_deref().is_some_and(|n| n.trim().is_empty()) {
            return Err(InterpretError::EmptyName);
        }
        Ok(Self { question, name })
    }

    pub fn question(&self) -> &str {
        &self.question
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
}

/// A source of readings. Implementations must be callable from several
/// sessions at once.
pub trait InterpretationProvider: Send + Sync {
    fn id(&self) -> &str;

    /// Raw provider output: a JSON object `{"body": ..., "keywords": {...}}`.
    fn complete(&self, doc: &PromptDocument) -> Result<String, InterpretError>;
}

/// Runs a provider and validates its output. A reading either has all four
/// keyword categories or is rejected.
pub fn interpret(doc: &PromptDocument, provider: &dyn InterpretationProvider) -> Result<Reading, InterpretError> {
    let raw = provider.complete(doc)?;
    Reading::from_provider_output(&raw, provider.id(), &doc.template_version)
}
