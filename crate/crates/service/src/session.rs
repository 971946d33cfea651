//! The ritual state machine.
//!
//! ```text
//! Intake -> Casting(0) -> ... -> Casting(5) -> Interpreting -> Playback -> Complete
//!    ^__________________________ reset ___________________________________|
//! ```
//!
//! Every method here is a pure function of the session, its arguments and
//! the timestamp passed in. An illegal call returns [`SessionError::InvalidState`]
//! and leaves the session untouched.

use serde::{Deserialize, Serialize};
use yao_core::interpret::{
    assemble_prompt_with, build_music_plan, Inquiry, MusicPlan, PromptDocument, PromptOptions, Reading,
};
use yao_core::music::{
    accumulate_layers, layer_for_line, render_ambient_stream, render_casting, Beats, EventStream, GenParams,
    Instrument, LoopLayer,
};
use yao_core::rng::streams;
use yao_core::{toss_coins, CastingRecord, ChanceRng, Coin, CoinToss, Corpus, Line};

use crate::error::SessionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum SessionState {
    Intake,
    Casting { tosses_done: u8 },
    Interpreting,
    Playback,
    Complete,
}

impl SessionState {
    pub fn name(self) -> &'static str {
        match self {
            SessionState::Intake => "intake",
            SessionState::Casting { .. } => "casting",
            SessionState::Interpreting => "interpreting",
            SessionState::Playback => "playback",
            SessionState::Complete => "complete",
        }
    }

    /// Whether hexagram identity and texts may be revealed.
    pub fn reveals_semantics(self) -> bool {
        matches!(
            self,
            SessionState::Interpreting | SessionState::Playback | SessionState::Complete
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    pub id: String,
    pub seed: u64,
    /// Number of resets so far; selects the RNG streams.
    pub epoch: u32,
    pub inquiry: Option<Inquiry>,
    pub state: SessionState,
    pub record: CastingRecord,
    pub layers: Vec<LoopLayer>,
    pub reading: Option<Reading>,
    pub plan: Option<MusicPlan>,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
    pub updated_at: u64,
    #[serde(skip)]
    pub params: GenParams,
}

/// What a toss returns to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct TossOutcome {
    /// 1-based.
    pub toss_index: u8,
    pub toss: CoinToss,
    pub line: Line,
    pub layer: LoopLayer,
}

/// A layer stripped of line semantics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub line_index: u8,
    pub instrument: Instrument,
    pub pan: f64,
    pub note_count: usize,
    pub loop_length: Beats,
}

impl From<&LoopLayer> for LayerSummary {
    fn from(l: &LoopLayer) -> Self {
        Self {
            line_index: l.line_index,
            instrument: l.instrument,
            pan: l.pan,
            note_count: l.notes.len(),
            loop_length: l.loop_length,
        }
    }
}

impl Session {
    pub fn new(id: impl Into<String>, seed: u64, params: GenParams, now: u64) -> Self {
        Self {
            id: id.into(),
            seed,
            epoch: 0,
            inquiry: None,
            state: SessionState::Intake,
            record: CastingRecord::new(seed),
            layers: Vec::new(),
            reading: None,
            plan: None,
            created_at: now,
            updated_at: now,
            params,
        }
    }

    fn invalid(&self, op: &'static str) -> SessionError {
        SessionError::InvalidState {
            op,
            state: self.state.name(),
        }
    }

    pub fn submit_inquiry(&mut self, inquiry: Inquiry, now: u64) -> Result<(), SessionError> {
        if self.state != SessionState::Intake {
            return Err(self.invalid("inquiry"));
        }
        self.inquiry = Some(inquiry);
        self.state = SessionState::Casting { tosses_done: 0 };
        self.updated_at = now;
        Ok(())
    }

    /// The coins of toss `k` (0-based) in the current epoch. Each toss owns
    /// three draws of the epoch's toss stream.
    fn coins_for(&self, k: u8) -> CoinToss {
        let mut rng = ChanceRng::at_draw(self.seed, streams::tosses(self.epoch), 3 * u64::from(k));
        toss_coins(&mut rng)
    }

    pub fn perform_toss(&mut self, now: u64) -> Result<TossOutcome, SessionError> {
        let SessionState::Casting { tosses_done: k } = self.state else {
            return Err(self.invalid("toss"));
        };
        let toss = self.coins_for(k);
        let toss_index = k + 1;
        let mut record = self.record.clone();
        let line = record.push(toss).map_err(|e| SessionError::Internal(e.to_string()))?;
        let layer = layer_for_line(
            line,
            toss_index,
            &self.params,
            self.seed,
            streams::layer(self.epoch, toss_index),
        )
        .map_err(|e| SessionError::Internal(e.to_string()))?;
        let layers =
            accumulate_layers(&self.layers, layer.clone()).map_err(|e| SessionError::Internal(e.to_string()))?;

        self.record = record;
        self.layers = layers;
        self.state = if toss_index == 6 {
            SessionState::Interpreting
        } else {
            SessionState::Casting {
                tosses_done: toss_index,
            }
        };
        self.updated_at = now;
        Ok(TossOutcome {
            toss_index,
            toss,
            line,
            layer,
        })
    }

    /// The document a provider would receive in the current state.
    pub fn prompt_document(&self, corpus: &Corpus, options: PromptOptions) -> Result<PromptDocument, SessionError> {
        if self.state != SessionState::Interpreting {
            return Err(self.invalid("interpret"));
        }
        let inquiry = self.inquiry.as_ref().ok_or_else(|| self.invalid("interpret"))?;
        Ok(assemble_prompt_with(inquiry, &self.record, corpus, options)?)
    }

    /// Attaches a reading, derives the plan and moves to Playback.
    pub fn apply_reading(&mut self, reading: Reading, now: u64) -> Result<(), SessionError> {
        if self.state != SessionState::Interpreting {
            return Err(self.invalid("interpret"));
        }
        let plan = build_music_plan(&reading, &self.record)?;
        self.reading = Some(reading);
        self.plan = Some(plan);
        self.state = SessionState::Playback;
        self.updated_at = now;
        Ok(())
    }

    pub fn complete(&mut self, now: u64) -> Result<(), SessionError> {
        if self.state != SessionState::Playback {
            return Err(self.invalid("complete"));
        }
        self.state = SessionState::Complete;
        self.updated_at = now;
        Ok(())
    }

    /// Back to a silent Intake with fresh RNG streams; id and seed are kept.
    pub fn reset(&mut self, now: u64) {
        self.epoch += 1;
        self.inquiry = None;
        self.state = SessionState::Intake;
        self.record = CastingRecord::new(self.seed);
        self.layers.clear();
        self.reading = None;
        self.plan = None;
        self.updated_at = now;
    }

    pub fn plan(&self) -> Result<&MusicPlan, SessionError> {
        self.plan.as_ref().ok_or(SessionError::PlanNotReady)
    }

    /// The stream the player should be sounding: casting loops before
    /// Playback, the ambient rendering afterwards.
    pub fn playback_stream(&self, casting_cycles: u32) -> Result<EventStream, SessionError> {
        match self.state {
            SessionState::Intake => Err(self.invalid("playback")),
            SessionState::Casting { .. } | SessionState::Interpreting => {
                if self.layers.is_empty() {
                    return Ok(EventStream::empty(0.0, self.params.tempo));
                }
                render_casting(&self.layers, casting_cycles, &self.params)
                    .map_err(|e| SessionError::Internal(e.to_string()))
            }
            SessionState::Playback | SessionState::Complete => {
                let plan = self.plan()?;
                render_ambient_stream(plan, self.seed, streams::ambient(self.epoch))
                    .map_err(|e| SessionError::Internal(e.to_string()))
            }
        }
    }

    pub fn layer_summaries(&self) -> Vec<LayerSummary> {
        self.layers.iter().map(LayerSummary::from).collect()
    }

    /// Canonical JSON of the full session.
    pub fn to_canonical_json(&self) -> Vec<u8> {
        yao_core::canonical::to_vec(self)
    }

    /// The public view: the full session once semantics may be revealed,
    /// otherwise only coins and layer summaries.
    pub fn view(&self) -> serde_json::Value {
        if self.state.reveals_semantics() {
            return serde_json::to_value(self).expect("session serializes");
        }
        let tosses: Vec<[Coin; 3]> = self.record.tosses().iter().map(CoinToss::coins).collect();
        serde_json::json!({
            "id": self.id,
            "seed": self.seed,
            "epoch": self.epoch,
            "inquiry": self.inquiry,
            "state": self.state,
            "tosses": tosses,
            "layers": self.layer_summaries(),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        })
    }
}
