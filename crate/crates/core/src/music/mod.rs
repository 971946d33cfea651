//! Deterministic event-stream generators.

mod ambient;
mod cage;
mod event;
mod layer;
mod params;

use thiserror::Error;

pub use ambient::{render_ambient, render_ambient_stream, AmbientSettings};
pub use cage::{cage_chart_select, cage_compose, ChanceCharts, ChartSelection, CAGE_OCTAVE_BASE, CAGE_TEMPO};
pub use event::{Beats, EventStream, Instrument, NoteEvent};
pub use layer::{accumulate_layers, layer_for_line, line_pan, render_casting, LoopLayer};
pub use params::{scale_pitches, DurationChoice, GenParams, PerLineKind};

#[derive(Debug, Error)]
pub enum MusicError {
    #[error("invalid note event: {0}")]
    InvalidEvent(String),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("line index {0} is outside 1..=6")]
    InvalidLineIndex(u8),
    #[error("a layer for line {0} already exists")]
    DuplicateLineIndex(u8),
    #[error("no layers to render")]
    EmptyLayers,
    #[error("at least one event is required")]
    NoEvents,
    #[error("invalid chance charts: {0}")]
    InvalidCharts(String),
    #[error("invalid music plan: {0}")]
    InvalidPlan(String),
}
