//! Serializers for event streams: Standard MIDI Files and playback chunks.

mod chunk;
mod midi;

use thiserror::Error;

pub use chunk::{chunk_stream, PlaybackChunk};
pub use midi::{write_midi, MidiRenderConfig, PERCUSSION_CHANNEL};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("pitch {0} is outside 0..=127")]
    PitchOutOfRange(u8),
    #[error("invalid stream: {0}")]
    InvalidStream(String),
    #[error("invalid MIDI configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid playback window: {0}")]
    InvalidWindow(String),
}
