use serde::{Deserialize, Serialize};

use super::RenderError;
use crate::music::{EventStream, NoteEvent};

/// One window of a stream for the UI player.
///
/// Wire shape: `{"from_time", "window_seconds", "tempo", "total_duration",
/// "stream_digest", "events": [NoteEvent]}`; times in seconds, event onsets
/// and durations in beats from the start of the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaybackChunk {
    pub from_time: f64,
    pub window_seconds: f64,
    pub tempo: u32,
    pub total_duration: f64,
    /// SHA-256 of the whole stream's canonical JSON.
    pub stream_digest: String,
    pub events: Vec<NoteEvent>,
}

/// Events whose onset falls in `[from_time, from_time + window_seconds)`.
pub fn chunk_stream(stream: &EventStream, from_time: f64, window_seconds: f64) -> Result<PlaybackChunk, RenderError> {
    if !from_time.is_finite() || from_time < 0.0 {
        return Err(RenderError::InvalidWindow(format!(
            "from_time {from_time} must be finite and >= 0"
        )));
    }
    if !window_seconds.is_finite() || window_seconds <= 0.0 {
        return Err(RenderError::InvalidWindow(format!(
            "window {window_seconds} must be finite and > 0"
        )));
    }
    let until = from_time + window_seconds;
    let events = stream
        .events
        .iter()
        .filter(|e| {
            let t = stream.onset_seconds(e);
            t >= from_time && t < until
        })
        .copied()
        .collect();
    Ok(PlaybackChunk {
        from_time,
        window_seconds,
        tempo: stream.tempo,
        total_duration: stream.total_duration,
        stream_digest: stream.digest(),
        events,
    })
}
