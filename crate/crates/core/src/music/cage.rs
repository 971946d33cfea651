//! Chart-driven chance composition for comparison with the casting stage.
//!
//! Three 64-entry charts (sound, duration, dynamic) are indexed by the King
//! Wen number of a freshly cast hexagram. A `null` sound entry is a rest: time
//! advances but no note is emitted.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::event::{Beats, EventStream, Instrument, NoteEvent};
use super::MusicError;
use crate::hexagram::{cast, Hexagram};
use crate::rng::{streams, ChanceRng};

const DEMO: &str = include_str!("../../data/demo_charts.json");

/// Tempo of chart compositions; one beat per second.
pub const CAGE_TEMPO: u32 = 60;
/// Chart sounds are pitch classes placed in the octave starting at middle C.
pub const CAGE_OCTAVE_BASE: u8 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartsRepr")]
pub struct ChanceCharts {
    sounds: Vec<Option<u8>>,
    durations: Vec<Beats>,
    dynamics: Vec<u8>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartsRepr {
    sounds: Vec<Option<u8>>,
    durations: Vec<Beats>,
    dynamics: Vec<u8>,
}

impl TryFrom<ChartsRepr> for ChanceCharts {
    type Error = MusicError;

    fn try_from(raw: ChartsRepr) -> Result<Self, Self::Error> {
        ChanceCharts::new(raw.sounds, raw.durations, raw.dynamics)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChartSelection {
    pub sound: Option<u8>,
    pub duration: Beats,
    pub dynamic: u8,
}

impl ChanceCharts {
    pub fn new(sounds: Vec<Option<u8>>, durations: Vec<Beats>, dynamics: Vec<u8>) -> Result<Self, MusicError> {
        for (name, len) in [
            ("sounds", sounds.len()),
            ("durations", durations.len()),
            ("dynamics", dynamics.len()),
        ] {
            if len != 64 {
                return Err(MusicError::InvalidCharts(format!(
                    "{name} has {len} entries, expected 64"
                )));
            }
        }
        if sounds.iter().flatten().any(|pc| *pc > 11) {
            return Err(MusicError::InvalidCharts(
                "sound entries must be pitch classes 0..=11 or null".into(),
            ));
        }
        if durations.contains(&Beats::ZERO) {
            return Err(MusicError::InvalidCharts("durations must be positive".into()));
        }
        if dynamics.iter().any(|v| !(1..=127).contains(v)) {
            return Err(MusicError::InvalidCharts("dynamics must be velocities 1..=127".into()));
        }
        Ok(Self {
            sounds,
            durations,
            dynamics,
        })
    }

    pub fn demo() -> Self {
        Self::from_json_str(DEMO).expect("bundled demo charts are valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self, MusicError> {
        serde_json::from_str(text).map_err(|e| MusicError::InvalidCharts(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MusicError> {
        let text = std::fs::read_to_string(path).map_err(|e| MusicError::InvalidCharts(e.to_string()))?;
        Self::from_json_str(&text)
    }

    pub fn sounds(&self) -> &[Option<u8>] {
        &self.sounds
    }
}

/// Reads entry `king_wen` (1-based) from each chart.
pub fn cage_chart_select(hexagram: &Hexagram, charts: &ChanceCharts) -> ChartSelection {
    let i = hexagram.king_wen() as usize - 1;
    ChartSelection {
        sound: charts.sounds[i],
        duration: charts.durations[i],
        dynamic: charts.dynamics[i],
    }
}

/// Casts `n_events` independent hexagrams and strings their chart selections
/// end to end.
pub fn cage_compose(n_events: u32, charts: &ChanceCharts, seed: u64) -> Result<EventStream, MusicError> {
    if n_events == 0 {
        return Err(MusicError::NoEvents);
    }
    let mut rng = ChanceRng::new(seed, streams::CAGE);
    let mut cursor = Beats::ZERO;
    let mut events = Vec::new();
    for _ in 0..n_events {
        let record = cast(seed, &mut rng);
        let hexagram = record.ben_gua().expect("cast returns a complete record");
        let pick = cage_chart_select(hexagram, charts);
        if let Some(pc) = pick.sound {
            events.push(NoteEvent {
                onset: cursor,
                duration: pick.duration,
                pitch: CAGE_OCTAVE_BASE + pc,
                velocity: pick.dynamic,
                instrument: Instrument::Koto,
                pan: 0.0,
            });
        }
        cursor = cursor + pick.duration;
    }
    Ok(EventStream::new(events, cursor.to_seconds(CAGE_TEMPO), CAGE_TEMPO))
}
