use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MusicError;

/// Musical time in fixed point: 480 ticks per beat.
///
/// Serialized as a JSON number of beats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Beats(u32);

impl Beats {
    pub const TICKS_PER_BEAT: u32 = 480;
    pub const ZERO: Beats = Beats(0);

    pub const fn from_ticks(ticks: u32) -> Self {
        Self(ticks)
    }

    pub const fn whole(beats: u32) -> Self {
        Self(beats * Self::TICKS_PER_BEAT)
    }

    /// Nearest tick to a real number of beats; `None` for negative or
    /// non-finite input.
    pub fn from_f64(beats: f64) -> Option<Self> {
        let ticks = (beats * f64::from(Self::TICKS_PER_BEAT)).round();
        (beats.is_finite() && ticks >= 0.0 && ticks <= f64::from(u32::MAX)).then_some(Self(ticks as u32))
    }

    pub const fn ticks(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / f64::from(Self::TICKS_PER_BEAT)
    }

    pub fn to_seconds(self, tempo_bpm: u32) -> f64 {
        f64::from(self.0) * 60.0 / (f64::from(Self::TICKS_PER_BEAT) * f64::from(tempo_bpm))
    }

    pub fn saturating_sub(self, other: Beats) -> Beats {
        Beats(self.0.saturating_sub(other.0))
    }
}

impl Add for Beats {
    type Output = Beats;

    fn add(self, rhs: Beats) -> Beats {
        Beats(self.0 + rhs.0)
    }
}

impl Mul<u32> for Beats {
    type Output = Beats;

    fn mul(self, rhs: u32) -> Beats {
        Beats(self.0 * rhs)
    }
}

impl fmt::Display for Beats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Beats {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Beats {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Beats::from_f64(v).ok_or_else(|| serde::de::Error::custom(format!("invalid beat value {v}")))
    }
}

/// The six casting voices, ordered from low to high register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instrument {
    TaikoDrum,
    Koto,
    Shamisen,
    NylonGuitar,
    Shakuhachi,
    Flute,
}

impl Instrument {
    pub const ALL: [Instrument; 6] = [
        Instrument::TaikoDrum,
        Instrument::Koto,
        Instrument::Shamisen,
        Instrument::NylonGuitar,
        Instrument::Shakuhachi,
        Instrument::Flute,
    ];

    /// Line 1 (bottom) is the taiko, line 6 the flute.
    pub fn for_line(line_index: u8) -> Option<Instrument> {
        line_index
            .checked_sub(1)
            .and_then(|i| Self::ALL.get(i as usize))
            .copied()
    }

    /// Inclusive MIDI pitch range.
    pub fn register(self) -> (u8, u8) {
        match self {
            Instrument::TaikoDrum => (36, 52),
            Instrument::Koto => (45, 81),
            Instrument::Shamisen => (50, 86),
            Instrument::NylonGuitar => (52, 88),
            Instrument::Shakuhachi => (55, 91),
            Instrument::Flute => (60, 96),
        }
    }

    pub fn is_percussion(self) -> bool {
        self == Instrument::TaikoDrum
    }

    pub fn name(self) -> &'static str {
        match self {
            Instrument::TaikoDrum => "taiko drum",
            Instrument::Koto => "koto",
            Instrument::Shamisen => "shamisen",
            Instrument::NylonGuitar => "nylon guitar",
            Instrument::Shakuhachi => "shakuhachi",
            Instrument::Flute => "flute",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub onset: Beats,
    pub duration: Beats,
    pub pitch: u8,
    pub velocity: u8,
    pub instrument: Instrument,
    pub pan: f64,
}

impl NoteEvent {
    pub fn end(&self) -> Beats {
        self.onset + self.duration
    }

    pub fn validate(&self) -> Result<(), MusicError> {
        let fail = |why: &str| Err(MusicError::InvalidEvent(format!("{why}: {self:?}")));
        if self.duration == Beats::ZERO {
            return fail("zero duration");
        }
        let (low, high) = self.instrument.register();
        if !(low..=high).contains(&self.pitch) {
            return fail("pitch outside the instrument register");
        }
        if !(1..=127).contains(&self.velocity) {
            return fail("velocity outside 1..=127");
        }
        if !(-1.0..=1.0).contains(&self.pan) {
            return fail("pan outside [-1, 1]");
        }
        Ok(())
    }
}

/// A rendered, onset-sorted sequence of notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    pub events: Vec<NoteEvent>,
    /// Seconds.
    pub total_duration: f64,
    /// Beats per minute.
    pub tempo: u32,
}

impl EventStream {
    /// Sorts by onset, then instrument, then pitch, so merged streams have a
    /// single canonical order.
    pub fn new(mut events: Vec<NoteEvent>, total_duration: f64, tempo: u32) -> Self {
        events.sort_by(|a, b| (a.onset, a.instrument, a.pitch).cmp(&(b.onset, b.instrument, b.pitch)));
        Self {
            events,
            total_duration,
            tempo,
        }
    }

    pub fn empty(total_duration: f64, tempo: u32) -> Self {
        Self::new(Vec::new(), total_duration, tempo)
    }

    pub fn onset_seconds(&self, event: &NoteEvent) -> f64 {
        event.onset.to_seconds(self.tempo)
    }

    pub fn end_seconds(&self, event: &NoteEvent) -> f64 {
        event.end().to_seconds(self.tempo)
    }

    pub fn validate(&self) -> Result<(), MusicError> {
        if self.tempo == 0 {
            return Err(MusicError::InvalidEvent("tempo is zero".into()));
        }
        for pair in self.events.windows(2) {
            if pair[1].onset < pair[0].onset {
                return Err(MusicError::InvalidEvent("onsets out of order".into()));
            }
        }
        for e in &self.events {
            e.validate()?;
            if self.end_seconds(e) > self.total_duration + 1e-9 {
                return Err(MusicError::InvalidEvent(format!("event ends after the stream: {e:?}")));
            }
        }
        Ok(())
    }

    pub fn to_canonical_json(&self) -> Vec<u8> {
        crate::canonical::to_vec(self)
    }

    pub fn digest(&self) -> String {
        crate::canonical::digest(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beats_fixed_point() {
        assert_eq!(Beats::from_f64(1.5).unwrap().ticks(), 720);
        assert_eq!(Beats::from_f64(0.25).unwrap().ticks(), 120);
        assert!(Beats::from_f64(-1.0).is_none());
        assert!(Beats::from_f64(f64::NAN).is_none());
        assert_eq!(Beats::whole(2).to_seconds(120), 1.0);
        let json = serde_json::to_string(&Beats::from_ticks(1)).unwrap();
        let back: Beats = serde_json::from_str(&json).unwrap();
        assert_eq!(back.ticks(), 1);
    }

    #[test]
    fn instrument_per_line() {
        assert_eq!(Instrument::for_line(1), Some(Instrument::TaikoDrum));
        assert_eq!(Instrument::for_line(6), Some(Instrument::Flute));
        assert_eq!(Instrument::for_line(0), None);
        assert_eq!(Instrument::for_line(7), None);
        let mut lows: Vec<u8> = Instrument::ALL.iter().map(|i| i.register().0).collect();
        let sorted = {
            let mut s = lows.clone();
            s.sort();
            s
        };
        assert_eq!(lows, sorted);
        lows.dedup();
        assert_eq!(lows.len(), 6);
    }

    #[test]
    fn event_validation() {
        let ok = NoteEvent {
            onset: Beats::ZERO,
            duration: Beats::whole(1),
            pitch: 60,
            velocity: 80,
            instrument: Instrument::Koto,
            pan: 0.0,
        };
        assert!(ok.validate().is_ok());
        assert!(NoteEvent {
            duration: Beats::ZERO,
            ..ok
        }
        .validate()
        .is_err());
        assert!(NoteEvent { velocity: 0, ..ok }.validate().is_err());
        assert!(NoteEvent { pitch: 200, ..ok }.validate().is_err());
        assert!(NoteEvent { pitch: 40, ..ok }.validate().is_err());
        assert!(NoteEvent { pan: 1.5, ..ok }.validate().is_err());
        let stream = EventStream::new(vec![ok], 0.5, 120);
        assert!(stream.validate().is_ok());
        let short = EventStream::new(vec![ok], 0.4, 120);
        assert!(short.validate().is_err());
    }
}
