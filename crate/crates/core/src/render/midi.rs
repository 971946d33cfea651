//! Standard MIDI File writer: format 1, a tempo track followed by one track
//! per instrument present, in [`Instrument::ALL`] order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RenderError;
use crate::music::{Beats, EventStream, Instrument, NoteEvent};

/// General MIDI channel reserved for percussion (channel 10 in 1-based terms).
pub const PERCUSSION_CHANNEL: u8 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidiRenderConfig {
    /// Ticks per quarter note.
    pub ppq: u16,
    /// Zero-based General MIDI program per instrument.
    pub program_map: BTreeMap<Instrument, u8>,
    pub channel_map: BTreeMap<Instrument, u8>,
}

impl Default for MidiRenderConfig {
    fn default() -> Self {
        use Instrument::*;
        Self {
            ppq: 480,
            program_map: BTreeMap::from([
                (Koto, 107),
                (Shamisen, 106),
                (Shakuhachi, 77),
                (Flute, 73),
                (NylonGuitar, 24),
                (TaikoDrum, 116),
            ]),
            channel_map: BTreeMap::from([
                (Koto, 0),
                (Shamisen, 1),
                (NylonGuitar, 2),
                (Shakuhachi, 3),
                (Flute, 4),
                (TaikoDrum, PERCUSSION_CHANNEL),
            ]),
        }
    }
}

impl MidiRenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        let bad = |why: String| Err(RenderError::InvalidConfig(why));
        if self.ppq == 0 || self.ppq > 0x7FFF {
            return bad(format!("ppq {} outside 1..=32767", self.ppq));
        }
        let mut seen = [false; 16];
        for instrument in Instrument::ALL {
            let (Some(&program), Some(&channel)) =
                (self.program_map.get(&instrument), self.channel_map.get(&instrument))
            else {
                return bad(format!("no program or channel for {}", instrument.name()));
            };
            if program > 127 {
                return bad(format!("program {program} outside 0..=127"));
            }
            if channel > 15 || seen[channel as usize] {
                return bad(format!("channel {channel} is out of range or shared"));
            }
            if instrument.is_percussion() != (channel == PERCUSSION_CHANNEL) {
                return bad("only the taiko may use the percussion channel".into());
            }
            seen[channel as usize] = true;
        }
        Ok(())
    }

    /// Stream ticks to file ticks, rounding half up. Exact whenever `ppq`
    /// divides evenly into the stream grid, including the default 480.
    fn ticks(&self, beats: Beats) -> u32 {
        let num = u64::from(beats.ticks()) * u64::from(self.ppq);
        let den = u64::from(Beats::TICKS_PER_BEAT);
        ((num + den / 2) / den) as u32
    }
}

fn push_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 5];
    let mut i = buf.len() - 1;
    buf[i] = (value & 0x7F) as u8;
    value >>= 7;
    while value > 0 {
        i -= 1;
        buf[i] = (value & 0x7F) as u8 | 0x80;
        value >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}

fn push_meta(out: &mut Vec<u8>, kind: u8, data: &[u8]) {
    out.extend_from_slice(&[0xFF, kind]);
    push_vlq(out, data.len() as u32);
    out.extend_from_slice(data);
}

fn chunk(tag: &[u8; 4], body: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.len() + 8);
    out.extend_from_slice(tag);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(body);
    out
}

fn pan_value(pan: f64) -> u8 {
    ((pan + 1.0) / 2.0 * 127.0).round().clamp(0.0, 127.0) as u8
}

/// Absolute-time track messages, serialized with delta times.
struct Track {
    messages: Vec<(u32, u8, Vec<u8>)>,
}

impl Track {
    fn new() -> Self {
        Self { messages: Vec::new() }
    }

    /// `rank` orders messages sharing a tick: setup < note-off < controller < note-on.
    fn add(&mut self, tick: u32, rank: u8, bytes: Vec<u8>) {
        self.messages.push((tick, rank, bytes));
    }

    fn encode(mut self, end_tick: u32) -> Vec<u8> {
        self.messages.sort_by_key(|m| (m.0, m.1));
        let mut body = Vec::new();
        let mut now = 0;
        for (tick, _, bytes) in &self.messages {
            push_vlq(&mut body, tick - now);
            body.extend_from_slice(bytes);
            now = *tick;
        }
        push_vlq(&mut body, end_tick.saturating_sub(now));
        push_meta(&mut body, 0x2F, &[]);
        chunk(b"MTrk", &body)
    }
}

/// Encodes `stream` as a format 1 file. Identical inputs give identical bytes.
pub fn write_midi(stream: &EventStream, config: &MidiRenderConfig) -> Result<Vec<u8>, RenderError> {
    config.validate()?;
    if stream.tempo == 0 {
        return Err(RenderError::InvalidStream("tempo is zero".into()));
    }
    if let Some(e) = stream.events.iter().find(|e| e.pitch > 127) {
        return Err(RenderError::PitchOutOfRange(e.pitch));
    }
    if let Some(e) = stream
        .events
        .iter()
        .find(|e| !(1..=127).contains(&e.velocity) || e.duration == Beats::ZERO)
    {
        return Err(RenderError::InvalidStream(format!("unplayable event {e:?}")));
    }

    let last = stream.events.iter().map(|e| config.ticks(e.end())).max().unwrap_or(0);
    let stream_end = Beats::from_f64(stream.total_duration * f64::from(stream.tempo) / 60.0)
        .map(|b| config.ticks(b))
        .unwrap_or(0);
    let end_tick = last.max(stream_end);

    let mut tracks = Vec::new();
    let mut tempo_track = Track::new();
    let micros_per_quarter = (60_000_000 / stream.tempo).min(0xFF_FFFF);
    let mut tempo = Vec::new();
    push_meta(&mut tempo, 0x51, &micros_per_quarter.to_be_bytes()[1..]);
    tempo_track.add(0, 0, tempo);
    let mut sig = Vec::new();
    push_meta(&mut sig, 0x58, &[4, 2, 24, 8]);
    tempo_track.add(0, 0, sig);
    tracks.push(tempo_track.encode(end_tick));

    for instrument in Instrument::ALL {
        let events: Vec<&NoteEvent> = stream.events.iter().filter(|e| e.instrument == instrument).collect();
        if events.is_empty() {
            continue;
        }
        let channel = config.channel_map[&instrument];
        let program = config.program_map[&instrument];
        let mut track = Track::new();
        let mut name = Vec::new();
        push_meta(&mut name, 0x03, instrument.name().as_bytes());
        track.add(0, 0, name);
        track.add(0, 0, vec![0xC0 | channel, program]);
        let mut pan = None;
        for e in &events {
            let on = config.ticks(e.onset);
            let value = pan_value(e.pan);
            if pan != Some(value) {
                track.add(on, 2, vec![0xB0 | channel, 10, value]);
                pan = Some(value);
            }
            track.add(on, 3, vec![0x90 | channel, e.pitch, e.velocity]);
            track.add(config.ticks(e.end()), 1, vec![0x80 | channel, e.pitch, 0]);
        }
        tracks.push(track.encode(end_tick));
    }

    let mut header = Vec::with_capacity(6);
    header.extend_from_slice(&1u16.to_be_bytes());
    header.extend_from_slice(&(tracks.len() as u16).to_be_bytes());
    header.extend_from_slice(&config.ppq.to_be_bytes());
    let mut out = chunk(b"MThd", &header);
    for t in tracks {
        out.extend_from_slice(&t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vlq(v: u32) -> Vec<u8> {
        let mut out = Vec::new();
        push_vlq(&mut out, v);
        out
    }

    #[test]
    fn vlq_encoding() {
        assert_eq!(vlq(0), [0x00]);
        assert_eq!(vlq(0x40), [0x40]);
        assert_eq!(vlq(0x7F), [0x7F]);
        assert_eq!(vlq(0x80), [0x81, 0x00]);
        assert_eq!(vlq(0x2000), [0xC0, 0x00]);
        assert_eq!(vlq(0x3FFF), [0xFF, 0x7F]);
        assert_eq!(vlq(0x0FFF_FFFF), [0xFF, 0xFF, 0xFF, 0x7F]);
    }

    #[test]
    fn empty_stream_has_only_tempo_track() {
        let bytes = write_midi(&EventStream::empty(0.0, 72), &MidiRenderConfig::default()).unwrap();
        assert_eq!(&bytes[..4], b"MThd");
        assert_eq!(&bytes[8..14], &[0, 1, 0, 1, 0x01, 0xE0]);
        // 60_000_000 / 72 = 833_333 = 0x0CB735
        assert!(bytes.windows(6).any(|w| w == [0xFF, 0x51, 0x03, 0x0C, 0xB7, 0x35]));
    }

    #[test]
    fn config_validation() {
        MidiRenderConfig::default().validate().unwrap();
        let mut c = MidiRenderConfig::default();
        c.channel_map.insert(Instrument::Flute, 0);
        assert!(c.validate().is_err());
        let mut c = MidiRenderConfig::default();
        c.channel_map.insert(Instrument::TaikoDrum, 5);
        assert!(c.validate().is_err());
        let c = MidiRenderConfig {
            ppq: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn pitch_out_of_range() {
        let e = NoteEvent {
            onset: Beats::ZERO,
            duration: Beats::whole(1),
            pitch: 128,
            velocity: 64,
            instrument: Instrument::Flute,
            pan: 0.0,
        };
        let s = EventStream::new(vec![e], 1.0, 60);
        assert!(matches!(
            write_midi(&s, &MidiRenderConfig::default()),
            Err(RenderError::PitchOutOfRange(128))
        ));
    }

    #[test]
    fn pan_mapping() {
        assert_eq!(pan_value(-1.0), 0);
        assert_eq!(pan_value(0.0), 64);
        assert_eq!(pan_value(1.0), 127);
    }
}
