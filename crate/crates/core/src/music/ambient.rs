//! Plan-conditioned ambient rendering.
//!
//! Three sustained voices (koto left, shakuhachi centre, flute right) wander
//! a pentatonic mode for exactly `config.duration_seconds`. The plan's
//! keywords choose the parameters through fixed lookup tables:
//!
//! | category | word            | effect                              |
//! |----------|-----------------|-------------------------------------|
//! | energy   | still / flowing / surging | note density x0.4 / x0.7 / x1.0 |
//! | dynamics | soft / swelling / bold    | velocity 30-60 / 40-90 / 70-115 |
//! | spatial  | see [`spatial_spread`]    | pan spread 0.3 / 0.6 / 0.9      |
//! | mood     | see [`mood_rotation`]     | rotation of the pentatonic set  |
//!
//! Tempo is `config.bpm`; `config.density` scales the note count further.
//! Unrecognised words fall back to the middle entry of each table.

use serde::Serialize;

use super::event::{Beats, EventStream, Instrument, NoteEvent};
use super::params::scale_pitches;
use super::MusicError;
use crate::interpret::MusicPlan;
use crate::rng::{streams, ChanceRng};

const ROOT: u8 = 2;
const DEGREES: [u8; 5] = [0, 2, 4, 7, 9];
/// Onsets and durations are whole multiples of a quarter beat.
const GRID: u32 = Beats::TICKS_PER_BEAT / 4;

const VOICES: [Instrument; 3] = [Instrument::Koto, Instrument::Shakuhachi, Instrument::Flute];

/// Parameters resolved from a plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbientSettings {
    pub tempo: u32,
    pub notes_per_voice: u32,
    pub velocity_range: (u8, u8),
    pub pan_spread: f64,
    pub pitch_classes: Vec<u8>,
    pub total_ticks: u32,
}

fn first_match<T: Copy>(words: &[String], table: &[(&[&str], T)], fallback: T) -> T {
    words
        .iter()
        .find_map(|w| {
            table
                .iter()
                .find(|(keys, _)| keys.contains(&w.as_str()))
                .map(|(_, v)| *v)
        })
        .unwrap_or(fallback)
}

fn energy_multiplier(words: &[String]) -> f64 {
    first_match(
        words,
        &[(&["still"], 0.4), (&["flowing"], 0.7), (&["surging"], 1.0)],
        0.7,
    )
}

fn velocity_range(words: &[String]) -> (u8, u8) {
    first_match(
        words,
        &[(&["soft"], (30, 60)), (&["swelling"], (40, 90)), (&["bold"], (70, 115))],
        (40, 90),
    )
}

/// Pan spread of the outer voices.
fn spatial_spread(words: &[String]) -> f64 {
    first_match(
        words,
        &[
            (&["vast", "open", "wide", "expansive", "distant"], 0.9),
            (&["enclosed", "grounded", "deep", "intimate", "close", "near"], 0.3),
            (
                &[
                    "airy",
                    "drifting",
                    "reflective",
                    "shimmering",
                    "bright",
                    "scattered",
                    "resonant",
                    "rolling",
                ],
                0.6,
            ),
        ],
        0.6,
    )
}

/// Which degree of the pentatonic set serves as the mode's tonic.
fn mood_rotation(words: &[String]) -> usize {
    first_match(
        words,
        &[
            (
                &[
                    "joyful",
                    "radiant",
                    "luminous",
                    "resolute",
                    "clear",
                    "noble",
                    "ardent",
                    "open-hearted",
                ],
                0,
            ),
            (&["calm", "contemplative", "steadfast", "patient", "subtle"], 1),
            (&["gentle", "awakening", "startled", "bold"], 2),
            (&["receptive", "tender", "nurturing", "yielding"], 3),
            (&["uncertain", "deep", "searching", "melancholy", "sad"], 4),
        ],
        1,
    )
}

impl AmbientSettings {
    pub fn from_plan(plan: &MusicPlan) -> Result<Self, MusicError> {
        plan.validate().map_err(|e| MusicError::InvalidPlan(e.to_string()))?;
        let kw = &plan.keywords;
        let tempo = plan.config.bpm;
        let beats = f64::from(plan.config.duration_seconds) * f64::from(tempo) / 60.0;
        let scale = energy_multiplier(kw.energy()) * (0.25 + 0.75 * plan.config.density);
        let notes_per_voice = ((beats * scale).floor() as u32).max(1);

        let rotation = mood_rotation(kw.mood());
        let tonic = (ROOT + DEGREES[rotation]) % 12;
        let mut pitch_classes: Vec<u8> = DEGREES.iter().map(|d| (ROOT + d) % 12).collect();
        pitch_classes.sort();
        // tonic first, then ascending from it
        pitch_classes.sort_by_key(|pc| (pc + 12 - tonic) % 12);

        Ok(Self {
            tempo,
            notes_per_voice,
            velocity_range: velocity_range(kw.dynamics()),
            pan_spread: spatial_spread(kw.spatial()),
            pitch_classes,
            // duration * bpm / 60 beats, in ticks; exact for integer inputs
            total_ticks: plan.config.duration_seconds * tempo * Beats::TICKS_PER_BEAT / 60,
        })
    }
}

/// Renders `plan` on the default ambient stream.
pub fn render_ambient(plan: &MusicPlan, seed: u64) -> Result<EventStream, MusicError> {
    render_ambient_stream(plan, seed, streams::ambient(0))
}

pub fn render_ambient_stream(plan: &MusicPlan, seed: u64, stream: u64) -> Result<EventStream, MusicError> {
    let settings = AmbientSettings::from_plan(plan)?;
    let mut rng = ChanceRng::new(seed, stream);
    let total = settings.total_ticks;
    let n = settings.notes_per_voice;
    let slot = total / n;
    let (vel_lo, vel_hi) = settings.velocity_range;
    let mut events = Vec::with_capacity(VOICES.len() * n as usize);

    for (v, instrument) in VOICES.into_iter().enumerate() {
        let pan = settings.pan_spread * (v as f64 - 1.0);
        let (low, high) = instrument.register();
        // the middle two octaves of the register
        let centre = (u16::from(low) + u16::from(high)) / 2;
        let pitches = scale_pitches(
            &settings.pitch_classes,
            (centre - 12) as u8,
            (centre + 12).min(u16::from(high)) as u8,
        );
        let top = pitches.len() as i64 - 1;
        let tonic_idx = pitches
            .iter()
            .position(|p| p % 12 == settings.pitch_classes[0] && i64::from(*p) >= i64::from(centre) - 6)
            .unwrap_or(pitches.len() / 2) as i64;
        let mut idx = tonic_idx;

        for k in 0..n {
            let slot_start = k * slot / GRID * GRID;
            let jitter = rng.below(u64::from((slot / 2) / GRID + 1)) as u32 * GRID;
            let onset = slot_start + jitter;
            let remaining = total - onset;
            let wanted = slot + rng.below(u64::from(slot / GRID + 1)) as u32 * GRID;
            let duration = (wanted.min(remaining) / GRID * GRID).max(GRID.min(remaining));
            if duration == 0 {
                continue;
            }

            let step = [-2i64, -1, 0, 1, 2][rng.weighted(&[0.15, 0.3, 0.1, 0.3, 0.15])];
            idx = if (0..=top).contains(&(idx + step)) {
                idx + step
            } else {
                (idx - step).clamp(0, top)
            };

            // arch envelope over the piece, jittered within the range
            let t = f64::from(onset) / f64::from(total);
            let arch = (std::f64::consts::PI * t).sin();
            let span = f64::from(vel_hi - vel_lo);
            let velocity = f64::from(vel_lo) + span * (0.6 * arch + 0.4 * rng.unit());

            events.push(NoteEvent {
                onset: Beats::from_ticks(onset),
                duration: Beats::from_ticks(duration),
                pitch: pitches[idx as usize],
                velocity: velocity.round().clamp(f64::from(vel_lo), f64::from(vel_hi)) as u8,
                instrument,
                pan,
            });
        }
    }
    Ok(EventStream::new(
        events,
        f64::from(plan.config.duration_seconds),
        settings.tempo,
    ))
}
