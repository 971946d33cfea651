//! Casting-stage loop layers.
//!
//! Each toss adds one looping voice. Melodic voices walk the pentatonic scale
//! within their register: every step moves one or two scale degrees, upward
//! with the line type's direction bias, and a step that would leave the
//! register is taken in the opposite direction instead. Notes sit on an even
//! grid (`loop_length / notes_per_loop`) and sustain for a duration drawn from
//! the line type's menu. The taiko voice only varies duration and alternates
//! between two strike pitches.

use serde::{Deserialize, Serialize};

use super::event::{Beats, EventStream, Instrument, NoteEvent};
use super::params::{scale_pitches, GenParams};
use super::MusicError;
use crate::hexagram::Line;
use crate::rng::ChanceRng;

/// Stereo position of a line's voice, spread from -0.75 (line 1) to 0.75 (line 6).
pub fn line_pan(line_index: u8) -> f64 {
    f64::from(-75 + 30 * (i32::from(line_index) - 1)) / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopLayer {
    pub line_index: u8,
    pub line: Line,
    pub instrument: Instrument,
    pub notes: Vec<NoteEvent>,
    pub loop_length: Beats,
    pub pan: f64,
}

impl LoopLayer {
    /// Counts of (ascending, descending) steps between consecutive notes.
    pub fn interval_counts(&self) -> (usize, usize) {
        self.notes
            .windows(2)
            .fold((0, 0), |(up, down), w| match w[1].pitch.cmp(&w[0].pitch) {
                std::cmp::Ordering::Greater => (up + 1, down),
                std::cmp::Ordering::Less => (up, down + 1),
                std::cmp::Ordering::Equal => (up, down),
            })
    }

    pub fn mean_duration(&self) -> f64 {
        if self.notes.is_empty() {
            return 0.0;
        }
        self.notes.iter().map(|n| n.duration.as_f64()).sum::<f64>() / self.notes.len() as f64
    }
}

pub fn layer_for_line(
    line: Line,
    line_index: u8,
    params: &GenParams,
    seed: u64,
    stream: u64,
) -> Result<LoopLayer, MusicError> {
    params.validate()?;
    let instrument = Instrument::for_line(line_index).ok_or(MusicError::InvalidLineIndex(line_index))?;
    let kind = line.kind();
    let mut rng = ChanceRng::new(seed, stream);
    let (low, high) = instrument.register();
    let scale = scale_pitches(&params.pitch_classes(), low, high);
    if scale.len() < 2 {
        return Err(MusicError::InvalidParams(format!(
            "scale has fewer than two pitches in the {} register",
            instrument.name()
        )));
    }

    let pitches = if instrument.is_percussion() {
        strike_pattern(&scale, params.notes_per_loop, &mut rng)
    } else {
        walk(&scale, *params.direction_bias.get(kind), params, &mut rng)
    };

    let menu = params.duration_weights.get(kind);
    let weights: Vec<f64> = menu.iter().map(|c| c.weight).collect();
    let pan = line_pan(line_index);
    let slot = params.loop_length.ticks() / params.notes_per_loop;
    let notes = pitches
        .into_iter()
        .enumerate()
        .map(|(k, pitch)| {
            let duration = menu[rng.weighted(&weights)].beats;
            let accent = if k == 0 { 12 } else { 0 };
            NoteEvent {
                onset: Beats::from_ticks(slot * k as u32),
                duration,
                pitch,
                velocity: (60 + rng.below(29) as u8 + accent).min(127),
                instrument,
                pan,
            }
        })
        .collect();

    Ok(LoopLayer {
        line_index,
        line,
        instrument,
        notes,
        loop_length: params.loop_length,
        pan,
    })
}

fn walk(scale: &[u8], p_up: f64, params: &GenParams, rng: &mut ChanceRng) -> Vec<u8> {
    let top = scale.len() as i64 - 1;
    // leave headroom in the favoured direction
    let base = ((1.0 - p_up) * top as f64).round() as i64;
    let mut idx = (base + rng.below(3) as i64 - 1).clamp(0, top);
    let mut out = Vec::with_capacity(params.notes_per_loop as usize);
    out.push(scale[idx as usize]);
    for _ in 1..params.notes_per_loop {
        let up = rng.chance(p_up);
        let size = rng.weighted(&params.step_weights) as i64 + 1;
        let step = if up { size } else { -size };
        let next = if (0..=top).contains(&(idx + step)) {
            idx + step
        } else {
            (idx - step).clamp(0, top)
        };
        idx = next;
        out.push(scale[idx as usize]);
    }
    out
}

fn strike_pattern(scale: &[u8], count: u32, rng: &mut ChanceRng) -> Vec<u8> {
    let low = scale[0];
    let high = scale[3.min(scale.len() - 1)];
    (0..count)
        .map(|k| if k == 0 || !rng.coin() { low } else { high })
        .collect()
}

/// Adds a layer for a line index that has none yet.
pub fn accumulate_layers(existing: &[LoopLayer], new_layer: LoopLayer) -> Result<Vec<LoopLayer>, MusicError> {
    if existing.iter().any(|l| l.line_index == new_layer.line_index) {
        return Err(MusicError::DuplicateLineIndex(new_layer.line_index));
    }
    let mut out = existing.to_vec();
    out.push(new_layer);
    Ok(out)
}

/// Unrolls every loop `cycles` times into one merged stream.
///
/// `total_duration` covers all cycles, extended if the final notes ring past
/// the last loop boundary.
pub fn render_casting(layers: &[LoopLayer], cycles: u32, params: &GenParams) -> Result<EventStream, MusicError> {
    if layers.is_empty() {
        return Err(MusicError::EmptyLayers);
    }
    let mut events = Vec::with_capacity(layers.iter().map(|l| l.notes.len()).sum::<usize>() * cycles as usize);
    let mut end = Beats::ZERO;
    for layer in layers {
        end = end.max(layer.loop_length * cycles);
        for c in 0..cycles {
            let offset = layer.loop_length * c;
            for note in &layer.notes {
                let e = NoteEvent {
                    onset: note.onset + offset,
                    ..*note
                };
                end = end.max(e.end());
                events.push(e);
            }
        }
    }
    Ok(EventStream::new(events, end.to_seconds(params.tempo), params.tempo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexagram::LineKind;

    fn layer(kind: LineKind, index: u8, seed: u64) -> LoopLayer {
        layer_for_line(Line::from(kind), index, &GenParams::default(), seed, u64::from(index)).unwrap()
    }

    #[test]
    fn pan_spread() {
        assert_eq!(line_pan(1), -0.75);
        assert_eq!(line_pan(6), 0.75);
        assert_eq!(line_pan(3), -0.15);
    }

    #[test]
    fn layer_shape() {
        let l = layer(LineKind::OldYang, 3, 11);
        assert_eq!(l.notes.len(), 8);
        assert_eq!(l.instrument, Instrument::Shamisen);
        let (lo, hi) = l.instrument.register();
        for (k, n) in l.notes.iter().enumerate() {
            assert_eq!(n.onset, Beats::whole(k as u32));
            assert!(n.onset < l.loop_length);
            assert!((lo..=hi).contains(&n.pitch));
            assert!([2, 4, 6, 9, 11].contains(&(n.pitch % 12)));
            n.validate().unwrap();
        }
    }

    #[test]
    fn taiko_uses_two_strikes() {
        for seed in 0..50 {
            let l = layer(LineKind::YoungYin, 1, seed);
            assert!(l.notes.iter().all(|n| n.pitch == 38 || n.pitch == 45));
        }
    }

    #[test]
    fn bad_line_index() {
        let r = layer_for_line(Line::from(LineKind::OldYin), 7, &GenParams::default(), 0, 0);
        assert!(matches!(r, Err(MusicError::InvalidLineIndex(7))));
    }

    #[test]
    fn old_yin_leans_down() {
        let (mut up, mut down) = (0, 0);
        for seed in 0..1000 {
            let (u, d) = layer(LineKind::OldYin, 2 + (seed % 5) as u8, seed).interval_counts();
            up += u;
            down += d;
        }
        assert!(down > up, "descending {down} vs ascending {up}");
    }

    #[test]
    fn accumulate() {
        let one = accumulate_layers(&[], layer(LineKind::OldYin, 1, 0)).unwrap();
        assert_eq!(one.len(), 1);
        let mut all = Vec::new();
        for i in 1..=6 {
            all = accumulate_layers(&all, layer(LineKind::YoungYang, i, 0)).unwrap();
        }
        let mut instruments: Vec<_> = all.iter().map(|l| l.instrument).collect();
        instruments.dedup();
        assert_eq!(instruments.len(), 6);
        let two = accumulate_layers(&one, layer(LineKind::OldYin, 2, 0)).unwrap();
        assert!(matches!(
            accumulate_layers(&two, layer(LineKind::OldYang, 2, 5)),
            Err(MusicError::DuplicateLineIndex(2))
        ));
        // existing layers are untouched
        assert_eq!(two[0], one[0]);
    }

    #[test]
    fn render_counts_and_order() {
        let params = GenParams::default();
        let l = layer(LineKind::YoungYang, 2, 3);
        let s = render_casting(std::slice::from_ref(&l), 2, &params).unwrap();
        assert_eq!(s.events.len(), 16);
        s.validate().unwrap();
        assert!(s.total_duration >= Beats::whole(16).to_seconds(72));
        assert!(matches!(render_casting(&[], 1, &params), Err(MusicError::EmptyLayers)));
        let a = render_casting(&[l.clone(), layer(LineKind::OldYin, 5, 1)], 3, &params).unwrap();
        let b = render_casting(&[l, layer(LineKind::OldYin, 5, 1)], 3, &params).unwrap();
        assert_eq!(a.to_canonical_json(), b.to_canonical_json());
    }
}
