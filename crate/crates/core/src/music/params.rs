use serde::{Deserialize, Serialize};

use super::event::Beats;
use super::MusicError;
use crate::hexagram::LineKind;

/// One value per line type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerLineKind<T> {
    pub old_yin: T,
    pub young_yang: T,
    pub young_yin: T,
    pub old_yang: T,
}

impl<T> PerLineKind<T> {
    pub fn get(&self, kind: LineKind) -> &T {
        match kind {
            LineKind::OldYin => &self.old_yin,
            LineKind::YoungYang => &self.young_yang,
            LineKind::YoungYin => &self.young_yin,
            LineKind::OldYang => &self.old_yang,
        }
    }

    fn iter(&self) -> impl Iterator<Item = (LineKind, &T)> {
        LineKind::ALL.into_iter().map(move |k| (k, self.get(k)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationChoice {
    pub beats: Beats,
    pub weight: f64,
}

fn menu(pairs: &[(f64, f64)]) -> Vec<DurationChoice> {
    pairs
        .iter()
        .map(|&(beats, weight)| DurationChoice {
            beats: Beats::from_f64(beats).expect("literal beats"),
            weight,
        })
        .collect()
}

/// Casting-stage generation parameters. Every field has a default, so a JSON
/// override file only needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    /// Beats per minute.
    pub tempo: u32,
    /// Pitch class of the scale root (0 = C).
    pub scale_root: u8,
    /// Five distinct semitone offsets from the root.
    pub pentatonic_degrees: [u8; 5],
    pub loop_length: Beats,
    pub notes_per_loop: u32,
    /// Probability that a melodic step goes up.
    pub direction_bias: PerLineKind<f64>,
    pub duration_weights: PerLineKind<Vec<DurationChoice>>,
    /// Weights of one-degree and two-degree steps.
    pub step_weights: [f64; 2],
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            tempo: 72,
            scale_root: 2,
            pentatonic_degrees: [0, 2, 4, 7, 9],
            loop_length: Beats::whole(8),
            notes_per_loop: 8,
            direction_bias: PerLineKind {
                old_yin: 0.3,
                young_yang: 0.6,
                young_yin: 0.4,
                old_yang: 0.7,
            },
            duration_weights: PerLineKind {
                old_yin: menu(&[(0.25, 0.5), (0.5, 0.3), (1.0, 0.2)]),
                young_yang: menu(&[(0.5, 1.0), (1.0, 1.0), (1.5, 1.0)]),
                young_yin: menu(&[(0.5, 1.0), (1.0, 1.0), (1.5, 1.0)]),
                old_yang: menu(&[(1.0, 0.2), (1.5, 0.3), (2.0, 0.5)]),
            },
            step_weights: [0.7, 0.3],
        }
    }
}

impl GenParams {
    pub fn from_json_str(text: &str) -> Result<Self, MusicError> {
        let params: GenParams = serde_json::from_str(text).map_err(|e| MusicError::InvalidParams(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), MusicError> {
        let bad = |why: String| Err(MusicError::InvalidParams(why));
        if self.tempo == 0 {
            return bad("tempo must be positive".into());
        }
        if self.scale_root > 11 {
            return bad(format!("scale_root {} is not a pitch class", self.scale_root));
        }
        let mut degrees = self.pentatonic_degrees;
        degrees.sort();
        if degrees.iter().any(|d| *d > 11) || degrees.windows(2).any(|w| w[0] == w[1]) {
            return bad("pentatonic_degrees must be 5 distinct values in 0..=11".into());
        }
        if self.notes_per_loop == 0 || self.loop_length.ticks() < self.notes_per_loop {
            return bad("loop must hold at least one tick per note".into());
        }
        for (kind, p) in self.direction_bias.iter() {
            if !(0.0..=1.0).contains(p) {
                return bad(format!("direction bias for {kind:?} outside [0, 1]"));
            }
        }
        for (kind, choices) in self.duration_weights.iter() {
            let total: f64 = choices.iter().map(|c| c.weight).sum();
            if choices.is_empty()
                || choices
                    .iter()
                    .any(|c| c.beats == Beats::ZERO || c.weight.is_nan() || c.weight < 0.0)
                || total.is_nan()
                || total <= 0.0
            {
                return bad(format!("duration menu for {kind:?} is invalid"));
            }
        }
        if self.step_weights.iter().any(|w| w.is_nan() || *w < 0.0) || self.step_weights.iter().sum::<f64>() <= 0.0 {
            return bad("step_weights must be non-negative with a positive sum".into());
        }
        Ok(())
    }

    /// Sorted pitch classes of the configured scale.
    pub fn pitch_classes(&self) -> Vec<u8> {
        let mut pcs: Vec<u8> = self
            .pentatonic_degrees
            .iter()
            .map(|d| (self.scale_root + d) % 12)
            .collect();
        pcs.sort();
        pcs
    }

    /// Mean of a line type's duration menu, in beats.
    pub fn expected_duration(&self, kind: LineKind) -> f64 {
        let choices = self.duration_weights.get(kind);
        let total: f64 = choices.iter().map(|c| c.weight).sum();
        choices.iter().map(|c| c.beats.as_f64() * c.weight).sum::<f64>() / total
    }
}

/// Every pitch in `low..=high` whose class is in `pitch_classes`, ascending.
pub fn scale_pitches(pitch_classes: &[u8], low: u8, high: u8) -> Vec<u8> {
    (low..=high).filter(|p| pitch_classes.contains(&(p % 12))).collect()
}
