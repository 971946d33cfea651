use serde::{Deserialize, Serialize};

use super::{InterpretError, Keywords, Reading};
use crate::canonical;
use crate::hexagram::CastingRecord;

pub const DEFAULT_DURATION_SECONDS: u32 = 45;
const FALLBACK_BPM: u32 = 66;
const FALLBACK_DENSITY: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPrompt {
    pub text: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub bpm: u32,
    /// In `[0, 1]`.
    pub density: f64,
    /// In `30..=60`.
    pub duration_seconds: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub provider: String,
    pub template_version: String,
    /// SHA-256 of the casting record's canonical JSON.
    pub casting_digest: String,
}

/// The document that conditions ambient playback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MusicPlan {
    pub prompts: Vec<WeightedPrompt>,
    pub config: PlanConfig,
    pub keywords: Keywords,
    pub provenance: Provenance,
}

/// Tempo for the first recognised energy word; 66 when none is recognised.
pub fn energy_bpm(words: &[String]) -> u32 {
    words
        .iter()
        .find_map(|w| match w.as_str() {
            "still" => Some(50),
            "flowing" => Some(66),
            "surging" => Some(84),
            _ => None,
        })
        .unwrap_or(FALLBACK_BPM)
}

/// Density for the first recognised dynamics word; 0.6 when none is recognised.
pub fn dynamics_density(words: &[String]) -> f64 {
    words
        .iter()
        .find_map(|w| match w.as_str() {
            "soft" => Some(0.3),
            "swelling" => Some(0.6),
            "bold" => Some(0.9),
            _ => None,
        })
        .unwrap_or(FALLBACK_DENSITY)
}

const CATEGORY_WEIGHTS: [f64; 4] = [1.0, 0.8, 0.6, 0.6];

pub fn build_music_plan(reading: &Reading, record: &CastingRecord) -> Result<MusicPlan, InterpretError> {
    if !record.is_complete() {
        return Err(InterpretError::IncompleteCasting);
    }
    let kw = &reading.keywords;
    let mut prompts: Vec<WeightedPrompt> = kw
        .categories()
        .iter()
        .zip(CATEGORY_WEIGHTS)
        .map(|((name, words), weight)| WeightedPrompt {
            text: format!("{name}: {}", words.join(", ")),
            weight,
        })
        .collect();
    prompts.push(WeightedPrompt {
        text: format!(
            "{} ambient piece for koto, shakuhachi and flute; {} and {}; {} space",
            kw.mood()[0],
            kw.energy()[0],
            kw.dynamics()[0],
            kw.spatial()[0]
        ),
        weight: 1.0,
    });
    let plan = MusicPlan {
        prompts,
        config: PlanConfig {
            bpm: energy_bpm(kw.energy()),
            density: dynamics_density(kw.dynamics()),
            duration_seconds: DEFAULT_DURATION_SECONDS,
        },
        keywords: kw.clone(),
        provenance: Provenance {
            provider: reading.provider.clone(),
            template_version: reading.template_version.clone(),
            casting_digest: record.digest(),
        },
    };
    plan.validate()?;
    Ok(plan)
}

impl MusicPlan {
    pub fn validate(&self) -> Result<(), InterpretError> {
        let bad = |why: &str| Err(InterpretError::InvalidPlan(why.to_owned()));
        if self.prompts.is_empty() {
            return bad("at least one prompt is required");
        }
        if self.prompts.iter().any(|p| p.weight < 0.0 || !p.weight.is_finite()) {
            return bad("prompt weights must be finite and non-negative");
        }
        if self.prompts.iter().any(|p| p.text.trim().is_empty()) {
            return bad("prompt text must not be empty");
        }
        if self.config.bpm == 0 || self.config.bpm > 300 {
            return bad("bpm must be in 1..=300");
        }
        if !(0.0..=1.0).contains(&self.config.density) {
            return bad("density must be in [0, 1]");
        }
        if !(30..=60).contains(&self.config.duration_seconds) {
            return bad("duration_seconds must be in 30..=60");
        }
        Ok(())
    }

    /// Parses and validates a plan document.
    pub fn from_json_str(text: &str) -> Result<Self, InterpretError> {
        let plan: MusicPlan = serde_json::from_str(text).map_err(|e| InterpretError::InvalidPlan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_canonical_json(&self) -> Vec<u8> {
        canonical::to_vec(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexagram::{Coin, CoinToss};

    fn reading(energy: &str, dynamics: &str) -> Reading {
        let w = |s: &str| vec![s.to_owned()];
        Reading {
            body: "b".into(),
            keywords: Keywords::new(w("calm"), w(energy), w(dynamics), w("vast")).unwrap(),
            provider: "mock".into(),
            template_version: "t".into(),
        }
    }

    fn record() -> CastingRecord {
        CastingRecord::from_tosses(5, &[CoinToss::new([Coin::Heads, Coin::Tails, Coin::Tails]); 6]).unwrap()
    }

    #[test]
    fn mapping_table() {
        for (energy, bpm) in [("still", 50), ("flowing", 66), ("surging", 84), ("jagged", 66)] {
            for (dynamics, density) in [("soft", 0.3), ("swelling", 0.6), ("bold", 0.9), ("hushed", 0.6)] {
                let plan = build_music_plan(&reading(energy, dynamics), &record()).unwrap();
                assert_eq!(plan.config.bpm, bpm);
                assert_eq!(plan.config.density, density);
                assert_eq!(plan.config.duration_seconds, 45);
            }
        }
    }

    #[test]
    fn prompts_and_provenance() {
        let plan = build_music_plan(&reading("still", "soft"), &record()).unwrap();
        assert_eq!(plan.prompts.len(), 5);
        assert!(plan.prompts.iter().any(|p| p.text.contains("calm")));
        assert_eq!(plan.provenance.casting_digest, record().digest());
        let json = plan.to_canonical_json();
        assert!(json.starts_with(br#"{"prompts":[{"text":"mood: calm","weight":1.0}"#));
        let back = MusicPlan::from_json_str(std::str::from_utf8(&json).unwrap()).unwrap();
        assert_eq!(back, plan);
        assert_eq!(back.to_canonical_json(), json);
    }

    #[test]
    fn incomplete_record_rejected() {
        assert!(matches!(
            build_music_plan(&reading("still", "soft"), &CastingRecord::new(1)),
            Err(InterpretError::IncompleteCasting)
        ));
    }

    #[test]
    fn validation() {
        let mut plan = build_music_plan(&reading("still", "soft"), &record()).unwrap();
        plan.config.duration_seconds = 61;
        assert!(plan.validate().is_err());
        plan.config.duration_seconds = 30;
        plan.prompts[0].weight = -1.0;
        assert!(plan.validate().is_err());
        assert!(MusicPlan::from_json_str("{}").is_err());
    }
}
