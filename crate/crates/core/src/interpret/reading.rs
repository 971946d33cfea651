use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::InterpretError;

/// Keyword categories, in serialization order.
pub const CATEGORIES: [&str; 4] = ["mood", "energy", "dynamics", "spatial"];

/// Musical keywords; every category is a non-empty list of non-empty words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KeywordsRepr")]
pub struct Keywords {
    mood: Vec<String>,
    energy: Vec<String>,
    dynamics: Vec<String>,
    spatial: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KeywordsRepr {
    mood: Vec<String>,
    energy: Vec<String>,
    dynamics: Vec<String>,
    spatial: Vec<String>,
}

impl TryFrom<KeywordsRepr> for Keywords {
    type Error = String;

    fn try_from(r: KeywordsRepr) -> Result<Self, Self::Error> {
        Keywords::new(r.mood, r.energy, r.dynamics, r.spatial)
    }
}

impl Keywords {
    pub fn new(
        mood: Vec<String>,
        energy: Vec<String>,
        dynamics: Vec<String>,
        spatial: Vec<String>,
    ) -> Result<Self, String> {
        let kw = Self {
            mood,
            energy,
            dynamics,
            spatial,
        };
        for (name, words) in kw.categories() {
            if words.is_empty() {
                return Err(format!("keyword category `{name}` is empty"));
            }
            if words.iter().any(|w| w.trim().is_empty()) {
                return Err(format!("keyword category `{name}` contains a blank word"));
            }
        }
        Ok(kw)
    }

    pub fn mood(&self) -> &[String] {
        &self.mood
    }

    pub fn energy(&self) -> &[String] {
        &self.energy
    }

    pub fn dynamics(&self) -> &[String] {
        &self.dynamics
    }

    pub fn spatial(&self) -> &[String] {
        &self.spatial
    }

    /// `(name, words)` pairs in [`CATEGORIES`] order.
    pub fn categories(&self) -> [(&'static str, &[String]); 4] {
        [
            (CATEGORIES[0], &self.mood),
            (CATEGORIES[1], &self.energy),
            (CATEGORIES[2], &self.dynamics),
            (CATEGORIES[3], &self.spatial),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reading {
    pub body: String,
    pub keywords: Keywords,
    /// Id of the provider that produced the reading.
    pub provider: String,
    pub template_version: String,
}

impl Reading {
    /// Validates raw provider output. Any missing or empty category rejects
    /// the whole output; the raw text travels with the error.
    pub fn from_provider_output(raw: &str, provider: &str, template_version: &str) -> Result<Self, InterpretError> {
        let malformed = |reason: String| InterpretError::MalformedProviderOutput {
            reason,
            raw: raw.to_owned(),
        };
        let value: Value = serde_json::from_str(raw).map_err(|e| malformed(format!("not JSON: {e}")))?;
        let body = value
            .get("body")
            .and_then(Value::as_str)
            .filter(|b| !b.trim().is_empty())
            .ok_or_else(|| malformed("missing reading body".into()))?;
        let kw = value
            .get("keywords")
            .and_then(Value::as_object)
            .ok_or_else(|| malformed("missing keywords object".into()))?;
        let mut lists = Vec::with_capacity(4);
        for name in CATEGORIES {
            let words = kw
                .get(name)
                .and_then(Value::as_array)
                .ok_or_else(|| malformed(format!("missing keyword category `{name}`")))?;
            let words: Option<Vec<String>> = words
                .iter()
                .map(|w| w.as_str().map(|s| s.trim().to_lowercase()))
                .collect();
            lists.push(words.ok_or_else(|| malformed(format!("non-string keyword in `{name}`")))?);
        }
        let mut lists = lists.into_iter();
        let mut next = || lists.next().expect("four categories");
        let keywords = Keywords::new(next(), next(), next(), next()).map_err(malformed)?;
        Ok(Self {
            body: body.to_owned(),
            keywords,
            provider: provider.to_owned(),
            template_version: template_version.to_owned(),
        })
    }
}
