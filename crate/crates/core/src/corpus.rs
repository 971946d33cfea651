//! Judgment (Gua Ci) and line (Yao Ci) texts for the 64 hexagrams.
//!
//! The file format is a UTF-8 JSON array of 64 objects:
//!
//! ```json
//! [{"king_wen": 1, "name_pinyin": "Qian", "name_translated": "Heaven",
//!   "gua_ci": "...", "yao_ci": ["bottom line", "...", "top line"]}, ...]
//! ```
//!
//! The bundled corpus is a concise plain-language rendering; any other
//! translation in the same shape can be loaded with [`load_corpus`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hexagram::CastingRecord;

const BUNDLED: &str = include_str!("../data/corpus.json");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus schema error: {0}")]
    Schema(String),
    #[error("corpus has no entry for hexagram {0}")]
    MissingEntry(u8),
    #[error("casting record is incomplete")]
    IncompleteRecord,
    #[error("reading corpus: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub king_wen: u8,
    pub name_pinyin: String,
    pub name_translated: String,
    pub gua_ci: String,
    /// Index 0 is the bottom line.
    pub yao_ci: Vec<String>,
}

impl CorpusEntry {
    /// Line text for a 1-based line index.
    pub fn line_text(&self, index: u8) -> Option<&str> {
        index
            .checked_sub(1)
            .and_then(|i| self.yao_ci.get(i as usize))
            .map(String::as_str)
    }
}

/// A validated corpus: exactly one entry for every King Wen number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED).expect("bundled corpus is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self, CorpusError> {
        let entries: Vec<CorpusEntry> = serde_json::from_str(text).map_err(|e| CorpusError::Schema(e.to_string()))?;
        Self::from_entries(entries)
    }

    pub fn from_entries(mut entries: Vec<CorpusEntry>) -> Result<Self, CorpusError> {
        if entries.len() != 64 {
            return Err(CorpusError::Schema(format!(
                "expected 64 entries, found {}",
                entries.len()
            )));
        }
        entries.sort_by_key(|e| e.king_wen);
        for (expected, entry) in (1u8..=64).zip(&entries) {
            if entry.king_wen != expected {
                return Err(CorpusError::Schema(if entry.king_wen < expected {
                    format!("duplicate or invalid king_wen {}", entry.king_wen)
                } else {
                    format!("missing king_wen {expected}")
                }));
            }
            if entry.gua_ci.trim().is_empty() {
                return Err(CorpusError::Schema(format!("entry {expected} has an empty gua_ci")));
            }
            if entry.yao_ci.len() != 6 || entry.yao_ci.iter().any(|t| t.trim().is_empty()) {
                return Err(CorpusError::Schema(format!(
                    "entry {expected} needs six non-empty yao_ci"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entry(&self, king_wen: u8) -> Result<&CorpusEntry, CorpusError> {
        king_wen
            .checked_sub(1)
            .and_then(|i| self.entries.get(i as usize))
            .ok_or(CorpusError::MissingEntry(king_wen))
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    Corpus::from_json_str(&std::fs::read_to_string(path)?)
}

/// Texts retrieved for a finished cast.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CastTexts {
    pub gua_ci_ben: String,
    /// `(line index, Yao Ci of the Ben Gua)` for each changing line, ascending.
    pub yao_ci_changing: Vec<(u8, String)>,
    pub gua_ci_zhi: String,
}

pub fn lookup_texts(corpus: &Corpus, record: &CastingRecord) -> Result<CastTexts, CorpusError> {
    let (ben, zhi) = match (record.ben_gua(), record.zhi_gua()) {
        (Some(b), Some(z)) => (b, z),
        _ => return Err(CorpusError::IncompleteRecord),
    };
    let ben_entry = corpus.entry(ben.king_wen())?;
    let zhi_entry = corpus.entry(zhi.king_wen())?;
    let yao_ci_changing = record
        .dong_yao()
        .iter()
        .map(|i| {
            ben_entry
                .line_text(i)
                .map(|t| (i, t.to_owned()))
                .ok_or(CorpusError::MissingEntry(ben.king_wen()))
        })
        .collect::<Result<_, _>>()?;
    Ok(CastTexts {
        gua_ci_ben: ben_entry.gua_ci.clone(),
        yao_ci_changing,
        gua_ci_zhi: zhi_entry.gua_ci.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexagram::{Coin, CoinToss};
    use Coin::{Heads as H, Tails as T};

    fn record(sums: [u8; 6]) -> CastingRecord {
        let coins = |s: u8| match s {
            6 => [T, T, T],
            7 => [H, T, T],
            8 => [H, H, T],
            _ => [H, H, H],
        };
        let tosses: Vec<_> = sums.iter().map(|s| CoinToss::new(coins(*s))).collect();
        CastingRecord::from_tosses(0, &tosses).unwrap()
    }

    #[test]
    fn bundled_corpus_is_complete() {
        let corpus = Corpus::bundled();
        assert_eq!(corpus.entries().len(), 64);
        assert_eq!(corpus.entry(1).unwrap().name_pinyin, "Qian");
        assert_eq!(corpus.entry(64).unwrap().king_wen, 64);
        assert!(corpus.entry(0).is_err());
        assert!(corpus.entry(65).is_err());
    }

    #[test]
    fn no_changing_lines() {
        let corpus = Corpus::bundled();
        let texts = lookup_texts(&corpus, &record([7; 6])).unwrap();
        assert!(texts.yao_ci_changing.is_empty());
        // all-yang cast is hexagram 1, unchanged
        assert_eq!(texts.gua_ci_ben, corpus.entries()[0].gua_ci);
        assert_eq!(texts.gua_ci_zhi, corpus.entries()[0].gua_ci);
    }

    #[test]
    fn changing_lines_are_ordered() {
        let corpus = Corpus::bundled();
        let texts = lookup_texts(&corpus, &record([7, 9, 8, 7, 6, 8])).unwrap();
        let indices: Vec<u8> = texts.yao_ci_changing.iter().map(|(i, _)| *i).collect();
        assert_eq!(indices, vec![2, 5]);
        let ben = record([7, 9, 8, 7, 6, 8]).ben_gua().unwrap().king_wen();
        assert_eq!(texts.yao_ci_changing[0].1, corpus.entry(ben).unwrap().yao_ci[1]);
        assert_eq!(texts.yao_ci_changing[1].1, corpus.entry(ben).unwrap().yao_ci[4]);
    }

    #[test]
    fn incomplete_record_rejected() {
        let partial = CastingRecord::from_tosses(0, &[CoinToss::new([H, H, H])]).unwrap();
        assert!(matches!(
            lookup_texts(&Corpus::bundled(), &partial),
            Err(CorpusError::IncompleteRecord)
        ));
    }

    fn mutate(f: impl FnOnce(&mut Vec<CorpusEntry>)) -> Result<Corpus, CorpusError> {
        let mut entries = Corpus::bundled().entries().to_vec();
        f(&mut entries);
        Corpus::from_entries(entries)
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            mutate(|e| {
                e.pop();
            }),
            Err(CorpusError::Schema(_))
        ));
        assert!(matches!(mutate(|e| e[10].king_wen = 12), Err(CorpusError::Schema(_))));
        assert!(matches!(
            mutate(|e| {
                e[3].yao_ci.pop();
            }),
            Err(CorpusError::Schema(_))
        ));
        assert!(matches!(
            mutate(|e| e[3].yao_ci[2] = " ".into()),
            Err(CorpusError::Schema(_))
        ));
        assert!(matches!(
            Corpus::from_json_str("{\"not\": \"an array\"}"),
            Err(CorpusError::Schema(_))
        ));
        assert!(matches!(
            load_corpus("/nonexistent/corpus.json"),
            Err(CorpusError::Io(_))
        ));
    }
}
