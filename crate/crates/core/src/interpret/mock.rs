//! Offline provider. Output is a pure function of the prompt document.

use std::fmt::Write as _;

use serde_json::json;

use super::{InterpretError, InterpretationProvider, PromptDocument, Reading};
use crate::hexagram::{Hexagram, Trigram};

pub const MOCK_PROVIDER_ID: &str = "mock";

/// Keyword candidates per trigram family: (mood, spatial, secondary energy).
fn lexicon(t: Trigram) -> (&'static [&'static str], &'static [&'static str], &'static str) {
    match t {
        Trigram::Qian => (&["resolute", "luminous", "noble"], &["vast", "open"], "driving"),
        Trigram::Dui => (
            &["joyful", "gentle", "open-hearted"],
            &["reflective", "shimmering"],
            "lilting",
        ),
        Trigram::Li => (&["radiant", "clear", "ardent"], &["bright", "scattered"], "flickering"),
        Trigram::Zhen => (&["startled", "awakening", "bold"], &["resonant", "rolling"], "pulsing"),
        Trigram::Xun => (&["patient", "yielding", "subtle"], &["airy", "drifting"], "meandering"),
        Trigram::Kan => (&["uncertain", "deep", "searching"], &["deep", "enclosed"], "rippling"),
        Trigram::Gen => (
            &["calm", "contemplative", "steadfast"],
            &["enclosed", "grounded"],
            "resting",
        ),
        Trigram::Kun => (
            &["receptive", "tender", "nurturing"],
            &["grounded", "wide"],
            "breathing",
        ),
    }
}

fn pick<'a>(options: &[&'a str], key: usize) -> &'a str {
    options[key % options.len()]
}

fn push_unique(words: &mut Vec<String>, word: &str) {
    if !words.iter().any(|w| w == word) {
        words.push(word.to_owned());
    }
}

/// The mock reading for a document, before provider attribution.
fn compose(doc: &PromptDocument) -> (String, [Vec<String>; 4]) {
    let ben = Hexagram::from_king_wen(doc.ben_gua.king_wen).expect("document carries a valid hexagram");
    let zhi = Hexagram::from_king_wen(doc.zhi_gua.king_wen).expect("document carries a valid hexagram");
    let changes = doc.dong_yao.len();
    let key = usize::from(ben.king_wen()) * 31 + changes * 7 + usize::from(zhi.king_wen());

    let (ben_moods, ben_spaces, ben_energy) = lexicon(ben.lower());
    let (zhi_moods, zhi_spaces, _) = lexicon(zhi.upper());

    let mut mood = Vec::new();
    push_unique(&mut mood, pick(ben_moods, key));
    push_unique(&mut mood, pick(zhi_moods, key / 3));

    let primary_energy = match changes {
        0 => "still",
        1 | 2 => "flowing",
        _ => "surging",
    };
    let mut energy = vec![primary_energy.to_owned()];
    push_unique(&mut energy, ben_energy);

    let (ben_yang, zhi_yang) = (ben.pattern().yang_count(), zhi.pattern().yang_count());
    let primary_dynamics = match zhi_yang.cmp(&ben_yang) {
        std::cmp::Ordering::Greater => "swelling",
        std::cmp::Ordering::Less => "soft",
        std::cmp::Ordering::Equal if ben_yang >= 4 => "bold",
        std::cmp::Ordering::Equal => "soft",
    };
    let mut dynamics = vec![primary_dynamics.to_owned()];
    push_unique(&mut dynamics, if changes.is_multiple_of(2) { "even" } else { "uneven" });

    let mut spatial = Vec::new();
    push_unique(&mut spatial, pick(zhi_spaces, key));
    push_unique(&mut spatial, pick(ben_spaces, key / 5));

    let mut body = String::new();
    match &doc.name {
        Some(name) => {
            let _ = write!(body, "{name}, you asked: \"{}\" ", doc.question);
        }
        None => {
            let _ = write!(body, "You asked: \"{}\" ", doc.question);
        }
    }
    let _ = write!(
        body,
        "The cast opens with {} {}, {}: {}",
        doc.ben_gua.king_wen, doc.ben_gua.name_pinyin, doc.ben_gua.name_translated, doc.ben_gua.gua_ci
    );
    if doc.dong_yao.is_empty() {
        let _ = write!(body, " No line is moving, so the situation is read as it stands.");
    } else {
        for line in &doc.dong_yao {
            let _ = write!(body, " Line {} moves: {}", line.line_index, line.yao_ci);
        }
        let _ = write!(
            body,
            " The moving lines lead toward {} {}, {}: {}",
            doc.zhi_gua.king_wen, doc.zhi_gua.name_pinyin, doc.zhi_gua.name_translated, doc.zhi_gua.gua_ci
        );
    }
    let _ = write!(
        body,
        " Below lies {}, above lies {}; let the mood be {} and the space {}.",
        ben.lower().image(),
        ben.upper().image(),
        mood.join(" and "),
        spatial[0]
    );
    (body, [mood, energy, dynamics, spatial])
}

/// Deterministic, network-free provider.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

impl InterpretationProvider for MockProvider {
    fn id(&self) -> &str {
        MOCK_PROVIDER_ID
    }

    fn complete(&self, doc: &PromptDocument) -> Result<String, InterpretError> {
        let (body, [mood, energy, dynamics, spatial]) = compose(doc);
        Ok(json!({
            "body": body,
            "keywords": {"mood": mood, "energy": energy, "dynamics": dynamics, "spatial": spatial},
        })
        .to_string())
    }
}

/// The mock provider's reading for `doc`.
pub fn mock_reading(doc: &PromptDocument) -> Reading {
    super::interpret(doc, &MockProvider).expect("mock output always validates")
}
