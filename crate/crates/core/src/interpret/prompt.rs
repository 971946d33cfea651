use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Inquiry, InterpretError};
use crate::corpus::{lookup_texts, Corpus};
use crate::hexagram::CastingRecord;

/// Version id of [`INSTRUCTIONS`]; recorded in every plan's provenance.
pub const TEMPLATE_VERSION: &str = "divination-v1";

const INSTRUCTIONS: &str = "You are an interpreter of the I-Ching. Read the original hexagram's \
judgment, the texts of any changing lines in ascending order, and the judgment of the \
transformed hexagram, then write a reading addressed to the question. Compare the original \
and transformed hexagrams to describe the movement of the situation. Do not predict; \
reflect. Then give musical keywords in four categories: mood, energy (one of still, flowing, \
surging first), dynamics (one of soft, swelling, bold first) and spatial. Reply with JSON \
only: {\"body\": string, \"keywords\": {\"mood\": [..], \"energy\": [..], \"dynamics\": [..], \
\"spatial\": [..]}}.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexagramSummary {
    pub king_wen: u8,
    pub name_pinyin: String,
    pub name_translated: String,
    pub gua_ci: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangingLineText {
    pub line_index: u8,
    pub yao_ci: String,
}

/// Everything sent to an interpretation provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptDocument {
    pub question: String,
    pub name: Option<String>,
    pub ben_gua: HexagramSummary,
    /// Ascending line order.
    pub dong_yao: Vec<ChangingLineText>,
    pub zhi_gua: HexagramSummary,
    pub template_version: String,
    pub instructions: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptOptions {
    /// Whether the user's name is forwarded to the provider.
    pub include_name: bool,
}

impl Default for PromptOptions {
    fn default() -> Self {
        Self { include_name: true }
    }
}

pub fn assemble_prompt(
    inquiry: &Inquiry,
    record: &CastingRecord,
    corpus: &Corpus,
) -> Result<PromptDocument, InterpretError> {
    assemble_prompt_with(inquiry, record, corpus, PromptOptions::default())
}

pub fn assemble_prompt_with(
    inquiry: &Inquiry,
    record: &CastingRecord,
    corpus: &Corpus,
    options: PromptOptions,
) -> Result<PromptDocument, InterpretError> {
    let (ben, zhi) = match (record.ben_gua(), record.zhi_gua()) {
        (Some(b), Some(z)) => (b, z),
        _ => return Err(InterpretError::IncompleteCasting),
    };
    let texts = lookup_texts(corpus, record)?;
    let summary = |king_wen: u8, gua_ci: String| -> Result<HexagramSummary, InterpretError> {
        let entry = corpus.entry(king_wen)?;
        Ok(HexagramSummary {
            king_wen,
            name_pinyin: entry.name_pinyin.clone(),
            name_translated: entry.name_translated.clone(),
            gua_ci,
        })
    };
    Ok(PromptDocument {
        question: inquiry.question().to_owned(),
        name: inquiry.name().filter(|_| options.include_name).map(str::to_owned),
        ben_gua: summary(ben.king_wen(), texts.gua_ci_ben)?,
        dong_yao: texts
            .yao_ci_changing
            .into_iter()
            .map(|(line_index, yao_ci)| ChangingLineText { line_index, yao_ci })
            .collect(),
        zhi_gua: summary(zhi.king_wen(), texts.gua_ci_zhi)?,
        template_version: TEMPLATE_VERSION.to_owned(),
        instructions: INSTRUCTIONS.to_owned(),
    })
}

impl PromptDocument {
    /// Plain-text prompt for chat-style models.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}\n", self.instructions);
        if let Some(name) = &self.name {
            let _ = writeln!(out, "Name: {name}");
        }
        let _ = writeln!(out, "Question: {}\n", self.question);
        let _ = writeln!(
            out,
            "Original hexagram {} {} ({}): {}",
            self.ben_gua.king_wen, self.ben_gua.name_pinyin, self.ben_gua.name_translated, self.ben_gua.gua_ci
        );
        if self.dong_yao.is_empty() {
            let _ = writeln!(out, "No changing lines.");
        }
        for line in &self.dong_yao {
            let _ = writeln!(out, "Changing line {}: {}", line.line_index, line.yao_ci);
        }
        let _ = writeln!(
            out,
            "Transformed hexagram {} {} ({}): {}",
            self.zhi_gua.king_wen, self.zhi_gua.name_pinyin, self.zhi_gua.name_translated, self.zhi_gua.gua_ci
        );
        out
    }
}
