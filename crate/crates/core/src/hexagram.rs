//! Wen Wang Fa casting and hexagram algebra.
//!
//! Lines are numbered 1..=6 from the bottom. A six-line pattern is packed into
//! a [`Pattern`] whose bit `i - 1` is set when line `i` is yang.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::ChanceRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HexagramError {
    #[error("a hexagram needs exactly 6 lines, got {0}")]
    WrongLineCount(usize),
    #[error("line index {0} is outside 1..=6")]
    IndexOutOfRange(u8),
    #[error("coin sum {0} is outside 6..=9")]
    InvalidSum(u8),
    #[error("casting already has 6 tosses")]
    CastingComplete,
    #[error("casting record is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coin {
    Heads,
    Tails,
}

impl Coin {
    /// Traditional coin values: heads count 3, tails count 2.
    pub fn value(self) -> u8 {
        match self {
            Coin::Heads => 3,
            Coin::Tails => 2,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Coin::Heads => 'H',
            Coin::Tails => 'T',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CoinTossRepr")]
pub struct CoinToss {
    coins: [Coin; 3],
    sum: u8,
}

#[derive(Deserialize)]
struct CoinTossRepr {
    coins: [Coin; 3],
    sum: u8,
}

impl TryFrom<CoinTossRepr> for CoinToss {
    type Error = HexagramError;

    fn try_from(raw: CoinTossRepr) -> Result<Self, Self::Error> {
        let toss = CoinToss::new(raw.coins);
        if toss.sum != raw.sum {
            return Err(HexagramError::Inconsistent(format!(
                "coin sum {} does not match coins {toss}",
                raw.sum
            )));
        }
        Ok(toss)
    }
}

impl CoinToss {
    pub fn new(coins: [Coin; 3]) -> Self {
        let sum = coins.iter().map(|c| c.value()).sum();
        Self { coins, sum }
    }

    pub fn coins(&self) -> [Coin; 3] {
        self.coins
    }

    pub fn sum(&self) -> u8 {
        self.sum
    }
}

impl fmt::Display for CoinToss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.coins {
            write!(f, "{}", c.symbol())?;
        }
        Ok(())
    }
}

/// Throws three fair coins in order, one `coin()` draw each.
pub fn toss_coins(rng: &mut ChanceRng) -> CoinToss {
    let mut coin = || if rng.coin() { Coin::Heads } else { Coin::Tails };
    CoinToss::new([coin(), coin(), coin()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Yin,
    Yang,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Yin => Polarity::Yang,
            Polarity::Yang => Polarity::Yin,
        }
    }
}

/// The four line types a toss can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    OldYin,
    YoungYang,
    YoungYin,
    OldYang,
}

impl LineKind {
    pub const ALL: [LineKind; 4] = [
        LineKind::OldYin,
        LineKind::YoungYang,
        LineKind::YoungYin,
        LineKind::OldYang,
    ];

    pub fn from_sum(sum: u8) -> Result<Self, HexagramError> {
        match sum {
            6 => Ok(LineKind::OldYin),
            7 => Ok(LineKind::YoungYang),
            8 => Ok(LineKind::YoungYin),
            9 => Ok(LineKind::OldYang),
            other => Err(HexagramError::InvalidSum(other)),
        }
    }

    pub fn sum(self) -> u8 {
        match self {
            LineKind::OldYin => 6,
            LineKind::YoungYang => 7,
            LineKind::YoungYin => 8,
            LineKind::OldYang => 9,
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            LineKind::OldYin | LineKind::YoungYin => Polarity::Yin,
            LineKind::YoungYang | LineKind::OldYang => Polarity::Yang,
        }
    }

    pub fn is_changing(self) -> bool {
        matches!(self, LineKind::OldYin | LineKind::OldYang)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LineRepr")]
pub struct Line {
    polarity: Polarity,
    changing: bool,
    source_sum: u8,
}

#[derive(Deserialize)]
struct LineRepr {
    polarity: Polarity,
    changing: bool,
    source_sum: u8,
}

impl TryFrom<LineRepr> for Line {
    type Error = HexagramError;

    fn try_from(raw: LineRepr) -> Result<Self, Self::Error> {
        let line = Line::from(LineKind::from_sum(raw.source_sum)?);
        if line.polarity != raw.polarity || line.changing != raw.changing {
            return Err(HexagramError::Inconsistent(format!(
                "line fields disagree with source sum {}",
                raw.source_sum
            )));
        }
        Ok(line)
    }
}

impl From<LineKind> for Line {
    fn from(kind: LineKind) -> Self {
        Self {
            polarity: kind.polarity(),
            changing: kind.is_changing(),
            source_sum: kind.sum(),
        }
    }
}

impl Line {
    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn is_changing(&self) -> bool {
        self.changing
    }

    pub fn source_sum(&self) -> u8 {
        self.source_sum
    }

    pub fn kind(&self) -> LineKind {
        // source_sum is validated on every construction path
        LineKind::from_sum(self.source_sum).expect("line sum in 6..=9")
    }
}

/// 6 → old yin, 7 → young yang, 8 → young yin, 9 → old yang.
pub fn line_from_toss(toss: &CoinToss) -> Line {
    Line::from(LineKind::from_sum(toss.sum()).expect("three coins always sum to 6..=9"))
}

/// The eight trigrams, numbered 1..=8 in the Fu Xi order (Qian, Dui, Li, Zhen,
/// Xun, Kan, Gen, Kun).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trigram {
    Qian = 1,
    Dui = 2,
    Li = 3,
    Zhen = 4,
    Xun = 5,
    Kan = 6,
    Gen = 7,
    Kun = 8,
}

impl Trigram {
    pub const ALL: [Trigram; 8] = [
        Trigram::Qian,
        Trigram::Dui,
        Trigram::Li,
        Trigram::Zhen,
        Trigram::Xun,
        Trigram::Kan,
        Trigram::Gen,
        Trigram::Kun,
    ];

    /// Three-bit pattern, bit 0 = bottom line, set = yang.
    pub const fn bits(self) -> u8 {
        match self {
            Trigram::Qian => 0b111,
            Trigram::Dui => 0b011,
            Trigram::Li => 0b101,
            Trigram::Zhen => 0b001,
            Trigram::Xun => 0b110,
            Trigram::Kan => 0b010,
            Trigram::Gen => 0b100,
            Trigram::Kun => 0b000,
        }
    }

    pub const fn from_bits(bits: u8) -> Trigram {
        match bits & 0b111 {
            0b111 => Trigram::Qian,
            0b011 => Trigram::Dui,
            0b101 => Trigram::Li,
            0b001 => Trigram::Zhen,
            0b110 => Trigram::Xun,
            0b010 => Trigram::Kan,
            0b100 => Trigram::Gen,
            _ => Trigram::Kun,
        }
    }

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Trigram::Qian => "Qian",
            Trigram::Dui => "Dui",
            Trigram::Li => "Li",
            Trigram::Zhen => "Zhen",
            Trigram::Xun => "Xun",
            Trigram::Kan => "Kan",
            Trigram::Gen => "Gen",
            Trigram::Kun => "Kun",
        }
    }

    pub fn image(self) -> &'static str {
        match self {
            Trigram::Qian => "heaven",
            Trigram::Dui => "lake",
            Trigram::Li => "fire",
            Trigram::Zhen => "thunder",
            Trigram::Xun => "wind",
            Trigram::Kan => "water",
            Trigram::Gen => "mountain",
            Trigram::Kun => "earth",
        }
    }
}

/// King Wen numbers indexed `[upper][lower]` by trigram bit pattern.
const KING_WEN_BY_TRIGRAMS: [[u8; 8]; 8] = {
    use Trigram::*;
    // rows: upper trigram; columns: lower trigram in this order
    const ORDER: [Trigram; 8] = [Qian, Zhen, Kan, Gen, Kun, Xun, Li, Dui];
    const ROWS: [[u8; 8]; 8] = [
        [1, 25, 6, 33, 12, 44, 13, 10],   // Qian above
        [34, 51, 40, 62, 16, 32, 55, 54], // Zhen above
        [5, 3, 29, 39, 8, 48, 63, 60],    // Kan above
        [26, 27, 4, 52, 23, 18, 22, 41],  // Gen above
        [11, 24, 7, 15, 2, 46, 36, 19],   // Kun above
        [9, 42, 59, 53, 20, 57, 37, 61],  // Xun above
        [14, 21, 64, 56, 35, 50, 30, 38], // Li above
        [43, 17, 47, 31, 45, 28, 49, 58], // Dui above
    ];
    let mut table = [[0u8; 8]; 8];
    let mut u = 0;
    while u < 8 {
        let mut l = 0;
        while l < 8 {
            table[ORDER[u].bits() as usize][ORDER[l].bits() as usize] = ROWS[u][l];
            l += 1;
        }
        u += 1;
    }
    table
};

const KING_WEN_BY_PATTERN: [u8; 64] = {
    let mut out = [0u8; 64];
    let mut p = 0;
    while p < 64 {
        out[p] = KING_WEN_BY_TRIGRAMS[p >> 3][p & 0b111];
        p += 1;
    }
    out
};

const PATTERN_BY_KING_WEN: [u8; 65] = {
    let mut out = [0u8; 65];
    let mut p = 0;
    while p < 64 {
        out[KING_WEN_BY_PATTERN[p] as usize] = p as u8;
        p += 1;
    }
    out
};

/// Six-bit line pattern; bit `i - 1` is line `i`, set = yang.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern(u8);

impl Pattern {
    pub fn new(bits: u8) -> Self {
        Self(bits & 0b11_1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_polarities(lines: &[Polarity; 6]) -> Self {
        let bits = lines
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == Polarity::Yang)
            .fold(0u8, |acc, (i, _)| acc | 1 << i);
        Self(bits)
    }

    pub fn polarity(self, index: u8) -> Polarity {
        if self.0 >> (index - 1) & 1 == 1 {
            Polarity::Yang
        } else {
            Polarity::Yin
        }
    }

    pub fn polarities(self) -> [Polarity; 6] {
        std::array::from_fn(|i| self.polarity(i as u8 + 1))
    }

    pub fn king_wen(self) -> u8 {
        KING_WEN_BY_PATTERN[self.0 as usize]
    }

    pub fn from_king_wen(number: u8) -> Option<Self> {
        (1..=64)
            .contains(&number)
            .then(|| Self(PATTERN_BY_KING_WEN[number as usize]))
    }

    pub fn lower(self) -> Trigram {
        Trigram::from_bits(self.0 & 0b111)
    }

    pub fn upper(self) -> Trigram {
        Trigram::from_bits(self.0 >> 3)
    }

    pub fn yang_count(self) -> u32 {
        self.0.count_ones()
    }
}

/// Set of changing-line indices (Dong Yao), kept as a bit mask and
/// serialized as an ascending array of 1-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct ChangingLines(u8);

impl ChangingLines {
    pub fn none() -> Self {
        Self(0)
    }

    pub fn from_mask(mask: u8) -> Self {
        Self(mask & 0b11_1111)
    }

    pub fn from_indices(indices: &[u8]) -> Result<Self, HexagramError> {
        indices.iter().try_fold(Self(0), |acc, &i| {
            if (1..=6).contains(&i) {
                Ok(Self(acc.0 | 1 << (i - 1)))
            } else {
                Err(HexagramError::IndexOutOfRange(i))
            }
        })
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, index: u8) -> bool {
        (1..=6).contains(&index) && self.0 >> (index - 1) & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = u8> {
        (1..=6u8).filter(move |i| self.contains(*i))
    }
}

impl TryFrom<Vec<u8>> for ChangingLines {
    type Error = HexagramError;

    fn try_from(v: Vec<u8>) -> Result<Self, Self::Error> {
        Self::from_indices(&v)
    }
}

impl From<ChangingLines> for Vec<u8> {
    fn from(c: ChangingLines) -> Self {
        c.iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "HexagramRepr")]
pub struct Hexagram {
    lines: [Polarity; 6],
    king_wen: u8,
    trigrams: (u8, u8),
}

#[derive(Deserialize)]
struct HexagramRepr {
    lines: [Polarity; 6],
    king_wen: u8,
    trigrams: (u8, u8),
}

impl TryFrom<HexagramRepr> for Hexagram {
    type Error = HexagramError;

    fn try_from(raw: HexagramRepr) -> Result<Self, Self::Error> {
        let hex = Hexagram::from_pattern(Pattern::from_polarities(&raw.lines));
        if hex.king_wen != raw.king_wen || hex.trigrams != raw.trigrams {
            return Err(HexagramError::Inconsistent(format!(
                "hexagram {} does not match its lines",
                raw.king_wen
            )));
        }
        Ok(hex)
    }
}

impl Hexagram {
    pub fn from_pattern(pattern: Pattern) -> Self {
        Self {
            lines: pattern.polarities(),
            king_wen: pattern.king_wen(),
            trigrams: (pattern.lower().number(), pattern.upper().number()),
        }
    }

    pub fn from_king_wen(number: u8) -> Option<Self> {
        Pattern::from_king_wen(number).map(Self::from_pattern)
    }

    pub fn pattern(&self) -> Pattern {
        Pattern::from_polarities(&self.lines)
    }

    /// Polarities bottom to top.
    pub fn lines(&self) -> [Polarity; 6] {
        self.lines
    }

    pub fn king_wen(&self) -> u8 {
        self.king_wen
    }

    pub fn lower(&self) -> Trigram {
        self.pattern().lower()
    }

    pub fn upper(&self) -> Trigram {
        self.pattern().upper()
    }

    /// (lower, upper) trigram numbers.
    pub fn trigrams(&self) -> (u8, u8) {
        self.trigrams
    }

    pub fn flipped(&self, changes: ChangingLines) -> Self {
        Self::from_pattern(Pattern::new(self.pattern().bits() ^ changes.mask()))
    }
}

pub fn build_hexagram(lines: &[Line]) -> Result<Hexagram, HexagramError> {
    let lines: &[Line; 6] = lines
        .try_into()
        .map_err(|_| HexagramError::WrongLineCount(lines.len()))?;
    Ok(Hexagram::from_pattern(Pattern::from_polarities(
        &lines.map(|l| l.polarity()),
    )))
}

/// Flips the Ben Gua at exactly the changing-line indices.
pub fn derive_zhi_gua(ben: &Hexagram, dong_yao: &[u8]) -> Result<Hexagram, HexagramError> {
    Ok(ben.flipped(ChangingLines::from_indices(dong_yao)?))
}

/// Progress of one six-toss cast.
///
/// Canonical JSON key order is `seed, tosses, lines, ben_gua, dong_yao,
/// zhi_gua`; `ben_gua` and `zhi_gua` are `null` until the sixth toss.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CastingRecordRepr")]
pub struct CastingRecord {
    seed: u64,
    tosses: Vec<CoinToss>,
    lines: Vec<Line>,
    ben_gua: Option<Hexagram>,
    dong_yao: ChangingLines,
    zhi_gua: Option<Hexagram>,
}

#[derive(Deserialize)]
struct CastingRecordRepr {
    seed: u64,
    tosses: Vec<CoinToss>,
    lines: Vec<Line>,
    ben_gua: Option<Hexagram>,
    dong_yao: ChangingLines,
    zhi_gua: Option<Hexagram>,
}

impl TryFrom<CastingRecordRepr> for CastingRecord {
    type Error = HexagramError;

    fn try_from(raw: CastingRecordRepr) -> Result<Self, Self::Error> {
        let rebuilt = CastingRecord::from_tosses(raw.seed, &raw.tosses)?;
        if rebuilt.lines != raw.lines
            || rebuilt.ben_gua != raw.ben_gua
            || rebuilt.dong_yao != raw.dong_yao
            || rebuilt.zhi_gua != raw.zhi_gua
        {
            return Err(HexagramError::Inconsistent("derived fields do not match tosses".into()));
        }
        Ok(rebuilt)
    }
}

impl CastingRecord {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            tosses: Vec::with_capacity(6),
            lines: Vec::with_capacity(6),
            ben_gua: None,
            dong_yao: ChangingLines::none(),
            zhi_gua: None,
        }
    }

    pub fn from_tosses(seed: u64, tosses: &[CoinToss]) -> Result<Self, HexagramError> {
        if tosses.len() > 6 {
            return Err(HexagramError::WrongLineCount(tosses.len()));
        }
        let mut record = Self::new(seed);
        for t in tosses {
            record.push(*t)?;
        }
        Ok(record)
    }

    /// Appends a toss and its line; the sixth toss finalizes Ben Gua, Dong Yao
    /// and Zhi Gua.
    pub fn push(&mut self, toss: CoinToss) -> Result<Line, HexagramError> {
        if self.is_complete() {
            return Err(HexagramError::CastingComplete);
        }
        let line = line_from_toss(&toss);
        let index = self.lines.len() as u8 + 1;
        self.tosses.push(toss);
        self.lines.push(line);
        if line.is_changing() {
            self.dong_yao = ChangingLines::from_mask(self.dong_yao.mask() | 1 << (index - 1));
        }
        if self.is_complete() {
            let ben = build_hexagram(&self.lines)?;
            self.zhi_gua = Some(ben.flipped(self.dong_yao));
            self.ben_gua = Some(ben);
        }
        Ok(line)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tosses(&self) -> &[CoinToss] {
        &self.tosses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn ben_gua(&self) -> Option<&Hexagram> {
        self.ben_gua.as_ref()
    }

    pub fn zhi_gua(&self) -> Option<&Hexagram> {
        self.zhi_gua.as_ref()
    }

    pub fn dong_yao(&self) -> ChangingLines {
        self.dong_yao
    }

    pub fn is_complete(&self) -> bool {
        self.lines.len() == 6
    }

    pub fn to_canonical_json(&self) -> Vec<u8> {
        crate::canonical::to_vec(self)
    }

    /// Hex SHA-256 of the canonical JSON.
    pub fn digest(&self) -> String {
        crate::canonical::digest(self)
    }
}

/// Casts a complete record from a fresh toss stream.
pub fn cast(seed: u64, rng: &mut ChanceRng) -> CastingRecord {
    let mut record = CastingRecord::new(seed);
    while !record.is_complete() {
        record.push(toss_coins(rng)).expect("record is not yet complete");
    }
    record
}
