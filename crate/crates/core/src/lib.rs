//! Core of the changing-lines divination engine.
//!
//! * [`hexagram`]: Wen Wang Fa coin casting, line types, King Wen identity and
//!   Ben Gua / Dong Yao / Zhi Gua derivation.
//! * [`corpus`]: the 64-entry judgment and line-text corpus.
//! * [`music`]: casting-stage loop layers, the plan-conditioned ambient
//!   rendering and the 64-entry chart comparison mode.
//! * [`interpret`]: prompt assembly, interpretation providers and the music
//!   plan document.
//! * [`render`]: Standard MIDI File output and playback chunks.
//!
//! Every generator is a pure function of its inputs and a seed; see [`rng`].

pub mod canonical;
pub mod corpus;
pub mod hexagram;
pub mod interpret;
pub mod music;
pub mod render;
pub mod rng;

pub use corpus::{Corpus, CorpusEntry, CorpusError};
pub use hexagram::{
    build_hexagram, derive_zhi_gua, line_from_toss, toss_coins, CastingRecord, ChangingLines, Coin, CoinToss, Hexagram,
    HexagramError, Line, LineKind, Pattern, Polarity, Trigram,
};
pub use rng::ChanceRng;
