//! Preprocessing, corpus construction, and n-best reranking toolkit for
//! neural machine translation pipelines.
//!
//! The crate covers the deterministic parts of an NMT system: subword
//! segmentation via byte-pair encoding (including joint and cross-alphabet
//! tables), Romanian diacritic normalization, synthetic-corpus mixing and
//! sampling, right-to-left rescoring of n-best lists, checkpoint bookkeeping,
//! corpus-level BLEU, and dropout mask planning. Every operation is a pure
//! function of its inputs and seeds, so pipeline outputs are reproducible
//! byte for byte.

pub mod bleu;
pub mod bpe;
pub mod corpus;
pub mod defaults;
pub mod diacritics;
pub mod dropout;
pub mod error;
pub mod rerank;
pub mod textio;
pub mod translit;

pub use error::{Error, Result};
