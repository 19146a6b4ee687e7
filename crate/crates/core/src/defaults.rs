//! Default hyperparameters used across the toolkit and its shipped configs.
//!
//! Values that only matter to an external trainer or decoder (beam size,
//! validation cadence) are recorded here as constants so pipeline configs
//! can carry them alongside the settings this toolkit acts on.

/// Number of merge operations learned per language pair.
pub const MERGE_OPERATIONS: usize = 89_500;

/// Size of the n-best list used for rescoring.
pub const NBEST_SIZE: usize = 50;

/// Beam size used by the decoder that produces n-best lists.
pub const BEAM_SIZE: usize = 12;

/// Maximum sentence length (tokens) kept by corpus filtering.
pub const MAX_SENTENCE_LEN: usize = 50;

/// Number of final checkpoints combined into an ensemble.
pub const ENSEMBLE_CHECKPOINTS: usize = 4;

/// Minibatches between validation runs.
pub const VALIDATE_EVERY: u64 = 10_000;

/// Minibatches between checkpoint saves.
pub const SAVE_EVERY: u64 = 30_000;

/// Word-level dropout probability.
pub const P_WORD: f64 = 0.1;

/// Dropout probability for non-word layers.
pub const P_LAYER: f64 = 0.2;

/// Validations without improvement before early stopping.
pub const PATIENCE: usize = 10;
