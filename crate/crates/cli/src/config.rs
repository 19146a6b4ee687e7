//! Pipeline configuration files: flat `key=value` lines, UTF-8, with `#`
//! comments. A config collects the per-language-pair settings one training
//! pipeline uses, including constants that only an external trainer or
//! decoder consumes.

use std::path::Path;

use mtprep::defaults;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub merges: usize,
    pub nbest_size: usize,
    pub beam_size: usize,
    pub max_len: usize,
    pub ensemble_k: usize,
    pub seed: u64,
    pub p_word: f64,
    pub p_layer: f64,
    pub patience: usize,
    pub validate_every: u64,
    pub save_every: u64,
    /// Strip diacritics from the source side before training.
    pub strip_diacritics: bool,
    /// Learn cross-alphabet tables via transliteration.
    pub biscript: bool,
    /// Rerank n-best output with a reversed-target model.
    pub rerank_r2l: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            merges: defaults::MERGE_OPERATIONS,
            nbest_size: defaults::NBEST_SIZE,
            beam_size: defaults::BEAM_SIZE,
            max_len: defaults::MAX_SENTENCE_LEN,
            ensemble_k: defaults::ENSEMBLE_CHECKPOINTS,
            seed: 1,
            p_word: defaults::P_WORD,
            p_layer: defaults::P_LAYER,
            patience: defaults::PATIENCE,
            validate_every: defaults::VALIDATE_EVERY,
            save_every: defaults::SAVE_EVERY,
            strip_diacritics: false,
            biscript: false,
            rerank_r2l: false,
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig, CliError> {
        let mut config = PipelineConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::input(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                CliError::input(format!("config line {}: bad {what} value {value:?}", lineno + 1))
            };
            match key {
                "merges" => config.merges = value.parse().map_err(|_| bad("merges"))?,
                "nbest_size" => config.nbest_size = value.parse().map_err(|_| bad("nbest_size"))?,
                "beam_size" => config.beam_size = value.parse().map_err(|_| bad("beam_size"))?,
                "max_len" => config.max_len = value.parse().map_err(|_| bad("max_len"))?,
                "ensemble_k" => config.ensemble_k = value.parse().map_err(|_| bad("ensemble_k"))?,
                "seed" => config.seed = value.parse().map_err(|_| bad("seed"))?,
                "p_word" => config.p_word = value.parse().map_err(|_| bad("p_word"))?,
                "p_layer" => config.p_layer = value.parse().map_err(|_| bad("p_layer"))?,
                "patience" => config.patience = value.parse().map_err(|_| bad("patience"))?,
                "validate_every" => {
                    config.validate_every = value.parse().map_err(|_| bad("validate_every"))?
                }
                "save_every" => config.save_every = value.parse().map_err(|_| bad("save_every"))?,
                "strip_diacritics" => config.strip_diacritics = parse_flag(value, lineno + 1)?,
                "biscript" => config.biscript = parse_flag(value, lineno + 1)?,
                "rerank_r2l" => config.rerank_r2l = parse_flag(value, lineno + 1)?,
                other => {
                    return Err(CliError::input(format!(
                        "config line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        PipelineConfig::parse(&text)
    }

    /// Loads the given config, or the defaults when none is named.
    pub fn load_or_default(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
        match path {
            Some(path) => PipelineConfig::load(path),
            None => Ok(PipelineConfig::default()),
        }
    }
}

fn parse_flag(value: &str, lineno: usize) -> Result<bool, CliError> {
    match value {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(CliError::input(format!(
            "config line {lineno}: flag must be 0 or 1, found {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_standard_settings() {
        let config = PipelineConfig::default();
        assert_eq!(config.merges, 89_500);
        assert_eq!(config.nbest_size, 50);
        assert_eq!(config.beam_size, 12);
        assert_eq!(config.max_len, 50);
        assert_eq!(config.ensemble_k, 4);
        assert_eq!(config.p_word, 0.1);
        assert_eq!(config.p_layer, 0.2);
        assert_eq!(config.validate_every, 10_000);
        assert_eq!(config.save_every, 30_000);
    }

    #[test]
    fn parse_overrides_and_comments() {
        let text = "# pair config\nmerges = 1000\nbiscript=1\nseed=9\n";
        let config = PipelineConfig::parse(text).unwrap();
        assert_eq!(config.merges, 1000);
        assert!(config.biscript);
        assert_eq!(config.seed, 9);
        assert_eq!(config.max_len, 50);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::parse("nope=1\n").is_err());
        assert!(PipelineConfig::parse("biscript=yes\n").is_err());
    }
}
