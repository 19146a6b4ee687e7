//! Deterministic dropout mask plans for recurrent training.
//!
//! A plan holds exactly one keep-mask per layer, reused at every time
//! step, plus one keep decision per source and target token position.
//! Word decisions are drawn per occurrence, so a word repeated in a
//! sentence can lose any subset of its occurrences. Masks are unscaled
//! keep/drop bits; whether the consumer rescales by the keep probability
//! is recorded in the plan header, not applied here.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Mask-generation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutConfig {
    /// Probability of dropping a full word occurrence.
    pub p_word: f64,
    /// Drop probability for every non-word layer.
    pub p_layer: f64,
    /// Unit count per masked layer.
    pub layer_sizes: Vec<usize>,
    pub seed: u64,
    /// Whether the consumer applies inverted-dropout rescaling.
    pub scaled: bool,
}

impl Default for DropoutConfig {
    fn default() -> Self {
        DropoutConfig {
            p_word: crate::defaults::P_WORD,
            p_layer: crate::defaults::P_LAYER,
            layer_sizes: vec![1024, 1024],
            seed: 0,
            scaled: false,
        }
    }
}

impl DropoutConfig {
    fn validate(&self) -> Result<()> {
        for p in [self.p_word, self.p_layer] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { value: p });
            }
        }
        Ok(())
    }
}

/// Keep-masks for one sentence pair: one vector per layer and one keep bit
/// per token position on each side. True means keep.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskPlan {
    pub config: DropoutConfig,
    pub layer_keep: Vec<Vec<bool>>,
    pub src_keep: Vec<bool>,
    pub tgt_keep: Vec<bool>,
}

/// Draws a plan. Identical `(config, src_len, tgt_len)` always produce the
/// identical plan: layers are drawn in order, then source positions, then
/// target positions, from one ChaCha8 stream seeded with `config.seed`.
pub fn make_mask_plan(config: &DropoutConfig, src_len: usize, tgt_len: usize) -> Result<MaskPlan> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw = |p: f64| -> bool {
        // Uniform in [0, 1): keep unless the draw falls below p.
        rng.gen::<f64>() >= p
    };
    let layer_keep = config
        .layer_sizes
        .iter()
        .map(|&size| (0..size).map(|_| draw(config.p_layer)).collect())
        .collect();
    let src_keep = (0..src_len).map(|_| draw(config.p_word)).collect();
    let tgt_keep = (0..tgt_len).map(|_| draw(config.p_word)).collect();
    Ok(MaskPlan {
        config: config.clone(),
        layer_keep,
        src_keep,
        tgt_keep,
    })
}

impl MaskPlan {
    /// Writes the plan format: a header line
    /// `#maskplan v1 seed=<s> p_word=<..> p_layer=<..> scaled=<0|1>`,
    /// one `L<i> <bits>` line per layer, then `WSRC <bits>` and
    /// `WTGT <bits>`. A bit of 1 keeps the unit.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(
            writer,
            "#maskplan v1 seed={} p_word={} p_layer={} scaled={}",
            self.config.seed,
            self.config.p_word,
            self.config.p_layer,
            if self.config.scaled { 1 } else { 0 }
        )?;
        for (i, mask) in self.layer_keep.iter().enumerate() {
            writeln!(writer, "L{i} {}", bits(mask))?;
        }
        writeln!(writer, "WSRC {}", bits(&self.src_keep))?;
        writeln!(writer, "WTGT {}", bits(&self.tgt_keep))?;
        Ok(())
    }

    /// Parses the plan format back.
    pub fn read_from<R: BufRead>(reader: R) -> Result<MaskPlan> {
        let lines = crate::textio::read_lines(reader)?;
        let mut iter = lines.iter();
        let header = iter
            .next()
            .ok_or_else(|| Error::format("empty mask plan"))?;
        let config = parse_header(header)?;
        let mut layer_keep = Vec::new();
        let mut src_keep = None;
        let mut tgt_keep = None;
        for line in iter {
            if line.is_empty() {
                continue;
            }
            let (tag, mask) = line
                .split_once(' ')
                .ok_or_else(|| Error::format(format!("bad mask line {line:?}")))?;
            let mask = parse_bits(mask)?;
            match tag {
                "WSRC" => src_keep = Some(mask),
                "WTGT" => tgt_keep = Some(mask),
                tag if tag.starts_with('L') => layer_keep.push(mask),
                _ => return Err(Error::format(format!("unknown mask tag {tag:?}"))),
            }
        }
        let mut config = config;
        config.layer_sizes = layer_keep.iter().map(Vec::len).collect();
        Ok(MaskPlan {
            config,
            layer_keep,
            src_keep: src_keep.ok_or_else(|| Error::format("missing WSRC line"))?,
            tgt_keep: tgt_keep.ok_or_else(|| Error::format("missing WTGT line"))?,
        })
    }
}

fn bits(mask: &[bool]) -> String {
    mask.iter().map(|&keep| if keep { '1' } else { '0' }).collect()
}

fn parse_bits(text: &str) -> Result<Vec<bool>> {
    text.chars()
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            other => Err(Error::format(format!("bad mask bit {other:?}"))),
        })
        .collect()
}

fn parse_header(header: &str) -> Result<DropoutConfig> {
    let rest = header
        .strip_prefix("#maskplan v1 ")
        .ok_or_else(|| Error::format(format!("bad mask plan header {header:?}")))?;
    let mut config = DropoutConfig {
        layer_sizes: Vec::new(),
        ..DropoutConfig::default()
    };
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::format(format!("bad header field {field:?}")))?;
        match key {
            "seed" => config.seed = parse_num(value, "seed")?,
            "p_word" => config.p_word = parse_num(value, "p_word")?,
            "p_layer" => config.p_layer = parse_num(value, "p_layer")?,
            "scaled" => config.scaled = value == "1",
            _ => return Err(Error::format(format!("unknown header field {key:?}"))),
        }
    }
    Ok(config)
}

fn parse_num<T: std::str::FromStr>(value: &str, name: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::format(format!("bad {name} value {value:?}")))
}
