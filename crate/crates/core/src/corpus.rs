//! Training-corpus construction: sampling, mixing, length filtering, and
//! shuffling of aligned parallel data.
//!
//! Every randomized operation takes an explicit 64-bit seed and draws from
//! ChaCha8, so outputs are identical across runs and platforms.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::textio;

/// One aligned sentence pair.
pub type Pair = (String, String);

/// A pair of aligned files on disk. Line i of the source file translates
/// line i of the target file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub source_path: PathBuf,
    pub target_path: PathBuf,
    pub line_count: usize,
}

impl ParallelCorpus {
    /// Opens a corpus, verifying that both sides have the same line count.
    pub fn open(source_path: impl Into<PathBuf>, target_path: impl Into<PathBuf>) -> Result<Self> {
        let source_path = source_path.into();
        let target_path = target_path.into();
        let source_lines = count_lines(&source_path)?;
        let target_lines = count_lines(&target_path)?;
        if source_lines != target_lines {
            return Err(Error::AlignmentMismatch {
                source_lines,
                target_lines,
            });
        }
        Ok(ParallelCorpus {
            source_path,
            target_path,
            line_count: source_lines,
        })
    }

    /// Reads both sides into aligned pairs.
    pub fn read_pairs(&self) -> Result<Vec<Pair>> {
        let src = textio::read_lines_path(&self.source_path)?;
        let tgt = textio::read_lines_path(&self.target_path)?;
        if src.len() != tgt.len() {
            return Err(Error::AlignmentMismatch {
                source_lines: src.len(),
                target_lines: tgt.len(),
            });
        }
        Ok(src.into_iter().zip(tgt).collect())
    }

    /// Writes aligned pairs to a new file pair.
    pub fn write_pairs(
        source_path: impl Into<PathBuf>,
        target_path: impl Into<PathBuf>,
        pairs: &[Pair],
    ) -> Result<Self> {
        let source_path = source_path.into();
        let target_path = target_path.into();
        let src: Vec<&str> = pairs.iter().map(|(s, _)| s.as_str()).collect();
        let tgt: Vec<&str> = pairs.iter().map(|(_, t)| t.as_str()).collect();
        textio::write_lines_path(&source_path, &src)?;
        textio::write_lines_path(&target_path, &tgt)?;
        Ok(ParallelCorpus {
            source_path,
            target_path,
            line_count: pairs.len(),
        })
    }
}

fn count_lines(path: &Path) -> Result<usize> {
    use std::io::BufRead;
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = BufReader::new(file);
    let mut count = 0usize;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            break;
        }
        count += 1;
    }
    Ok(count)
}

/// Uniform sample of `n` items without replacement, deterministic per seed.
///
/// Single-pass reservoir sampling (algorithm R) over ChaCha8. Surviving
/// items keep their reservoir slots, so a full-size sample returns the
/// input order unchanged. Errors when the stream holds fewer than `n`
/// items.
pub fn reservoir_sample<T, I>(items: I, n: usize, seed: u64) -> Result<Vec<T>>
where
    I: IntoIterator<Item = T>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<T> = Vec::with_capacity(n.min(1 << 20));
    let mut seen = 0usize;
    for item in items {
        if seen < n {
            reservoir.push(item);
        } else {
            let slot = rng.gen_range(0..=seen);
            if slot < n {
                reservoir[slot] = item;
            }
        }
        seen += 1;
    }
    if seen < n {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: seen,
        });
    }
    Ok(reservoir)
}

/// Keeps a pair only when both sides have at most `max_len` whitespace
/// tokens. Filtering twice changes nothing.
pub fn length_filter(pairs: Vec<Pair>, max_len: usize) -> Vec<Pair> {
    pairs
        .into_iter()
        .filter(|(s, t)| {
            s.split_whitespace().count() <= max_len && t.split_whitespace().count() <= max_len
        })
        .collect()
}

/// Applies one seeded permutation to the pair sequence.
pub fn shuffle_pairs(mut pairs: Vec<Pair>, seed: u64) -> Vec<Pair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    pairs
}

/// Seeded permutation of single lines, for monolingual streams.
pub fn shuffle_lines(mut lines: Vec<String>, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lines.shuffle(&mut rng);
    lines
}

/// One ingredient of a corpus blend: a corpus, a copy count, and an
/// optional seeded sample size used instead of the full corpus.
#[derive(Debug, Clone)]
pub struct MixComponent {
    pub corpus: ParallelCorpus,
    pub copies: usize,
    pub sample: Option<usize>,
}

impl MixComponent {
    /// Pairs contributed per copy.
    pub fn pairs_per_copy(&self) -> usize {
        self.sample.unwrap_or(self.corpus.line_count)
    }
}

/// Declarative description of a training-corpus blend.
#[derive(Debug, Clone)]
pub struct MixRecipe {
    pub components: Vec<MixComponent>,
    pub seed: u64,
    pub max_len: usize,
}

impl MixRecipe {
    /// Total output pair count the blend will produce.
    pub fn expected_line_count(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.copies * c.pairs_per_copy())
            .sum()
    }

    /// Parses the recipe format: `seed=<int>` and `max_len=<int>` header
    /// lines, then one `src<TAB>tgt<TAB>copies=<k>[<TAB>sample=<n>]` line
    /// per component. `#` comments and blank lines are skipped. Component
    /// paths are resolved relative to `base_dir` when given.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<MixRecipe> {
        let mut seed: Option<u64> = None;
        let mut max_len = crate::defaults::MAX_SENTENCE_LEN;
        let mut components = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(value) = line.strip_prefix("seed=") {
                seed = Some(parse_field(value, "seed", lineno + 1)?);
                continue;
            }
            if let Some(value) = line.strip_prefix("max_len=") {
                max_len = parse_field(value, "max_len", lineno + 1)?;
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 3 {
                return Err(Error::format(format!(
                    "recipe line {}: expected src<TAB>tgt<TAB>copies=<k>",
                    lineno + 1
                )));
            }
            let src = resolve(base_dir, fields[0]);
            let tgt = resolve(base_dir, fields[1]);
            let mut copies: Option<usize> = None;
            let mut sample: Option<usize> = None;
            for field in &fields[2..] {
                if let Some(value) = field.strip_prefix("copies=") {
                    copies = Some(parse_field(value, "copies", lineno + 1)?);
                } else if let Some(value) = field.strip_prefix("sample=") {
                    sample = Some(parse_field(value, "sample", lineno + 1)?);
                } else {
                    return Err(Error::format(format!(
                        "recipe line {}: unknown field {field:?}",
                        lineno + 1
                    )));
                }
            }
            let copies = copies.ok_or_else(|| {
                Error::format(format!("recipe line {}: missing copies=", lineno + 1))
            })?;
            if copies == 0 {
                return Err(Error::format(format!(
                    "recipe line {}: copies must be positive",
                    lineno + 1
                )));
            }
            let corpus = ParallelCorpus::open(src, tgt)?;
            if let Some(n) = sample {
                if n > corpus.line_count {
                    return Err(Error::SampleTooLarge {
                        requested: n,
                        available: corpus.line_count,
                    });
                }
            }
            components.push(MixComponent {
                corpus,
                copies,
                sample,
            });
        }
        if components.is_empty() {
            return Err(Error::format("recipe has no components"));
        }
        Ok(MixRecipe {
            components,
            seed: seed.unwrap_or(0),
            max_len,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<MixRecipe> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        MixRecipe::parse(&text, path.parent())
    }
}

fn resolve(base: Option<&Path>, path: &str) -> PathBuf {
    let p = PathBuf::from(path);
    match base {
        Some(base) if p.is_relative() => base.join(p),
        _ => p,
    }
}

fn parse_field<T: FromStr>(value: &str, name: &str, lineno: usize) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::format(format!("recipe line {lineno}: bad {name} value {value:?}")))
}

/// Materializes a blend: each component contributes `copies` copies of its
/// full pair list or of a seeded sample. Length filtering and shuffling are
/// separate pipeline steps, not part of mixing. Component i samples with
/// seed `recipe.seed + i` so samples are independent but reproducible.
pub fn mix_corpora(recipe: &MixRecipe) -> Result<Vec<Pair>> {
    let mut out = Vec::with_capacity(recipe.expected_line_count());
    for (i, component) in recipe.components.iter().enumerate() {
        let pairs = component.corpus.read_pairs()?;
        let selected = match component.sample {
            Some(n) => reservoir_sample(pairs, n, recipe.seed.wrapping_add(i as u64))?,
            None => pairs,
        };
        for _ in 0..component.copies {
            out.extend(selected.iter().cloned());
        }
    }
    Ok(out)
}

/// Corpus category in the blend report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CorpusLabel {
    Parallel,
    SyntheticToEn,
    SyntheticFromEn,
}

impl CorpusLabel {
    fn row_label(self) -> &'static str {
        match self {
            CorpusLabel::Parallel => "parallel",
            CorpusLabel::SyntheticToEn => "synthetic (*->EN)",
            CorpusLabel::SyntheticFromEn => "synthetic (EN->*)",
        }
    }

    pub const ALL: [CorpusLabel; 3] = [
        CorpusLabel::Parallel,
        CorpusLabel::SyntheticToEn,
        CorpusLabel::SyntheticFromEn,
    ];
}

impl FromStr for CorpusLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(CorpusLabel::Parallel),
            "synthetic-to-en" => Ok(CorpusLabel::SyntheticToEn),
            "synthetic-from-en" => Ok(CorpusLabel::SyntheticFromEn),
            other => Err(Error::format(format!("unknown corpus label {other:?}"))),
        }
    }
}

impl fmt::Display for CorpusLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.row_label())
    }
}

/// Per-category and total pair counts for a training blend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    rows: Vec<(CorpusLabel, u64)>,
}

impl CorpusStats {
    /// Aggregates labeled pair counts into the three report categories.
    pub fn from_components(components: &[(CorpusLabel, u64)]) -> CorpusStats {
        let rows = CorpusLabel::ALL
            .iter()
            .map(|label| {
                let sum = components
                    .iter()
                    .filter(|(l, _)| l == label)
                    .map(|(_, n)| n)
                    .sum();
                (*label, sum)
            })
            .collect();
        CorpusStats { rows }
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|(_, n)| n).sum()
    }

    pub fn count(&self, label: CorpusLabel) -> u64 {
        self.rows
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, n)| *n)
            .unwrap_or(0)
    }

    /// Plain-text table: one row per category plus a total, with exact
    /// pair counts and counts in millions.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<18} {:>12} {:>10}\n",
            "type", "pairs", "pairs(M)"
        ));
        for (label, count) in &self.rows {
            out.push_str(&format!(
                "{:<18} {:>12} {:>10.3}\n",
                label.row_label(),
                count,
                *count as f64 / 1_000_000.0
            ));
        }
        out.push_str(&format!(
            "{:<18} {:>12} {:>10.3}\n",
            "total",
            self.total(),
            self.total() as f64 / 1_000_000.0
        ));
        out
    }
}

/// Counts pairs per labeled corpus and aggregates them into a report.
pub fn corpus_stats(entries: &[(CorpusLabel, ParallelCorpus)]) -> CorpusStats {
    let components: Vec<(CorpusLabel, u64)> = entries
        .iter()
        .map(|(label, corpus)| (*label, corpus.line_count as u64))
        .collect();
    CorpusStats::from_components(&components)
}
