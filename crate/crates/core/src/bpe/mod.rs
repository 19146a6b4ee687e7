//! Byte-pair encoding for open-vocabulary subword segmentation.
//!
//! Learning starts from per-word character spellings plus an end-of-word
//! symbol, then repeatedly merges the most frequent adjacent symbol pair
//! into a new symbol. The rank-ordered list of merges forms a [`MergeTable`]
//! that can segment arbitrary text into subword units; a continuation
//! marker (`@@`) on non-final segments makes segmentation reversible.

mod apply;
mod learn;

pub use apply::{
    apply_bpe, desegment_line, has_dangling_marker, mean_segments_per_word, segment_line,
    Segmenter,
};
pub use learn::{build_vocab, learn_bpe, learn_joint_bpe, PairStats, VocabCounts};

use std::cmp::Ordering;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Literal used for the end-of-word symbol in serialized tables and when
/// comparing symbols. It never appears in segmented output.
pub const EOW_LITERAL: &str = "</w>";

/// Continuation marker appended to non-final segments of a word.
pub const CONTINUATION_MARKER: &str = "@@";

/// One subword symbol: a run of characters, optionally carrying the
/// end-of-word flag. The flag lives outside the text so user text that
/// happens to contain the serialized literal stays distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    text: String,
    eow: bool,
}

impl Symbol {
    /// An ordinary symbol with no end-of-word flag.
    pub fn plain(text: impl Into<String>) -> Self {
        Symbol {
            text: text.into(),
            eow: false,
        }
    }

    /// A word-final symbol carrying the end-of-word flag.
    pub fn word_final(text: impl Into<String>) -> Self {
        Symbol {
            text: text.into(),
            eow: true,
        }
    }

    /// The bare end-of-word marker appended to every initial spelling.
    pub fn eow_marker() -> Self {
        Symbol {
            text: String::new(),
            eow: true,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn is_eow(&self) -> bool {
        self.eow
    }

    /// True for the bare marker that has not been merged onto a character.
    pub fn is_bare_eow(&self) -> bool {
        self.eow && self.text.is_empty()
    }

    /// Serialized form: the text followed by `</w>` when word-final.
    pub fn rendered(&self) -> String {
        if self.eow {
            format!("{}{}", self.text, EOW_LITERAL)
        } else {
            self.text.clone()
        }
    }

    /// Parses the serialized form, peeling one trailing `</w>`.
    pub fn parse(s: &str) -> Self {
        match s.strip_suffix(EOW_LITERAL) {
            Some(rest) => Symbol::word_final(rest),
            None => Symbol::plain(s),
        }
    }

    /// Concatenation of two adjacent symbols, as produced by a merge.
    pub fn fuse(left: &Symbol, right: &Symbol) -> Symbol {
        Symbol {
            text: format!("{}{}", left.text, right.text),
            eow: left.eow || right.eow,
        }
    }

    fn rendered_chars(&self) -> impl Iterator<Item = char> + '_ {
        let suffix = if self.eow { EOW_LITERAL } else { "" };
        self.text.chars().chain(suffix.chars())
    }
}

impl Ord for Symbol {
    /// Orders by the serialized form, so ties in learning break the same
    /// way on every platform. The flag disambiguates the pathological case
    /// where user text literally ends in the end-of-word literal.
    fn cmp(&self, other: &Self) -> Ordering {
        self.rendered_chars()
            .cmp(other.rendered_chars())
            .then_with(|| self.eow.cmp(&other.eow))
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.eow {
            write!(f, "{}{}", self.text, EOW_LITERAL)
        } else {
            f.write_str(&self.text)
        }
    }
}

/// A word as a sequence of symbols, always ending in a word-final symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSpelling {
    symbols: Vec<Symbol>,
}

impl WordSpelling {
    /// Initial spelling: one symbol per character plus the bare marker.
    pub fn of_word(word: &str) -> Self {
        let mut symbols: Vec<Symbol> =
            word.chars().map(|c| Symbol::plain(c.to_string())).collect();
        symbols.push(Symbol::eow_marker());
        WordSpelling { symbols }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Reconstructs the original word by concatenating symbol texts.
    pub fn word(&self) -> String {
        self.symbols.iter().map(|s| s.text.as_str()).collect()
    }

    /// Merges every adjacent `(left, right)` occurrence, leftmost first and
    /// non-overlapping. Returns false when the pair does not occur.
    pub fn merge_pair(&mut self, left: &Symbol, right: &Symbol) -> bool {
        if !has_adjacent_pair(&self.symbols, left, right) {
            return false;
        }
        self.symbols = merge_adjacent(&self.symbols, left, right);
        true
    }

    /// Adjacent symbol pairs in order.
    pub fn pairs(&self) -> impl Iterator<Item = (&Symbol, &Symbol)> {
        self.symbols.windows(2).map(|w| (&w[0], &w[1]))
    }
}

pub(crate) fn has_adjacent_pair(symbols: &[Symbol], left: &Symbol, right: &Symbol) -> bool {
    symbols
        .windows(2)
        .any(|w| &w[0] == left && &w[1] == right)
}

/// One left-to-right sweep replacing non-overlapping `(left, right)`
/// occurrences with the fused symbol. `aaa` under `(a, a)` becomes `aa a`.
pub(crate) fn merge_adjacent(symbols: &[Symbol], left: &Symbol, right: &Symbol) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && &symbols[i] == left && &symbols[i + 1] == right {
            out.push(Symbol::fuse(left, right));
            i += 2;
        } else {
            out.push(symbols[i].clone());
            i += 1;
        }
    }
    out
}

/// A learned merge operation. Rank is the learning order, starting at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeRule {
    pub left: Symbol,
    pub right: Symbol,
    pub rank: u32,
}

impl MergeRule {
    pub fn pair(&self) -> (&Symbol, &Symbol) {
        (&self.left, &self.right)
    }
}

/// Rank-ordered list of merge rules. Truncating to the first k rules yields
/// exactly the table a k-merge run on the same corpus would have learned.
#[derive(Debug, Clone, Default)]
pub struct MergeTable {
    rules: Vec<MergeRule>,
    source_note: String,
}

/// Tables are equal when their rules are; the provenance note is not part
/// of the model and is not serialized.
impl PartialEq for MergeTable {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Eq for MergeTable {}

impl MergeTable {
    /// Builds a table from rules, validating that ranks are 0..n with no
    /// gaps and that no pair repeats.
    pub fn new(rules: Vec<MergeRule>, source_note: impl Into<String>) -> Result<Self> {
        for (i, rule) in rules.iter().enumerate() {
            if rule.rank as usize != i {
                return Err(Error::format(format!(
                    "merge rule at position {i} has rank {}",
                    rule.rank
                )));
            }
        }
        for i in 0..rules.len() {
            for j in i + 1..rules.len() {
                if rules[i].left == rules[j].left && rules[i].right == rules[j].right {
                    return Err(Error::format(format!(
                        "duplicate merge pair at ranks {i} and {j}"
                    )));
                }
            }
        }
        Ok(MergeTable {
            rules,
            source_note: source_note.into(),
        })
    }

    pub(crate) fn from_rules_unchecked(rules: Vec<MergeRule>, source_note: String) -> Self {
        MergeTable { rules, source_note }
    }

    pub fn rules(&self) -> &[MergeRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn source_note(&self) -> &str {
        &self.source_note
    }

    /// The table restricted to its first `k` rules.
    pub fn truncated(&self, k: usize) -> MergeTable {
        let k = k.min(self.rules.len());
        MergeTable {
            rules: self.rules[..k].to_vec(),
            source_note: format!("{} (truncated to {k} rules)", self.source_note),
        }
    }

    /// Builds a per-word segmenter over this table.
    pub fn segmenter(&self) -> Segmenter {
        Segmenter::from_tables(&[self])
    }

    /// Writes the table in its file format: a header line
    /// `#bpe-merges v1 count=<N>` followed by one `<left> <right>` rule per
    /// line in rank order.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "#bpe-merges v1 count={}", self.rules.len())?;
        for rule in &self.rules {
            writeln!(writer, "{} {}", rule.left.rendered(), rule.right.rendered())?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::file(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write_to(&mut writer)?;
        writer.flush()?;
        Ok(())
    }

    /// Parses a table from its file format.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let lines = crate::textio::read_lines(reader)?;
        let mut iter = lines.iter();
        let header = iter.next().ok_or_else(|| Error::format("empty merge table file"))?;
        let count = parse_header(header)?;
        let mut rules = Vec::with_capacity(count);
        for (lineno, line) in iter.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (l, r) = line.split_once(' ').ok_or_else(|| {
                Error::format(format!("merge rule on line {} has no separator", lineno + 2))
            })?;
            rules.push(MergeRule {
                left: Symbol::parse(l),
                right: Symbol::parse(r),
                rank: rules.len() as u32,
            });
        }
        if rules.len() != count {
            return Err(Error::format(format!(
                "header declares {count} rules but file contains {}",
                rules.len()
            )));
        }
        Ok(MergeTable {
            rules,
            source_note: String::new(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        let mut table = Self::read_from(BufReader::new(file))?;
        table.source_note = path.display().to_string();
        Ok(table)
    }
}

fn parse_header(header: &str) -> Result<usize> {
    let rest = header
        .strip_prefix("#bpe-merges v1 count=")
        .ok_or_else(|| Error::format(format!("bad merge table header: {header:?}")))?;
    rest.parse::<usize>()
        .map_err(|_| Error::format(format!("bad merge count in header: {header:?}")))
}
