//! Applying a merge table to text.
//!
//! Rules fire in rank order: each rule replaces every adjacent occurrence
//! of its pair, leftmost first, before the next rule is considered. The
//! segmenter skips ranks that cannot match instead of scanning the whole
//! table, which gives identical output.

use std::collections::HashMap;

use super::{merge_adjacent, MergeTable, Symbol, WordSpelling, CONTINUATION_MARKER};

/// Rank plus a tier for stacked tables. The tier breaks the tie when two
/// tables contribute a rule at the same rank; lower tiers fire first.
type RankKey = (u32, u8);

/// Reusable word segmenter over one or more merge tables. Segmentations
/// are memoized per word, so repeated tokens cost one lookup.
pub struct Segmenter {
    ranks: HashMap<(Symbol, Symbol), RankKey>,
    cache: HashMap<String, Vec<Symbol>>,
}

impl Segmenter {
    /// Builds a segmenter over stacked tables. Rules keep their own ranks;
    /// the position of a table in `tables` is its tier at equal rank.
    pub fn from_tables(tables: &[&MergeTable]) -> Self {
        let mut ranks = HashMap::new();
        for (tier, table) in tables.iter().enumerate() {
            for rule in table.rules() {
                let key = (rule.left.clone(), rule.right.clone());
                let rank: RankKey = (rule.rank, tier as u8);
                // Keep the earliest firing position if tables share a pair.
                let entry = ranks.entry(key).or_insert(rank);
                if rank < *entry {
                    *entry = rank;
                }
            }
        }
        Segmenter {
            ranks,
            cache: HashMap::new(),
        }
    }

    /// Segments one word into subword symbols.
    pub fn apply_word(&mut self, word: &str) -> Vec<Symbol> {
        if let Some(hit) = self.cache.get(word) {
            return hit.clone();
        }
        let segments = apply_to_word(&self.ranks, word);
        self.cache.insert(word.to_owned(), segments.clone());
        segments
    }

    /// Segments every token of a whitespace-delimited line, rendering
    /// non-final segments with the continuation marker.
    pub fn segment_line(&mut self, line: &str) -> String {
        let mut out = String::with_capacity(line.len() + line.len() / 2);
        let mut first_token = true;
        for token in line.split_whitespace() {
            if !first_token {
                out.push(' ');
            }
            first_token = false;
            let segments = self.apply_word(token);
            render_segments(&segments, &mut out);
        }
        out
    }
}

fn apply_to_word(ranks: &HashMap<(Symbol, Symbol), RankKey>, word: &str) -> Vec<Symbol> {
    let spelling = WordSpelling::of_word(word);
    let mut symbols = spelling.symbols().to_vec();
    // Walk the table in rank order, jumping straight to the next rank that
    // occurs in the word. The floor enforces the single ascending pass:
    // pairs at or below an already-considered rank never fire.
    let mut floor: Option<RankKey> = None;
    loop {
        let mut best: Option<(RankKey, usize)> = None;
        for (i, w) in symbols.windows(2).enumerate() {
            if let Some(&rank) = ranks.get(&(w[0].clone(), w[1].clone())) {
                if floor.is_some_and(|f| rank <= f) {
                    continue;
                }
                if best.is_none_or(|(b, _)| rank < b) {
                    best = Some((rank, i));
                }
            }
        }
        match best {
            Some((rank, i)) => {
                let left = symbols[i].clone();
                let right = symbols[i + 1].clone();
                symbols = merge_adjacent(&symbols, &left, &right);
                floor = Some(rank);
            }
            None => break,
        }
    }
    // Expose the bare marker as a flag on the last character symbol when
    // no merge attached it; segments never include an empty final symbol.
    if symbols.len() > 1 && symbols.last().is_some_and(Symbol::is_bare_eow) {
        symbols.pop();
        let last = symbols.last_mut().unwrap();
        *last = Symbol::word_final(last.text().to_owned());
    }
    symbols
}

fn render_segments(segments: &[Symbol], out: &mut String) {
    let last = segments.len().saturating_sub(1);
    for (i, segment) in segments.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(segment.text());
        if i < last {
            out.push_str(CONTINUATION_MARKER);
        }
    }
}

/// Segments a single word with a throwaway segmenter. Batch callers should
/// build a [`Segmenter`] once instead.
pub fn apply_bpe(table: &MergeTable, word: &str) -> Vec<Symbol> {
    table.segmenter().apply_word(word)
}

/// Segments one line with a throwaway segmenter.
pub fn segment_line(table: &MergeTable, line: &str) -> String {
    table.segmenter().segment_line(line)
}

/// Mean number of segments per distinct word in `words`.
pub fn mean_segments_per_word<'a>(
    segmenter: &mut Segmenter,
    words: impl Iterator<Item = &'a str>,
) -> f64 {
    let mut total = 0usize;
    let mut n = 0usize;
    for word in words {
        total += segmenter.apply_word(word).len();
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        total as f64 / n as f64
    }
}

/// True when the final token of a segmented line still carries the
/// continuation marker, which a well-formed line never does.
pub fn has_dangling_marker(line: &str) -> bool {
    line.split_whitespace()
        .last()
        .is_some_and(|tok| tok.ends_with(CONTINUATION_MARKER))
}

/// Joins marker-carrying segments back into words. The inverse of
/// [`segment_line`] for any line that segmentation produced; a dangling
/// marker on the final token is stripped.
pub fn desegment_line(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut joining = false;
    for token in line.split_whitespace() {
        if !joining && !out.is_empty() {
            out.push(' ');
        }
        match token.strip_suffix(CONTINUATION_MARKER) {
            Some(stem) => {
                out.push_str(stem);
                joining = true;
            }
            None => {
                out.push_str(token);
                joining = false;
            }
        }
    }
    out
}
