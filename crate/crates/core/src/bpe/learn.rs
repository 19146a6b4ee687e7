//! Merge-table learning: vocabulary extraction and greedy pair merging.
//!
//! Each round merges the most frequent adjacent symbol pair across the
//! segmented vocabulary. Frequency ties break on the lexicographically
//! smallest serialized `(left, right)` pair, so runs are reproducible.
//! Learning stops once the best pair occurs fewer than twice.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::io::BufRead;

use crate::error::{Error, Result};

use super::{MergeRule, MergeTable, Symbol, WordSpelling};

/// A pair has to occur at least this often to be merged.
const MIN_PAIR_COUNT: u64 = 2;

/// Word frequencies extracted from a training corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VocabCounts {
    counts: HashMap<String, u64>,
}

impl VocabCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `word`.
    pub fn add(&mut self, word: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(word.to_owned()).or_insert(0) += count;
    }

    /// Sums another vocabulary into this one.
    pub fn merge(&mut self, other: &VocabCounts) {
        for (word, count) in &other.counts {
            self.add(word, *count);
        }
    }

    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total token count across all words.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, c)| (w.as_str(), *c))
    }

    /// Entries sorted by word, for deterministic processing.
    pub fn sorted_entries(&self) -> Vec<(String, u64)> {
        let mut entries: Vec<(String, u64)> =
            self.counts.iter().map(|(w, c)| (w.clone(), *c)).collect();
        entries.sort();
        entries
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for VocabCounts {
    fn from_iter<T: IntoIterator<Item = (S, u64)>>(iter: T) -> Self {
        let mut vocab = VocabCounts::new();
        for (word, count) in iter {
            vocab.add(word.as_ref(), count);
        }
        vocab
    }
}

/// Counts whitespace-delimited tokens in a line-oriented text stream.
pub fn build_vocab<R: BufRead>(reader: R) -> Result<VocabCounts> {
    let mut vocab = VocabCounts::new();
    for line in crate::textio::read_lines(reader)? {
        for token in line.split_whitespace() {
            vocab.add(token, 1);
        }
    }
    Ok(vocab)
}

type Pair = (Symbol, Symbol);

/// Adjacent-pair bookkeeping over the segmented vocabulary: corpus
/// frequency per pair, plus the set of words each pair occurs in.
#[derive(Debug, Default)]
pub struct PairStats {
    counts: HashMap<Pair, u64>,
    index: HashMap<Pair, HashSet<usize>>,
}

impl PairStats {
    /// Builds stats from scratch over segmented words.
    pub fn build(words: &[(WordSpelling, u64)]) -> Self {
        let mut stats = PairStats::default();
        for (i, (spelling, count)) in words.iter().enumerate() {
            stats.add_word(i, spelling, *count);
        }
        stats
    }

    fn add_word(&mut self, word_index: usize, spelling: &WordSpelling, count: u64) {
        for (l, r) in spelling.pairs() {
            let pair = (l.clone(), r.clone());
            *self.counts.entry(pair.clone()).or_insert(0) += count;
            self.index.entry(pair).or_default().insert(word_index);
        }
    }

    fn remove_word(&mut self, word_index: usize, spelling: &WordSpelling, count: u64) {
        for (l, r) in spelling.pairs() {
            let pair = (l.clone(), r.clone());
            let stale = {
                let entry = self.counts.get_mut(&pair).expect("pair count underflow");
                *entry -= count;
                *entry == 0
            };
            if stale {
                self.counts.remove(&pair);
                self.index.remove(&pair);
            }
        }
        // A pair may occur several times in one word; sweep the index once
        // the word no longer contains it at all.
        let remaining: HashSet<Pair> = spelling
            .pairs()
            .map(|(l, r)| (l.clone(), r.clone()))
            .collect();
        for pair in remaining {
            if let Some(set) = self.index.get_mut(&pair) {
                set.remove(&word_index);
                if set.is_empty() {
                    self.index.remove(&pair);
                }
            }
        }
    }

    pub fn count(&self, pair: &Pair) -> u64 {
        self.counts.get(pair).copied().unwrap_or(0)
    }

    pub fn words_with(&self, pair: &Pair) -> impl Iterator<Item = usize> + '_ {
        self.index.get(pair).into_iter().flatten().copied()
    }

    pub fn counts(&self) -> &HashMap<Pair, u64> {
        &self.counts
    }

    /// From-scratch recount, the oracle the incremental counts must match.
    pub fn recount(words: &[(WordSpelling, u64)]) -> HashMap<Pair, u64> {
        let mut counts: HashMap<Pair, u64> = HashMap::new();
        for (spelling, count) in words {
            for (l, r) in spelling.pairs() {
                *counts.entry((l.clone(), r.clone())).or_insert(0) += count;
            }
        }
        counts
    }
}

/// Max-heap entry ordered by count, then by smallest serialized pair.
/// Entries go stale as counts change; `step` revalidates on pop.
struct Candidate {
    count: u64,
    pair: Pair,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Incremental merge learner. Each `step` merges the current best pair and
/// updates pair statistics for the words it touched.
pub(crate) struct Learner {
    words: Vec<(WordSpelling, u64)>,
    stats: PairStats,
    heap: BinaryHeap<Candidate>,
    rules: Vec<MergeRule>,
}

impl Learner {
    pub fn new(vocab: &VocabCounts) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::EmptyVocab);
        }
        let words: Vec<(WordSpelling, u64)> = vocab
            .sorted_entries()
            .into_iter()
            .map(|(word, count)| (WordSpelling::of_word(&word), count))
            .collect();
        let stats = PairStats::build(&words);
        let mut heap = BinaryHeap::with_capacity(stats.counts.len());
        for (pair, count) in &stats.counts {
            if *count >= MIN_PAIR_COUNT {
                heap.push(Candidate {
                    count: *count,
                    pair: pair.clone(),
                });
            }
        }
        Ok(Learner {
            words,
            stats,
            heap,
            rules: Vec::new(),
        })
    }

    /// Pops candidates until one matches its live count. Stale entries are
    /// re-pushed with their current count when still mergeable.
    fn best_pair(&mut self) -> Option<(Pair, u64)> {
        while let Some(candidate) = self.heap.pop() {
            let live = self.stats.count(&candidate.pair);
            if live == candidate.count {
                return Some((candidate.pair, live));
            }
            if live >= MIN_PAIR_COUNT {
                self.heap.push(Candidate {
                    count: live,
                    pair: candidate.pair,
                });
            }
        }
        None
    }

    /// Merges the best pair. Returns None when no pair occurs twice.
    pub fn step(&mut self) -> Option<&MergeRule> {
        let (pair, _count) = self.best_pair()?;
        let rank = self.rules.len() as u32;
        let affected: Vec<usize> = {
            let mut ids: Vec<usize> = self.stats.words_with(&pair).collect();
            ids.sort_unstable();
            ids
        };
        for word_index in affected {
            let count = self.words[word_index].1;
            let old = self.words[word_index].0.clone();
            self.stats.remove_word(word_index, &old, count);
            self.words[word_index].0.merge_pair(&pair.0, &pair.1);
            let new = self.words[word_index].0.clone();
            self.stats.add_word(word_index, &new, count);
            for (l, r) in new.pairs() {
                let p = (l.clone(), r.clone());
                let live = self.stats.count(&p);
                if live >= MIN_PAIR_COUNT {
                    self.heap.push(Candidate {
                        count: live,
                        pair: p,
                    });
                }
            }
        }
        self.rules.push(MergeRule {
            left: pair.0,
            right: pair.1,
            rank,
        });
        self.rules.last()
    }

    pub fn rules(&self) -> &[MergeRule] {
        &self.rules
    }

    #[cfg(test)]
    pub fn stats(&self) -> &PairStats {
        &self.stats
    }

    #[cfg(test)]
    pub fn words(&self) -> &[(WordSpelling, u64)] {
        &self.words
    }

    pub fn into_table(self, source_note: String) -> MergeTable {
        MergeTable::from_rules_unchecked(self.rules, source_note)
    }
}

/// Learns up to `num_merges` merge rules from word frequencies.
pub fn learn_bpe(vocab: &VocabCounts, num_merges: usize) -> Result<MergeTable> {
    let mut learner = Learner::new(vocab)?;
    for _ in 0..num_merges {
        if learner.step().is_none() {
            break;
        }
    }
    let note = format!(
        "learned {} merges from a vocabulary of {} words",
        learner.rules().len(),
        vocab.len()
    );
    Ok(learner.into_table(note))
}

/// Learns one table over the combined source and target vocabularies, so
/// both sides of a language pair segment consistently.
pub fn learn_joint_bpe<R1: BufRead, R2: BufRead>(
    source_corpus: R1,
    target_corpus: R2,
    num_merges: usize,
) -> Result<MergeTable> {
    let mut vocab = build_vocab(source_corpus)?;
    vocab.merge(&build_vocab(target_corpus)?);
    learn_bpe(&vocab, num_merges)
}
