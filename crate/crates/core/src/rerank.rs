//! N-best rescoring with right-to-left models, checkpoint ensembling, and
//! training-run bookkeeping (checkpoint selection, early stopping).
//!
//! A decoder emits up to n scored hypotheses per sentence. Rescoring
//! attaches further sentence-level log-probability columns (for example
//! from a model trained on reversed target text), combines the named
//! columns with a weighted mean, and picks the best hypothesis per
//! sentence.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::corpus::Pair;
use crate::error::{Error, Result};

/// One scored translation hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub sentence_id: u64,
    pub tokens: Vec<String>,
    scores: Vec<(String, f64)>,
    pub combined: Option<f64>,
}

impl Hypothesis {
    pub fn new(sentence_id: u64, tokens: Vec<String>) -> Self {
        Hypothesis {
            sentence_id,
            tokens,
            scores: Vec::new(),
            combined: None,
        }
    }

    pub fn score(&self, name: &str) -> Option<f64> {
        self.scores
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    /// Adds a named score. Names are unique per hypothesis.
    pub fn add_score(&mut self, name: &str, value: f64) -> Result<()> {
        if name.is_empty() || name.contains(['=', ' ']) {
            return Err(Error::format(format!("invalid score name {name:?}")));
        }
        if self.score(name).is_some() {
            return Err(Error::DuplicateScore {
                name: name.to_owned(),
            });
        }
        self.scores.push((name.to_owned(), value));
        Ok(())
    }

    pub fn scores(&self) -> &[(String, f64)] {
        &self.scores
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Hypotheses grouped by sentence id, with a declared per-sentence size cap.
#[derive(Debug, Clone, PartialEq)]
pub struct NBestList {
    entries: Vec<Hypothesis>,
    size: usize,
}

impl NBestList {
    /// Wraps hypotheses, checking that each sentence id forms one
    /// contiguous run of at most `size` entries (the largest group when
    /// `size` is not declared).
    pub fn from_entries(entries: Vec<Hypothesis>, size: Option<usize>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut max_group = 0usize;
        let mut i = 0;
        while i < entries.len() {
            let id = entries[i].sentence_id;
            if !seen.insert(id) {
                return Err(Error::format(format!(
                    "sentence {id} appears in more than one block"
                )));
            }
            let mut j = i;
            while j < entries.len() && entries[j].sentence_id == id {
                j += 1;
            }
            max_group = max_group.max(j - i);
            i = j;
        }
        let size = size.unwrap_or(max_group);
        if max_group > size {
            return Err(Error::format(format!(
                "a sentence has {max_group} hypotheses, more than the declared {size}"
            )));
        }
        Ok(NBestList { entries, size })
    }

    pub fn entries(&self) -> &[Hypothesis] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Contiguous per-sentence groups, in file order.
    pub fn groups(&self) -> impl Iterator<Item = &[Hypothesis]> {
        GroupIter {
            entries: &self.entries,
            pos: 0,
        }
    }

    /// Parses the n-best format: one hypothesis per line,
    /// `<sid> ||| <tokens> ||| <name>=<score> ... ||| <combined-or-blank>`.
    pub fn read_from<R: BufRead>(reader: R, size: Option<usize>) -> Result<Self> {
        let lines = crate::textio::read_lines(reader)?;
        let mut entries = Vec::with_capacity(lines.len());
        for (lineno, line) in lines.iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            entries.push(parse_hypothesis(line, lineno + 1)?);
        }
        NBestList::from_entries(entries, size)
    }

    pub fn load(path: impl AsRef<Path>, size: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read_from(std::io::BufReader::new(file), size)
    }

    /// Writes the list in its file format.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for hyp in &self.entries {
            let scores = hyp
                .scores
                .iter()
                .map(|(n, v)| format!("{n}={v}"))
                .collect::<Vec<_>>()
                .join(" ");
            let combined = hyp.combined.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                writer,
                "{} ||| {} ||| {} ||| {}",
                hyp.sentence_id,
                hyp.tokens.join(" "),
                scores,
                combined
            )?;
        }
        Ok(())
    }
}

struct GroupIter<'a> {
    entries: &'a [Hypothesis],
    pos: usize,
}

impl<'a> Iterator for GroupIter<'a> {
    type Item = &'a [Hypothesis];

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.entries.len() {
            return None;
        }
        let id = self.entries[self.pos].sentence_id;
        let start = self.pos;
        while self.pos < self.entries.len() && self.entries[self.pos].sentence_id == id {
            self.pos += 1;
        }
        Some(&self.entries[start..self.pos])
    }
}

fn parse_hypothesis(line: &str, lineno: usize) -> Result<Hypothesis> {
    let fields: Vec<&str> = line.split(" ||| ").collect();
    if fields.len() != 4 {
        return Err(Error::format(format!(
            "n-best line {lineno}: expected 4 ||| fields, found {}",
            fields.len()
        )));
    }
    let sentence_id: u64 = fields[0]
        .parse()
        .map_err(|_| Error::format(format!("n-best line {lineno}: bad sentence id")))?;
    let tokens = fields[1].split_whitespace().map(str::to_owned).collect();
    let mut hyp = Hypothesis::new(sentence_id, tokens);
    for entry in fields[2].split_whitespace() {
        let (name, value) = entry.split_once('=').ok_or_else(|| {
            Error::format(format!("n-best line {lineno}: bad score field {entry:?}"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::format(format!("n-best line {lineno}: bad score value")))?;
        hyp.add_score(name, value)?;
    }
    if !fields[3].is_empty() {
        hyp.combined = Some(fields[3].parse().map_err(|_| {
            Error::format(format!("n-best line {lineno}: bad combined score"))
        })?);
    }
    Ok(hyp)
}

/// Reverses the target token order of every pair; sources are untouched.
/// Applying it twice restores the corpus.
pub fn reverse_target(pairs: Vec<Pair>) -> Vec<Pair> {
    pairs
        .into_iter()
        .map(|(src, tgt)| (src, reverse_tokens(&tgt)))
        .collect()
}

/// Reverses the whitespace token order of one line.
pub fn reverse_tokens(line: &str) -> String {
    let mut tokens: Vec<&str> = line.split_whitespace().collect();
    tokens.reverse();
    tokens.join(" ")
}

/// Reverses every hypothesis's token order, keeping ids and scores. Used
/// to hand left-to-right output to a right-to-left model and to restore
/// that model's own output order.
pub fn reverse_hypotheses(nbest: &NBestList) -> NBestList {
    let entries = nbest
        .entries
        .iter()
        .map(|hyp| {
            let mut rev = hyp.clone();
            rev.tokens.reverse();
            rev
        })
        .collect();
    NBestList {
        entries,
        size: nbest.size,
    }
}

/// Attaches one score per hypothesis under `name`, order-aligned with the
/// list. Errors on length mismatch or a duplicate name.
pub fn attach_scores(nbest: &mut NBestList, name: &str, scores: &[f64]) -> Result<()> {
    if scores.len() != nbest.entries.len() {
        return Err(Error::LineCountMismatch {
            left: nbest.entries.len(),
            right: scores.len(),
        });
    }
    for (hyp, value) in nbest.entries.iter_mut().zip(scores) {
        hyp.add_score(name, *value)?;
    }
    Ok(())
}

/// Fills every hypothesis's combined score with the weighted mean of the
/// named columns. Uniform weights by default; with `length_normalize`
/// each column is divided by the token count first.
pub fn combine(
    nbest: &NBestList,
    score_names: &[String],
    weights: Option<&[f64]>,
    length_normalize: bool,
) -> Result<NBestList> {
    if score_names.is_empty() {
        return Err(Error::format("no score columns named"));
    }
    if let Some(w) = weights {
        if w.len() != score_names.len() {
            return Err(Error::LineCountMismatch {
                left: score_names.len(),
                right: w.len(),
            });
        }
        if w.iter().sum::<f64>() == 0.0 {
            return Err(Error::format("combination weights sum to zero"));
        }
    }
    let mut out = nbest.clone();
    for hyp in &mut out.entries {
        let mut total = 0.0;
        let mut weight_sum = 0.0;
        for (i, name) in score_names.iter().enumerate() {
            let raw = hyp.score(name).ok_or_else(|| Error::MissingScore {
                name: name.clone(),
                sentence_id: hyp.sentence_id,
            })?;
            let value = if length_normalize {
                raw / hyp.tokens.len().max(1) as f64
            } else {
                raw
            };
            let w = weights.map(|w| w[i]).unwrap_or(1.0);
            total += w * value;
            weight_sum += w;
        }
        hyp.combined = Some(total / weight_sum);
    }
    Ok(out)
}

/// Picks the hypothesis with the highest combined score in each sentence
/// group; ties keep the earliest (lowest-rank) hypothesis.
pub fn select_best(nbest: &NBestList) -> Result<Vec<Hypothesis>> {
    if nbest.is_empty() {
        return Err(Error::EmptyInput);
    }
    let combined_of = |hyp: &Hypothesis| {
        hyp.combined.ok_or_else(|| {
            Error::format(format!(
                "hypothesis for sentence {} has no combined score",
                hyp.sentence_id
            ))
        })
    };
    let mut selected = Vec::new();
    for group in nbest.groups() {
        let mut best = &group[0];
        let mut best_score = combined_of(best)?;
        for hyp in &group[1..] {
            let score = combined_of(hyp)?;
            if score > best_score {
                best = hyp;
                best_score = score;
            }
        }
        selected.push(best.clone());
    }
    Ok(selected)
}

/// Combines the named columns with a weighted mean and returns the best
/// hypothesis per sentence.
pub fn combine_and_select(
    nbest: &NBestList,
    score_names: &[String],
    weights: Option<&[f64]>,
) -> Result<Vec<Hypothesis>> {
    if nbest.is_empty() {
        return Err(Error::EmptyInput);
    }
    select_best(&combine(nbest, score_names, weights, false)?)
}

/// Element-wise uniform mean of k aligned score columns. A single column
/// comes back unchanged.
pub fn ensemble_scores(columns: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = columns.first().ok_or(Error::EmptyInput)?;
    for column in &columns[1..] {
        if column.len() != first.len() {
            return Err(Error::LineCountMismatch {
                left: first.len(),
                right: column.len(),
            });
        }
    }
    let k = columns.len() as f64;
    Ok((0..first.len())
        .map(|i| columns.iter().map(|c| c[i]).sum::<f64>() / k)
        .collect())
}

/// One checkpoint-save event in a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointEvent {
    pub minibatch: u64,
    pub checkpoint_id: String,
    pub validation_score: Option<f64>,
}

/// Save events in training order, minibatch indices strictly increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckpointLog {
    events: Vec<CheckpointEvent>,
}

impl CheckpointLog {
    pub fn new(events: Vec<CheckpointEvent>) -> Result<Self> {
        for pair in events.windows(2) {
            if pair[1].minibatch <= pair[0].minibatch {
                return Err(Error::format(format!(
                    "minibatch indices not strictly increasing: {} then {}",
                    pair[0].minibatch, pair[1].minibatch
                )));
            }
        }
        Ok(CheckpointLog { events })
    }

    pub fn events(&self) -> &[CheckpointEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Parses `<minibatch><TAB><checkpoint_id>[<TAB><bleu>]` lines.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let lines = crate::textio::read_lines(reader)?;
        let mut events = Vec::new();
        for (lineno, line) in lines.iter().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(Error::format(format!(
                    "checkpoint log line {}: expected 2 or 3 tab fields",
                    lineno + 1
                )));
            }
            let minibatch: u64 = fields[0].parse().map_err(|_| {
                Error::format(format!("checkpoint log line {}: bad minibatch", lineno + 1))
            })?;
            let validation_score = match fields.get(2) {
                Some(v) => Some(v.parse::<f64>().map_err(|_| {
                    Error::format(format!("checkpoint log line {}: bad score", lineno + 1))
                })?),
                None => None,
            };
            events.push(CheckpointEvent {
                minibatch,
                checkpoint_id: fields[1].to_owned(),
                validation_score,
            });
        }
        CheckpointLog::new(events)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

/// The ids of the last `k` saved checkpoints, in save order. Shorter logs
/// return everything they have.
pub fn select_checkpoints(log: &CheckpointLog, k: usize) -> Result<Vec<String>> {
    if log.is_empty() {
        return Err(Error::EmptyInput);
    }
    let start = log.len().saturating_sub(k);
    Ok(log.events[start..]
        .iter()
        .map(|e| e.checkpoint_id.clone())
        .collect())
}

/// Early-stopping verdict over a validation history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EarlyStop {
    /// True when the running maximum has not improved within the patience
    /// window.
    pub stop: bool,
    /// Index of the best score, earliest on ties. None for an empty
    /// history.
    pub best_index: Option<usize>,
}

/// Scans a validation history: stop once `patience` entries have passed
/// since the running maximum last improved.
pub fn early_stop(history: &[f64], patience: usize) -> EarlyStop {
    let mut best_index = None;
    let mut best = f64::NEG_INFINITY;
    for (i, &score) in history.iter().enumerate() {
        if score > best {
            best = score;
            best_index = Some(i);
        }
    }
    let stop = match best_index {
        Some(best_i) => history.len() - 1 - best_i >= patience,
        None => false,
    };
    EarlyStop { stop, best_index }
}
