//! Corpus-level BLEU with clipped n-gram precision and brevity penalty.
//!
//! Counts are aggregated over the whole corpus before the geometric mean
//! is taken, so the score is invariant to reordering sentence pairs. No
//! tokenization happens here; lines are split on whitespace and the caller
//! controls everything else.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Knobs for [`corpus_bleu`].
#[derive(Debug, Clone, Copy)]
pub struct BleuOptions {
    /// Highest n-gram order, 4 in the standard definition.
    pub max_n: usize,
    /// Add-one smoothing of clipped precisions for orders above 1, for
    /// tiny corpora where higher-order matches are often zero.
    pub smooth: bool,
}

impl Default for BleuOptions {
    fn default() -> Self {
        BleuOptions {
            max_n: 4,
            smooth: false,
        }
    }
}

/// Corpus BLEU broken into its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    /// Final score in [0, 1].
    pub score: f64,
    /// Clipped modified precision per n-gram order, 1-based order - 1.
    pub precisions: Vec<f64>,
    /// exp(1 - ref_len / hyp_len) when hypotheses are shorter, else 1.
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuReport {
    /// One-line rendering with the score scaled to 0..100.
    pub fn render(&self) -> String {
        let precisions = self
            .precisions
            .iter()
            .enumerate()
            .map(|(i, p)| format!("p{}={:.3}", i + 1, p))
            .collect::<Vec<_>>()
            .join(", ");
        format!(
            "BLEU = {:.2} (BP={:.3}, {}, hyp_len={}, ref_len={})",
            self.score * 100.0,
            self.brevity_penalty,
            precisions,
            self.hyp_len,
            self.ref_len
        )
    }
}

/// Single-reference corpus BLEU over pre-tokenized lines.
pub fn corpus_bleu(hypotheses: &[String], references: &[String], opts: BleuOptions) -> Result<BleuReport> {
    let refs: Vec<&[String]> = references
        .iter()
        .map(std::slice::from_ref)
        .collect();
    corpus_bleu_multi(hypotheses, &refs, opts)
}

/// Multi-reference corpus BLEU. `references[i]` lists every reference for
/// hypothesis i; clipping takes the per-n-gram maximum across them and the
/// reference length uses the closest length (shorter on ties).
///
/// An order with no hypothesis n-grams at all drops out of the geometric
/// mean (its precision reports as 1); a zero precision at any populated
/// order makes the score 0.
pub fn corpus_bleu_multi(
    hypotheses: &[String],
    references: &[&[String]],
    opts: BleuOptions,
) -> Result<BleuReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::LineCountMismatch {
            left: hypotheses.len(),
            right: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(Error::EmptyInput);
    }
    if references.iter().any(|refs| refs.is_empty()) {
        return Err(Error::format("a sentence has no reference"));
    }

    let mut matches = vec![0u64; opts.max_n];
    let mut totals = vec![0u64; opts.max_n];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;

    for (hyp_line, ref_lines) in hypotheses.iter().zip(references) {
        let hyp: Vec<&str> = hyp_line.split_whitespace().collect();
        let refs: Vec<Vec<&str>> = ref_lines
            .iter()
            .map(|line| line.split_whitespace().collect())
            .collect();
        hyp_len += hyp.len() as u64;
        ref_len += closest_ref_len(hyp.len(), &refs) as u64;

        for n in 1..=opts.max_n {
            if hyp.len() < n {
                continue;
            }
            let hyp_counts = ngram_counts(&hyp, n);
            let mut ref_counts: HashMap<&[&str], u64> = HashMap::new();
            for r in &refs {
                if r.len() < n {
                    continue;
                }
                for (gram, count) in ngram_counts(r, n) {
                    let entry = ref_counts.entry(gram).or_insert(0);
                    *entry = (*entry).max(count);
                }
            }
            for (gram, count) in &hyp_counts {
                let allowed = ref_counts.get(gram).copied().unwrap_or(0);
                matches[n - 1] += (*count).min(allowed);
            }
            totals[n - 1] += (hyp.len() - n + 1) as u64;
        }
    }

    // An order the corpus has no n-grams of at all is vacuous: it is
    // reported as 1 and skipped in the geometric mean, so a token-perfect
    // corpus of short sentences still scores exactly 1.
    let precisions: Vec<f64> = (0..opts.max_n)
        .map(|i| {
            let (m, t) = if opts.smooth && i > 0 && totals[i] > 0 {
                (matches[i] + 1, totals[i] + 1)
            } else {
                (matches[i], totals[i])
            };
            if t == 0 {
                1.0
            } else {
                m as f64 / t as f64
            }
        })
        .collect();

    let brevity_penalty = if hyp_len >= ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };

    let live_orders: Vec<f64> = (0..opts.max_n)
        .filter(|&i| totals[i] > 0)
        .map(|i| precisions[i])
        .collect();
    let score = if live_orders.iter().any(|&p| p == 0.0) {
        0.0
    } else if live_orders.is_empty() {
        brevity_penalty
    } else {
        let log_mean =
            live_orders.iter().map(|p| p.ln()).sum::<f64>() / live_orders.len() as f64;
        brevity_penalty * log_mean.exp()
    };

    Ok(BleuReport {
        score,
        precisions,
        brevity_penalty,
        hyp_len,
        ref_len,
    })
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Reference length closest to the hypothesis length; the shorter one wins
/// a distance tie.
fn closest_ref_len(hyp_len: usize, refs: &[Vec<&str>]) -> usize {
    refs.iter()
        .map(|r| r.len())
        .min_by_key(|&len| {
            let dist = (len as i64 - hyp_len as i64).abs();
            (dist, len)
        })
        .unwrap_or(0)
}
