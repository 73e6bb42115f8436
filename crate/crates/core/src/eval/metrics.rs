//! Text overlap metrics over search-index tokens.

use std::collections::HashMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::text::tokenize;

/// Precision, recall and F1 (beta = 1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// F1 is 0 whenever precision + recall is 0.
    pub fn new(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf { precision, recall, f1 }
    }

    /// From confusion counts; an empty denominator scores 0.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Prf {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Prf::new(ratio(tp, tp + fp), ratio(tp, tp + fn_))
    }
}

/// Confusion counts for one field or class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    /// Whether the field or class occurs at all in gold or prediction.
    pub fn is_present(&self) -> bool {
        self.tp + self.fp + self.fn_ > 0
    }

    pub fn prf(&self) -> Prf {
        Prf::from_counts(self.tp, self.fp, self.fn_)
    }
}

/// Unweighted mean of the F1 of every component that occurs in gold or
/// prediction. With nothing to score at all the two sides agree, so 1.0.
pub fn macro_f1<'a>(counts: impl IntoIterator<Item = &'a Counts>) -> f64 {
    let scores: Vec<f64> = counts
        .into_iter()
        .filter(|c| c.is_present())
        .map(|c| c.prf().f1)
        .collect();
    if scores.is_empty() {
        1.0
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L: P = LCS/|hyp|, R = LCS/|ref|. An empty side scores all zeros.
pub fn rouge_l(reference: &str, hypothesis: &str) -> Prf {
    rouge_l_tokens(&tokenize(reference), &tokenize(hypothesis))
}

pub fn rouge_l_tokens(reference: &[String], hypothesis: &[String]) -> Prf {
    if reference.is_empty() || hypothesis.is_empty() {
        return Prf::default();
    }
    let lcs = lcs_len(reference, hypothesis) as f64;
    Prf::new(lcs / hypothesis.len() as f64, lcs / reference.len() as f64)
}

pub const BLEU_MAX_ORDER: usize = 4;

/// Corpus totals that BLEU is computed from, so documents can be counted in
/// parallel and summed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuStats {
    /// Clipped n-gram matches per order.
    pub matches: [u64; BLEU_MAX_ORDER],
    /// Hypothesis n-grams per order.
    pub totals: [u64; BLEU_MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

impl BleuStats {
    pub fn add_pair(&mut self, reference: &[String], hypothesis: &[String]) {
        self.hyp_len += hypothesis.len() as u64;
        self.ref_len += reference.len() as u64;
        for n in 1..=BLEU_MAX_ORDER {
            let refs = ngram_counts(reference, n);
            let hyps = ngram_counts(hypothesis, n);
            self.totals[n - 1] += hyps.values().sum::<u64>();
            self.matches[n - 1] += hyps
                .iter()
                .map(|(g, c)| (*c).min(refs.get(g).copied().unwrap_or(0)))
                .sum::<u64>();
        }
    }

    pub fn add(&mut self, other: &BleuStats) {
        for n in 0..BLEU_MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    /// Uniform-weight BLEU-4. Orders with zero matches get add-one smoothing
    /// on numerator and denominator; brevity penalty exp(1 - r/c) when c < r.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for n in 0..BLEU_MAX_ORDER {
            let (m, t) = (self.matches[n], self.totals[n]);
            let p = if m == 0 {
                1.0 / (t as f64 + 1.0)
            } else {
                m as f64 / t as f64
            };
            log_sum += p.ln();
        }
        let bp = if self.hyp_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        } else {
            1.0
        };
        (bp * (log_sum / BLEU_MAX_ORDER as f64).exp()).clamp(0.0, 1.0)
    }
}

/// Corpus BLEU over aligned (reference, hypothesis) strings.
pub fn bleu(references: &[String], hypotheses: &[String]) -> f64 {
    assert_eq!(
        references.len(),
        hypotheses.len(),
        "bleu needs one reference per hypothesis"
    );
    if references.is_empty() {
        warn!("bleu over an empty corpus scores 0");
        return 0.0;
    }
    let mut stats = BleuStats::default();
    for (r, h) in references.iter().zip(hypotheses) {
        stats.add_pair(&tokenize(r), &tokenize(h));
    }
    stats.score()
}
