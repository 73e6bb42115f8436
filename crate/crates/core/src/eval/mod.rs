//! Extraction quality scoring against gold annotations: metadata macro F1,
//! greedy similarity matching of subjects, ROUGE-L and BLEU over matched
//! subject summaries, and voting macro F1 over aligned votes.

mod matching;
mod metadata;
mod metrics;
mod voting;

pub use matching::{
    cosine, greedy_match, match_subjects, subject_text, Embedding, EmbeddingProvider, Matching, NgramProvider,
    RemoteProvider, SubjectPair,
};
pub use metadata::{document_counts, field_values, metadata_macro_f1, FieldScore, MetadataScores, METADATA_FIELDS};
pub use metrics::{bleu, lcs_len, macro_f1, rouge_l, rouge_l_tokens, BleuStats, Counts, Prf, BLEU_MAX_ORDER};
pub use voting::{voting_macro_f1, ClassScore, VoteCounts, VotingScores};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::extraction::ExtractionResult;
use crate::text::tokenize;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("embedding provider: {0}")]
    Provider(String),
}

pub const BLEU_SMOOTHING: &str = "add-one on numerator and denominator for n-gram orders with zero matches";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub provider: String,
    pub matching: String,
    pub rouge_l: String,
    pub bleu: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub gold_documents: usize,
    pub pred_documents: usize,
    pub gold_subjects: usize,
    pub pred_subjects: usize,
    pub matched_subjects: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub document: String,
    pub gold: usize,
    pub pred: usize,
    pub gold_title: String,
    pub pred_title: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unmatched {
    pub document: String,
    pub index: usize,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectScores {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_gold: Vec<Unmatched>,
    pub unmatched_pred: Vec<Unmatched>,
    /// Mean over matched pairs of the per-pair summary scores.
    pub rouge_l: Prf,
    /// Corpus BLEU over matched pair summaries.
    pub bleu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub header: ReportHeader,
    pub corpus: CorpusStats,
    pub metadata_f1: MetadataScores,
    pub subjects: SubjectScores,
    pub voting: VotingScores,
}

/// What one document contributes; summed after the parallel pass.
struct DocumentPart {
    id: String,
    metadata: [Counts; 4],
    pairs: Vec<MatchedPair>,
    unmatched_gold: Vec<Unmatched>,
    unmatched_pred: Vec<Unmatched>,
    rouge: Vec<Prf>,
    bleu: BleuStats,
    votes: VoteCounts,
    gold_subjects: usize,
    pred_subjects: usize,
}

fn score_document(
    id: &str,
    gold: Option<&ExtractionResult>,
    pred: Option<&ExtractionResult>,
    provider: &dyn EmbeddingProvider,
) -> Result<DocumentPart, EvalError> {
    let gs = gold.map_or(&[][..], |g| &g.subjects_raw[..]);
    let ps = pred.map_or(&[][..], |p| &p.subjects_raw[..]);
    let matching = match_subjects(gs, ps, provider)?;
    let mut rouge = Vec::new();
    let mut bleu = BleuStats::default();
    for pair in &matching.pairs {
        let r = tokenize(&gs[pair.gold].summary);
        let h = tokenize(&ps[pair.pred].summary);
        rouge.push(rouge_l_tokens(&r, &h));
        bleu.add_pair(&r, &h);
    }
    let mut votes = VoteCounts::default();
    votes.add_document(gs, ps, &matching.pairs);
    let unmatched = |list: &[usize], subjects: &[crate::extraction::RawSubject]| {
        list.iter()
            .map(|&i| Unmatched {
                document: id.to_string(),
                index: i,
                title: subjects[i].title.clone(),
            })
            .collect()
    };
    Ok(DocumentPart {
        id: id.to_string(),
        metadata: document_counts(gold.map(|g| &g.metadata_raw), pred.map(|p| &p.metadata_raw)),
        pairs: matching
            .pairs
            .iter()
            .map(|p| MatchedPair {
                document: id.to_string(),
                gold: p.gold,
                pred: p.pred,
                gold_title: gs[p.gold].title.clone(),
                pred_title: ps[p.pred].title.clone(),
                similarity: p.similarity,
            })
            .collect(),
        unmatched_gold: unmatched(&matching.unmatched_gold, gs),
        unmatched_pred: unmatched(&matching.unmatched_pred, ps),
        rouge,
        bleu,
        votes,
        gold_subjects: gs.len(),
        pred_subjects: ps.len(),
    })
}

/// Scores predicted extractions against gold, both keyed by document id.
/// Documents are scored in parallel; the report is assembled in id order.
pub fn evaluate(
    gold: &BTreeMap<String, ExtractionResult>,
    pred: &BTreeMap<String, ExtractionResult>,
    provider: &dyn EmbeddingProvider,
) -> Result<EvalReport, EvalError> {
    let ids: Vec<&String> = gold
        .keys()
        .chain(pred.keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let parts = exec::map_collect(&ids, |id| score_document(id, gold.get(*id), pred.get(*id), provider));
    let parts = parts.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut meta = [Counts::default(); 4];
    let mut bleu_stats = BleuStats::default();
    let mut votes = VoteCounts::default();
    let mut rouge = Vec::new();
    let (mut pairs, mut unmatched_gold, mut unmatched_pred) = (Vec::new(), Vec::new(), Vec::new());
    let (mut gold_subjects, mut pred_subjects) = (0, 0);
    for part in parts {
        for (t, c) in meta.iter_mut().zip(part.metadata) {
            t.add(c);
        }
        bleu_stats.add(&part.bleu);
        votes.add(&part.votes);
        rouge.extend(part.rouge);
        pairs.extend(part.pairs);
        unmatched_gold.extend(part.unmatched_gold);
        unmatched_pred.extend(part.unmatched_pred);
        gold_subjects += part.gold_subjects;
        pred_subjects += part.pred_subjects;
        debug_assert!(!part.id.is_empty());
    }
    let rouge_l = if rouge.is_empty() {
        Prf::default()
    } else {
        let n = rouge.len() as f64;
        Prf {
            precision: rouge.iter().map(|r| r.precision).sum::<f64>() / n,
            recall: rouge.iter().map(|r| r.recall).sum::<f64>() / n,
            f1: rouge.iter().map(|r| r.f1).sum::<f64>() / n,
        }
    };
    if pairs.is_empty() {
        warn!("no matched subject pairs; BLEU scores 0");
    }
    let unmatched_docs: Vec<String> = pred.keys().filter(|k| !gold.contains_key(*k)).cloned().collect();
    for d in &unmatched_docs {
        warn!("predicted document {d} has no gold counterpart");
    }
    Ok(EvalReport {
        header: ReportHeader {
            provider: provider.provider_id().to_string(),
            matching: "greedy one-to-one, highest cosine first, ties by (gold, pred) order".into(),
            rouge_l: "LCS over summary tokens, beta = 1, mean over matched pairs".into(),
            bleu: format!("corpus BLEU-4, uniform weights, {BLEU_SMOOTHING}"),
        },
        corpus: CorpusStats {
            documents: ids.len(),
            gold_documents: gold.len(),
            pred_documents: pred.len(),
            gold_subjects,
            pred_subjects,
            matched_subjects: pairs.len(),
        },
        metadata_f1: metadata::scores_from_counts(&meta, unmatched_docs),
        subjects: SubjectScores {
            pairs,
            unmatched_gold,
            unmatched_pred,
            rouge_l,
            bleu: bleu_stats.score(),
        },
        voting: votes.scores(),
    })
}

/// Reads every `*.json` file of a directory as an [`ExtractionResult`],
/// keyed by file stem.
pub fn load_dir(dir: &Path) -> Result<BTreeMap<String, ExtractionResult>, EvalError> {
    let err = |p: &Path, m: String| EvalError::Input {
        path: p.display().to_string(),
        message: m,
    };
    let entries = std::fs::read_dir(dir).map_err(|e| err(dir, e.to_string()))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| err(dir, e.to_string()))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let bytes = std::fs::read(&path).map_err(|e| err(&path, e.to_string()))?;
        let doc: ExtractionResult = serde_json::from_slice(&bytes).map_err(|e| err(&path, e.to_string()))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.insert(stem, doc);
    }
    Ok(out)
}

impl EvalReport {
    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut t = String::new();
        let c = &self.corpus;
        let _ = writeln!(
            t,
            "documents {} (gold {}, pred {}); subjects gold {} pred {} matched {}",
            c.documents, c.gold_documents, c.pred_documents, c.gold_subjects, c.pred_subjects, c.matched_subjects
        );
        let _ = writeln!(
            t,
            "provider {}; BLEU smoothing: {}",
            self.header.provider, BLEU_SMOOTHING
        );
        let _ = writeln!(t, "{:<14} {:>9} {:>9} {:>9}", "metric", "precision", "recall", "f1");
        let row = |t: &mut String, name: &str, p: &Prf| {
            let _ = writeln!(t, "{:<14} {:>9.4} {:>9.4} {:>9.4}", name, p.precision, p.recall, p.f1);
        };
        for f in METADATA_FIELDS {
            row(&mut t, f, &self.metadata_f1.per_field[f].prf);
        }
        let _ = writeln!(t, "{:<14} {:>29.4}", "metadata macro", self.metadata_f1.macro_f1);
        row(&mut t, "rouge-l", &self.subjects.rouge_l);
        let _ = writeln!(t, "{:<14} {:>29.4}", "bleu", self.subjects.bleu);
        for (class, s) in &self.voting.per_class {
            row(&mut t, &format!("vote {class}"), &s.prf);
        }
        let _ = writeln!(t, "{:<14} {:>29.4}", "voting macro", self.voting.macro_f1);
        t
    }
}
