use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::extraction::RawSubject;
use crate::text::normalize_name;

/// Embedding vector. Providers backed by a neural model return dense
/// vectors; the offline n-gram provider returns sparse term counts, whose
/// dimension is the (conceptually fixed) space of all character 3-grams.
#[derive(Debug, Clone, PartialEq)]
pub enum Embedding {
    Dense(Vec<f64>),
    Sparse(BTreeMap<String, f64>),
}

pub fn cosine(a: &Embedding, b: &Embedding) -> f64 {
    let (dot, na, nb) = match (a, b) {
        (Embedding::Dense(x), Embedding::Dense(y)) => {
            assert_eq!(x.len(), y.len(), "embedding dimensions differ");
            let dot = x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
            (
                dot,
                x.iter().map(|v| v * v).sum::<f64>(),
                y.iter().map(|v| v * v).sum::<f64>(),
            )
        }
        (Embedding::Sparse(x), Embedding::Sparse(y)) => {
            let dot = x.iter().filter_map(|(k, v)| y.get(k).map(|w| v * w)).sum::<f64>();
            (
                dot,
                x.values().map(|v| v * v).sum::<f64>(),
                y.values().map(|v| v * v).sum::<f64>(),
            )
        }
        _ => panic!("cannot compare dense and sparse embeddings"),
    };
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    if a == b {
        // exact, rather than 1 - 1e-16
        return 1.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
}

pub trait EmbeddingProvider: Send + Sync {
    fn provider_id(&self) -> &str;
    /// `None` for sparse providers.
    fn dimension(&self) -> Option<usize>;
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EvalError>;
}

/// Character 3-gram term frequencies over the normalized text, padded with
/// one space on each side.
#[derive(Debug, Clone, Copy, Default)]
pub struct NgramProvider;

impl NgramProvider {
    pub fn vector(text: &str) -> BTreeMap<String, f64> {
        let norm = normalize_name(text);
        let mut counts = BTreeMap::new();
        if norm.is_empty() {
            return counts;
        }
        let padded: Vec<char> = format!(" {norm} ").chars().collect();
        for w in padded.windows(3) {
            *counts.entry(w.iter().collect::<String>()).or_insert(0.0) += 1.0;
        }
        counts
    }
}

impl EmbeddingProvider for NgramProvider {
    fn provider_id(&self) -> &str {
        "ngram-char3"
    }

    fn dimension(&self) -> Option<usize> {
        None
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EvalError> {
        Ok(texts.iter().map(|t| Embedding::Sparse(Self::vector(t))).collect())
    }
}

/// A remote embedding service: POST `{model, texts}` and receive
/// `{embeddings: [[f64]]}`, one vector per text.
#[derive(Debug, Clone)]
pub struct RemoteProvider {
    pub endpoint_url: String,
    pub model_id: String,
    pub api_key_env_var_name: String,
    pub timeout_secs: u64,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

impl EmbeddingProvider for RemoteProvider {
    fn provider_id(&self) -> &str {
        &self.model_id
    }

    fn dimension(&self) -> Option<usize> {
        None
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, EvalError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let key = std::env::var(&self.api_key_env_var_name).map_err(|_| {
            EvalError::Provider(format!("environment variable {} is not set", self.api_key_env_var_name))
        })?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(self.timeout_secs))
            .build()
            .map_err(|e| EvalError::Provider(e.to_string()))?;
        let resp = client
            .post(&self.endpoint_url)
            .bearer_auth(key)
            .json(&EmbedRequest {
                model: &self.model_id,
                texts,
            })
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| EvalError::Provider(e.to_string()))?;
        let body: EmbedResponse = resp.json().map_err(|e| EvalError::Provider(e.to_string()))?;
        if body.embeddings.len() != texts.len() {
            return Err(EvalError::Provider(format!(
                "expected {} embeddings, got {}",
                texts.len(),
                body.embeddings.len()
            )));
        }
        let dim = body.embeddings[0].len();
        if body.embeddings.iter().any(|e| e.len() != dim) {
            return Err(EvalError::Provider("embeddings have differing dimensions".into()));
        }
        Ok(body.embeddings.into_iter().map(Embedding::Dense).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectPair {
    pub gold: usize,
    pub pred: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<SubjectPair>,
    pub unmatched_gold: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

pub fn subject_text(s: &RawSubject) -> String {
    format!("{} {}", s.title, s.summary)
}

/// Greedy one-to-one matching: repeatedly take the most similar remaining
/// (gold, pred) pair, ties going to the lowest gold then pred index.
pub fn greedy_match(similarity: &[Vec<f64>], n_pred: usize) -> Matching {
    let n_gold = similarity.len();
    let mut cells: Vec<(usize, usize, f64)> = Vec::with_capacity(n_gold * n_pred);
    for (g, row) in similarity.iter().enumerate() {
        for (p, &s) in row.iter().enumerate() {
            cells.push((g, p, s));
        }
    }
    cells.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut gold_used = vec![false; n_gold];
    let mut pred_used = vec![false; n_pred];
    let mut pairs = Vec::new();
    for (g, p, s) in cells {
        if !gold_used[g] && !pred_used[p] {
            gold_used[g] = true;
            pred_used[p] = true;
            pairs.push(SubjectPair {
                gold: g,
                pred: p,
                similarity: s,
            });
        }
    }
    pairs.sort_by_key(|p| p.gold);
    Matching {
        pairs,
        unmatched_gold: (0..n_gold).filter(|g| !gold_used[*g]).collect(),
        unmatched_pred: (0..n_pred).filter(|p| !pred_used[*p]).collect(),
    }
}

pub fn match_subjects(
    gold: &[RawSubject],
    pred: &[RawSubject],
    provider: &dyn EmbeddingProvider,
) -> Result<Matching, EvalError> {
    let texts: Vec<String> = gold.iter().chain(pred).map(subject_text).collect();
    let emb = provider.embed(&texts)?;
    let (ge, pe) = emb.split_at(gold.len());
    let sim: Vec<Vec<f64>> = ge.iter().map(|g| pe.iter().map(|p| cosine(g, p)).collect()).collect();
    Ok(greedy_match(&sim, pred.len()))
}
