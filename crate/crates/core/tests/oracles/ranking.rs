//! Linear-scan BM25 over whitespace-split documents, written without the
//! index so that it can check it.

use std::collections::HashSet;

use chrono::NaiveDate;
use citilink_core::search::{search, Bm25Params, IndexSnapshot, Query, UnitInput, UnitKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Corpus {
    pub units: Vec<UnitInput>,
    pub query: Vec<String>,
}

const VOCAB: usize = 24;

pub fn random_corpus(rng: &mut ChaCha8Rng) -> Corpus {
    let n = rng.gen_range(1..=50);
    let units = (0..n)
        .map(|i| {
            let len = rng.gen_range(1..=30);
            // a skewed vocabulary gives repeated terms and varied document frequencies
            let words: Vec<String> = (0..len)
                .map(|_| format!("t{}", rng.gen_range(0..VOCAB).min(rng.gen_range(0..VOCAB))))
                .collect();
            UnitInput {
                id: format!("u{i:03}"),
                kind: if rng.gen_bool(0.5) {
                    UnitKind::Subject
                } else {
                    UnitKind::Minute
                },
                minute_id: format!("m{i:03}"),
                municipality_id: "mun".into(),
                title: String::new(),
                text: words.join(" "),
                topic_ids: vec![],
                parties: vec![],
                participant_ids: vec![],
                meeting_date: NaiveDate::from_ymd_opt(2025, 1, 1).unwrap() + chrono::Days::new(rng.gen_range(0..5)),
                meeting_type: "ordinary".into(),
            }
        })
        .collect();
    let qlen = rng.gen_range(1..=8);
    // include words outside the vocabulary now and then
    let query = (0..qlen).map(|_| format!("t{}", rng.gen_range(0..VOCAB + 4))).collect();
    Corpus { units, query }
}

/// `(unit id, score)` of every unit containing a query term, best first,
/// ties by newest date then id.
pub fn reference_rank(units: &[UnitInput], query: &[String], p: Bm25Params) -> Vec<(String, f64)> {
    let docs: Vec<Vec<&str>> = units.iter().map(|u| u.text.split(' ').collect()).collect();
    let n = docs.len() as f64;
    let avg = docs.iter().map(|d| d.len()).sum::<usize>() as f64 / n;
    let mut seen = HashSet::new();
    let terms: Vec<&String> = query.iter().filter(|t| seen.insert(t.as_str())).collect();
    let mut out = Vec::new();
    for (u, doc) in units.iter().zip(&docs) {
        let mut score = 0.0;
        let mut matched = false;
        for t in &terms {
            let tf = doc.iter().filter(|w| **w == t.as_str()).count() as f64;
            if tf == 0.0 {
                continue;
            }
            matched = true;
            let df = docs.iter().filter(|d| d.contains(&t.as_str())).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let norm = 1.0 - p.b + p.b * doc.len() as f64 / avg;
            score += idf * tf * (p.k1 + 1.0) / (tf + p.k1 * norm);
        }
        if matched {
            out.push((u, score));
        }
    }
    out.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(b.0.meeting_date.cmp(&a.0.meeting_date))
            .then(a.0.id.cmp(&b.0.id))
    });
    out.into_iter().map(|(u, s)| (u.id.clone(), s)).collect()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Runs `corpora` random cases; returns the number of hits compared.
pub fn check_random_corpora(corpora: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    for case in 0..corpora {
        let Corpus { mut units, query } = random_corpus(&mut rng);
        units.shuffle(&mut rng);
        let params = Bm25Params::default();
        let (snap, _) = IndexSnapshot::from_units(units.clone(), vec![], vec!["mun".into()], params);
        let q = Query {
            text: query.join(" "),
            page_size: 100,
            ..Query::default()
        };
        let got = search(&snap, &q).map_err(|e| e.to_string())?;
        let want = reference_rank(&units, &query, params);
        if got.total != want.len() || got.hits.len() != want.len() {
            return Err(format!("case {case}: {} hits, reference has {}", got.total, want.len()));
        }
        let by_id: std::collections::HashMap<&str, f64> = want.iter().map(|(id, s)| (id.as_str(), *s)).collect();
        for h in &got.hits {
            let Some(&score) = by_id.get(h.unit_id.as_str()) else {
                return Err(format!("case {case}: {} is not a reference hit", h.unit_id));
            };
            if !close(h.score, score) {
                return Err(format!("case {case} {}: score {} vs {score}", h.unit_id, h.score));
            }
            compared += 1;
        }
        // order must match exactly, except inside runs of scores that are
        // equal within tolerance (mathematical ties whose float rounding
        // differs between the two evaluation orders)
        let mut start = 0;
        while start < want.len() {
            let mut end = start + 1;
            while end < want.len() && close(want[end].1, want[start].1) {
                end += 1;
            }
            let a: HashSet<&str> = want[start..end].iter().map(|(id, _)| id.as_str()).collect();
            let b: HashSet<&str> = got.hits[start..end].iter().map(|h| h.unit_id.as_str()).collect();
            if a != b {
                return Err(format!("case {case} ranks {start}..{end}: {b:?} vs reference {a:?}"));
            }
            start = end;
        }
    }
    Ok(compared)
}
