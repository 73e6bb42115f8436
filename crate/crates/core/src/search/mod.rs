//! BM25 full-text search with multi-select facets over published minutes.
//!
//! An [`IndexSnapshot`] is built once from the published records and never
//! mutated; publishing swaps in a freshly built snapshot.

mod bm25;
mod facets;
mod query;
mod snapshot;
mod snippet;

pub use bm25::Bm25Params;
pub use facets::{count_facets, passes, passes_all_except, values_of, Dimension, FacetCounts};
pub use query::{DateRange, Facets, Query, Scope, MAX_PAGE_SIZE};
pub use snapshot::{IndexSnapshot, MinuteEntry, Posting, UnitInput, UnitKind, SNAPSHOT_HEADER};
pub use snippet::{make_snippet, MARK_END, MARK_START, SNIPPET_RADIUS};

use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::text::tokenize;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid query: {}", .0.iter().map(|(f, m)| format!("{f}: {m}")).collect::<Vec<_>>().join("; "))]
    InvalidQuery(Vec<(String, String)>),
    #[error("unknown municipality {0}")]
    UnknownMunicipality(String),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub unit_id: String,
    pub kind: UnitKind,
    pub minute_id: String,
    pub municipality_id: String,
    pub title: String,
    pub meeting_date: NaiveDate,
    pub score: f64,
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub hits: Vec<Hit>,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub facet_counts: FacetCounts,
}

/// Distinct query terms in first-occurrence order.
pub fn query_terms(text: &str) -> Vec<String> {
    let mut terms: Vec<String> = Vec::new();
    for t in tokenize(text) {
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    terms
}

fn in_scope(kind: UnitKind, scope: Scope) -> bool {
    matches!(
        (scope, kind),
        (Scope::All, _) | (Scope::Minutes, UnitKind::Minute) | (Scope::Subjects, UnitKind::Subject)
    )
}

/// BM25 score of one unit; terms absent from the corpus add nothing.
pub fn bm25_score(snapshot: &IndexSnapshot, terms: &[String], unit: usize) -> f64 {
    let params = snapshot.params();
    let n = snapshot.unit_count();
    let len = snapshot.doc_length(unit);
    let avg = snapshot.avg_doc_length();
    let mut score = 0.0;
    for term in terms {
        let tf = snapshot.term_freq(term, unit);
        if tf == 0 {
            continue;
        }
        score += params.idf(n, snapshot.doc_freq(term)) * params.tf_weight(tf, len, avg);
    }
    score
}

/// Units containing at least one of `terms`, as sorted posting numbers.
fn text_matches(snapshot: &IndexSnapshot, terms: &[String]) -> Vec<usize> {
    let mut hits: Vec<usize> = terms
        .iter()
        .flat_map(|t| snapshot.postings(t).iter().map(|p| p.unit as usize))
        .collect();
    hits.sort_unstable();
    hits.dedup();
    hits
}

/// Units in scope that match the text part of the query (all of them when
/// the text has no terms).
fn text_candidates(snapshot: &IndexSnapshot, terms: &[String], scope: Scope) -> Vec<usize> {
    let base: Vec<usize> = if terms.is_empty() {
        (0..snapshot.unit_count()).collect()
    } else {
        text_matches(snapshot, terms)
    };
    base.into_iter()
        .filter(|&i| in_scope(snapshot.units()[i].kind, scope))
        .collect()
}

fn newest_first(a: &UnitInput, b: &UnitInput) -> Ordering {
    b.meeting_date.cmp(&a.meeting_date).then_with(|| a.id.cmp(&b.id))
}

pub fn facet_counts(snapshot: &IndexSnapshot, query: &Query) -> FacetCounts {
    let terms = query_terms(&query.text);
    let candidates = text_candidates(snapshot, &terms, query.scope);
    let units = snapshot.units();
    count_facets(candidates.iter().map(|&i| &units[i]), &query.facets)
}

pub fn search(snapshot: &IndexSnapshot, query: &Query) -> Result<SearchResult, SearchError> {
    query.validate()?;
    let terms = query_terms(&query.text);
    let units = snapshot.units();
    let candidates = text_candidates(snapshot, &terms, query.scope);
    let facet_counts = count_facets(candidates.iter().map(|&i| &units[i]), &query.facets);

    let filtered: Vec<usize> = candidates
        .into_iter()
        .filter(|&i| passes_all_except(&units[i], &query.facets, None))
        .collect();

    let mut ranked: Vec<(usize, f64)> = if terms.is_empty() {
        filtered.into_iter().map(|i| (i, 0.0)).collect()
    } else {
        exec::map_collect(&filtered, |&i| (i, bm25_score(snapshot, &terms, i)))
    };
    ranked.sort_by(|&(a, sa), &(b, sb)| sb.total_cmp(&sa).then_with(|| newest_first(&units[a], &units[b])));

    let total = ranked.len();
    let start = (query.page - 1).saturating_mul(query.page_size);
    let hits = ranked
        .iter()
        .skip(start)
        .take(query.page_size)
        .map(|&(i, score)| {
            let u = &units[i];
            Hit {
                unit_id: u.id.clone(),
                kind: u.kind,
                minute_id: u.minute_id.clone(),
                municipality_id: u.municipality_id.clone(),
                title: u.title.clone(),
                meeting_date: u.meeting_date,
                score,
                snippet: make_snippet(&u.text, &terms),
            }
        })
        .collect();

    Ok(SearchResult {
        hits,
        total,
        page: query.page,
        page_size: query.page_size,
        facet_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineGroup {
    /// `YYYY-MM`
    pub period: String,
    pub minute_ids: Vec<String>,
}

/// Published minutes of one municipality grouped by year-month, oldest first.
pub fn timeline(snapshot: &IndexSnapshot, municipality_id: &str) -> Result<Vec<TimelineGroup>, SearchError> {
    if !snapshot.has_municipality(municipality_id) {
        return Err(SearchError::UnknownMunicipality(municipality_id.to_string()));
    }
    let mut entries: Vec<&MinuteEntry> = snapshot
        .minutes()
        .iter()
        .filter(|m| m.municipality_id == municipality_id)
        .collect();
    entries.sort_by(|a, b| a.meeting_date.cmp(&b.meeting_date).then_with(|| a.id.cmp(&b.id)));
    let mut groups: BTreeMap<(i32, u32), Vec<String>> = BTreeMap::new();
    for e in entries {
        groups
            .entry((e.meeting_date.year(), e.meeting_date.month()))
            .or_default()
            .push(e.id.clone());
    }
    Ok(groups
        .into_iter()
        .map(|((y, m), minute_ids)| TimelineGroup {
            period: format!("{y:04}-{m:02}"),
            minute_ids,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(id: &str, text: &str, date: (i32, u32, u32)) -> UnitInput {
        UnitInput {
            id: id.into(),
            kind: UnitKind::Subject,
            minute_id: format!("m-{id}"),
            municipality_id: "mun".into(),
            title: id.into(),
            text: text.into(),
            topic_ids: vec![],
            parties: vec![],
            participant_ids: vec![],
            meeting_date: NaiveDate::from_ymd_opt(date.0, date.1, date.2).unwrap(),
            meeting_type: "ordinary".into(),
        }
    }

    fn flood() -> IndexSnapshot {
        let units = vec![
            unit("d1", "flood prevention plan", (2025, 1, 1)),
            unit("d2", "flood flood budget", (2025, 1, 2)),
            unit("d3", "school budget", (2025, 1, 3)),
        ];
        IndexSnapshot::from_units(units, vec![], vec!["mun".into()], Bm25Params::default()).0
    }

    #[test]
    fn flood_scores() {
        let snap = flood();
        let terms = query_terms("flood");
        // "school budget" is two tokens, so avgdl = 8/3 and the three-token
        // documents are mildly penalized
        assert!((bm25_score(&snap, &terms, 0) - 0.447_138_588).abs() < 1e-9);
        assert!((bm25_score(&snap, &terms, 1) - 0.624_306_708).abs() < 1e-9);
        assert_eq!(bm25_score(&snap, &terms, 2), 0.0);
        let res = search(&snap, &Query::text("flood")).unwrap();
        let ids: Vec<_> = res.hits.iter().map(|h| h.unit_id.as_str()).collect();
        assert_eq!(ids, vec!["d2", "d1"]);
        assert_eq!(res.total, 2);
    }

    #[test]
    fn flood_scores_with_equal_lengths() {
        let units = vec![
            unit("d1", "flood prevention plan", (2025, 1, 1)),
            unit("d2", "flood flood budget", (2025, 1, 2)),
            unit("d3", "school budget report", (2025, 1, 3)),
        ];
        let snap = IndexSnapshot::from_units(units, vec![], vec!["mun".into()], Bm25Params::default()).0;
        let terms = query_terms("flood");
        assert!((bm25_score(&snap, &terms, 0) - 0.470_003_629).abs() < 1e-9);
        assert!((bm25_score(&snap, &terms, 1) - 0.646_254_990).abs() < 1e-9);
        assert_eq!(bm25_score(&snap, &terms, 2), 0.0);
    }

    #[test]
    fn absent_term_scores_zero_everywhere() {
        let snap = flood();
        let terms = query_terms("hospital");
        for i in 0..3 {
            assert_eq!(bm25_score(&snap, &terms, i), 0.0);
        }
        assert_eq!(search(&snap, &Query::text("hospital")).unwrap().total, 0);
    }

    #[test]
    fn doubled_corpus_keeps_order() {
        let mut units = Vec::new();
        for copy in 0..2 {
            units.push(unit(&format!("a{copy}"), "flood prevention plan", (2025, 1, 1)));
            units.push(unit(&format!("b{copy}"), "flood flood budget", (2025, 1, 2)));
            units.push(unit(&format!("c{copy}"), "school budget", (2025, 1, 3)));
        }
        let snap = IndexSnapshot::from_units(units, vec![], vec![], Bm25Params::default()).0;
        let res = search(
            &snap,
            &Query {
                page_size: 10,
                ..Query::text("flood")
            },
        )
        .unwrap();
        let ids: Vec<_> = res.hits.iter().map(|h| h.unit_id.as_str()).collect();
        assert_eq!(ids, vec!["b0", "b1", "a0", "a1"]);
    }

    #[test]
    fn empty_snapshot() {
        let snap = IndexSnapshot::default();
        assert_eq!(snap.unit_count(), 0);
        assert_eq!(search(&snap, &Query::text("anything")).unwrap().total, 0);
        assert_eq!(search(&snap, &Query::default()).unwrap().total, 0);
    }

    #[test]
    fn filter_only_is_newest_first() {
        let snap = flood();
        let res = search(&snap, &Query::default()).unwrap();
        let ids: Vec<_> = res.hits.iter().map(|h| h.unit_id.as_str()).collect();
        assert_eq!(ids, vec!["d3", "d2", "d1"]);
    }

    #[test]
    fn invalid_paging() {
        let snap = flood();
        for q in [
            Query {
                page: 0,
                ..Query::default()
            },
            Query {
                page_size: 101,
                ..Query::default()
            },
            Query {
                page_size: 0,
                ..Query::default()
            },
        ] {
            assert!(matches!(search(&snap, &q), Err(SearchError::InvalidQuery(_))));
        }
        let d = |m| NaiveDate::from_ymd_opt(2025, m, 1).unwrap();
        let q = Query {
            facets: Facets {
                date_range: Some(DateRange { start: d(5), end: d(1) }),
                ..Facets::default()
            },
            ..Query::default()
        };
        match search(&snap, &q) {
            Err(SearchError::InvalidQuery(f)) => assert_eq!(f[0].0, "date_range"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn page_beyond_end() {
        let snap = flood();
        let res = search(
            &snap,
            &Query {
                page: 5,
                page_size: 2,
                ..Query::default()
            },
        )
        .unwrap();
        assert!(res.hits.is_empty());
        assert_eq!(res.total, 3);
    }

    #[test]
    fn unindexable_units_are_reported() {
        let (snap, warnings) = IndexSnapshot::from_units(
            vec![unit("x", "!!!", (2025, 1, 1)), unit("y", "ok", (2025, 1, 1))],
            vec![],
            vec![],
            Bm25Params::default(),
        );
        assert_eq!(snap.unit_count(), 1);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn timeline_groups() {
        let d = |m, day| NaiveDate::from_ymd_opt(2025, m, day).unwrap();
        let minutes = vec![
            MinuteEntry {
                id: "b".into(),
                municipality_id: "mun".into(),
                meeting_date: d(1, 28),
            },
            MinuteEntry {
                id: "a".into(),
                municipality_id: "mun".into(),
                meeting_date: d(1, 10),
            },
            MinuteEntry {
                id: "c".into(),
                municipality_id: "mun".into(),
                meeting_date: d(3, 2),
            },
        ];
        let snap = IndexSnapshot::from_units(
            vec![],
            minutes,
            vec!["mun".into(), "empty".into()],
            Bm25Params::default(),
        )
        .0;
        let t = timeline(&snap, "mun").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(
            t[0],
            TimelineGroup {
                period: "2025-01".into(),
                minute_ids: vec!["a".into(), "b".into()]
            }
        );
        assert!(timeline(&snap, "empty").unwrap().is_empty());
        assert!(matches!(
            timeline(&snap, "nope"),
            Err(SearchError::UnknownMunicipality(_))
        ));
    }

    #[test]
    fn snapshot_bytes_round_trip() {
        let snap = flood();
        let bytes = snap.to_bytes();
        assert!(bytes.starts_with(b"CIDX1\n"));
        let back = IndexSnapshot::from_bytes(&bytes).unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.to_bytes(), bytes);
        assert!(IndexSnapshot::from_bytes(b"CIDX2\n{}").is_err());
    }
}
