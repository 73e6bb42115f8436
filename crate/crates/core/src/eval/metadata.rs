use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::metrics::{macro_f1, Counts, Prf};
use crate::extraction::RawMetadata;
use crate::model::{parse_meeting_date, MeetingType};
use crate::text::normalize_name;

pub const METADATA_FIELDS: [&str; 4] = ["meeting_date", "location", "meeting_type", "participants"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldScore {
    #[serde(flatten)]
    pub prf: Prf,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataScores {
    pub per_field: BTreeMap<String, FieldScore>,
    pub macro_f1: f64,
    /// Predicted documents with no gold counterpart; counted as false positives.
    pub unmatched_pred_docs: Vec<String>,
}

/// The normalized values a field contributes for one document. Empty values
/// are dropped so that empty-vs-empty contributes nothing.
pub fn field_values(meta: &RawMetadata, field: &str) -> Vec<String> {
    let vals = match field {
        "meeting_date" => vec![parse_meeting_date(&meta.meeting_date)
            .map(|d| d.format("%Y-%m-%d").to_string())
            .unwrap_or_else(|_| meta.meeting_date.trim().to_string())],
        "location" => vec![normalize_name(&meta.location)],
        "meeting_type" => vec![match meta.meeting_type.parse::<MeetingType>() {
            Ok(t) => normalize_name(t.as_str()),
            Err(_) => normalize_name(&meta.meeting_type),
        }],
        "participants" => meta.participants.iter().map(|p| normalize_name(&p.name)).collect(),
        other => panic!("unknown metadata field {other}"),
    };
    vals.into_iter().filter(|v| !v.is_empty()).collect()
}

/// Multiset overlap of one document's values.
pub fn field_counts(gold: Option<&RawMetadata>, pred: Option<&RawMetadata>, field: &str) -> Counts {
    let mut bag: HashMap<String, i64> = HashMap::new();
    let gold_vals = gold.map(|m| field_values(m, field)).unwrap_or_default();
    let pred_vals = pred.map(|m| field_values(m, field)).unwrap_or_default();
    for v in &gold_vals {
        *bag.entry(v.clone()).or_insert(0) += 1;
    }
    let mut tp = 0u64;
    for v in &pred_vals {
        if let Some(n) = bag.get_mut(v).filter(|n| **n > 0) {
            *n -= 1;
            tp += 1;
        }
    }
    Counts {
        tp,
        fp: pred_vals.len() as u64 - tp,
        fn_: gold_vals.len() as u64 - tp,
    }
}

/// Per-document counts for every field, in [`METADATA_FIELDS`] order.
pub fn document_counts(gold: Option<&RawMetadata>, pred: Option<&RawMetadata>) -> [Counts; 4] {
    METADATA_FIELDS.map(|f| field_counts(gold, pred, f))
}

pub fn scores_from_counts(totals: &[Counts; 4], unmatched_pred_docs: Vec<String>) -> MetadataScores {
    let per_field = METADATA_FIELDS
        .iter()
        .zip(totals)
        .map(|(f, c)| {
            (
                f.to_string(),
                FieldScore {
                    prf: c.prf(),
                    counts: *c,
                },
            )
        })
        .collect();
    MetadataScores {
        per_field,
        macro_f1: macro_f1(totals),
        unmatched_pred_docs,
    }
}

/// Macro F1 over the four metadata fields, keyed by document id.
pub fn metadata_macro_f1(gold: &BTreeMap<String, RawMetadata>, pred: &BTreeMap<String, RawMetadata>) -> MetadataScores {
    let mut totals = [Counts::default(); 4];
    let doc_ids: std::collections::BTreeSet<&String> = gold.keys().chain(pred.keys()).collect();
    for id in doc_ids {
        for (t, c) in totals.iter_mut().zip(document_counts(gold.get(id), pred.get(id))) {
            t.add(c);
        }
    }
    let unmatched = pred.keys().filter(|k| !gold.contains_key(*k)).cloned().collect();
    scores_from_counts(&totals, unmatched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::RawParticipant;

    fn meta(date: &str, names: &[&str]) -> RawMetadata {
        RawMetadata {
            meeting_date: date.into(),
            location: "Salão Nobre".into(),
            meeting_type: "ordinária".into(),
            participants: names
                .iter()
                .map(|n| RawParticipant {
                    name: n.to_string(),
                    party: None,
                    role: None,
                })
                .collect(),
        }
    }

    fn docs(v: Vec<(&str, RawMetadata)>) -> BTreeMap<String, RawMetadata> {
        v.into_iter().map(|(k, m)| (k.to_string(), m)).collect()
    }

    #[test]
    fn identical_scores_one() {
        let g = docs(vec![("a", meta("2025-01-10", &["Ana", "Rui"]))]);
        let s = metadata_macro_f1(&g, &g);
        assert_eq!(s.macro_f1, 1.0);
        assert!(s.per_field.values().all(|f| f.prf.f1 == 1.0));
    }

    #[test]
    fn one_wrong_date_of_two() {
        let g = docs(vec![
            ("a", meta("2025-01-10", &["Ana"])),
            ("b", meta("2025-02-01", &["Rui"])),
        ]);
        let p = docs(vec![
            ("a", meta("10-01-2025", &["ANA"])),
            ("b", meta("2025-02-02", &["Rui"])),
        ]);
        let s = metadata_macro_f1(&g, &p);
        assert_eq!(s.per_field["meeting_date"].prf.f1, 0.5);
        assert_eq!(s.macro_f1, 0.875);
    }

    #[test]
    fn missing_participants_score_zero() {
        let g = docs(vec![("a", meta("2025-01-10", &["Ana", "Rui"]))]);
        let p = docs(vec![("a", meta("2025-01-10", &[]))]);
        let f = &metadata_macro_f1(&g, &p).per_field["participants"];
        assert_eq!((f.prf.precision, f.prf.recall, f.prf.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn extra_pred_document_is_reported() {
        let g = docs(vec![("a", meta("2025-01-10", &["Ana"]))]);
        let p = docs(vec![
            ("a", meta("2025-01-10", &["Ana"])),
            ("z", meta("2025-01-10", &["Ana"])),
        ]);
        let s = metadata_macro_f1(&g, &p);
        assert_eq!(s.unmatched_pred_docs, vec!["z".to_string()]);
        assert_eq!(s.per_field["location"].counts, Counts { tp: 1, fp: 1, fn_: 0 });
    }
}
