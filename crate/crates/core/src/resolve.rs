//! Cross-referencing of extracted names against the participant registry.

use std::collections::BTreeSet;

use crate::model::{slugify, ParticipantRecord};
use crate::text::{normalize_name, tokenize};

/// Minimum token-set Jaccard similarity for a fuzzy match.
pub const FUZZY_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Matched(String),
    Provisional(ParticipantRecord),
}

impl Resolution {
    pub fn id(&self) -> &str {
        match self {
            Resolution::Matched(id) => id,
            Resolution::Provisional(p) => &p.id,
        }
    }
}

/// Extra details carried by a provisional entry.
#[derive(Debug, Clone, Default)]
pub struct NameHints {
    pub party: Option<String>,
    pub role: Option<String>,
}

pub fn token_set(name: &str) -> BTreeSet<String> {
    tokenize(name).into_iter().collect()
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Deterministic id for a provisional participant, so repeated mentions of
/// the same unknown name resolve to one record.
pub fn provisional_id(municipality_id: &str, raw_name: &str) -> String {
    format!("prov-{}-{}", municipality_id, slugify(raw_name))
}

/// Exact normalized match first, then a unique best token-set Jaccard match
/// at or above [`FUZZY_THRESHOLD`]; anything else becomes provisional.
pub fn resolve_participant(
    raw_name: &str,
    registry: &[ParticipantRecord],
    municipality_id: &str,
    hints: &NameHints,
) -> Resolution {
    let wanted = normalize_name(raw_name);
    let mut exact = registry.iter().filter(|p| normalize_name(&p.full_name) == wanted);
    if let (Some(hit), None) = (exact.next(), exact.next()) {
        return Resolution::Matched(hit.id.clone());
    }

    let wanted_tokens = token_set(&wanted);
    let mut best: Option<(&ParticipantRecord, f64)> = None;
    let mut tied = false;
    for p in registry {
        let score = jaccard(&wanted_tokens, &token_set(&p.full_name));
        if score < FUZZY_THRESHOLD {
            continue;
        }
        match best {
            Some((_, b)) if score < b => {}
            Some((_, b)) if score == b => tied = true,
            _ => {
                best = Some((p, score));
                tied = false;
            }
        }
    }
    if let (Some((hit, _)), false) = (best, tied) {
        return Resolution::Matched(hit.id.clone());
    }

    let full_name = raw_name.split_whitespace().collect::<Vec<_>>().join(" ");
    Resolution::Provisional(ParticipantRecord {
        id: provisional_id(municipality_id, raw_name),
        full_name,
        party: hints.party.clone(),
        role: hints.role.clone(),
        municipality_id: municipality_id.to_string(),
        unresolved: true,
    })
}
