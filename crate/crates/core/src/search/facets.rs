use std::collections::BTreeMap;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::query::Facets;
use super::snapshot::UnitInput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Municipality,
    Topic,
    Party,
    Participant,
    MeetingType,
    /// Selected through a date range, counted per year.
    Year,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Municipality,
        Dimension::Topic,
        Dimension::Party,
        Dimension::Participant,
        Dimension::MeetingType,
        Dimension::Year,
    ];
}

/// Per dimension, facet value to number of matching units.
pub type FacetCounts = BTreeMap<Dimension, BTreeMap<String, u64>>;

fn any_selected(selected: &[String], values: &[String]) -> bool {
    selected.is_empty() || selected.iter().any(|s| values.contains(s))
}

fn one_selected(selected: &[String], value: &str) -> bool {
    selected.is_empty() || selected.iter().any(|s| s == value)
}

/// Whether `unit` passes the selection in one dimension.
pub fn passes(unit: &UnitInput, facets: &Facets, dim: Dimension) -> bool {
    match dim {
        Dimension::Municipality => one_selected(&facets.municipality_ids, &unit.municipality_id),
        Dimension::Topic => any_selected(&facets.topic_ids, &unit.topic_ids),
        Dimension::Party => any_selected(&facets.parties, &unit.parties),
        Dimension::Participant => any_selected(&facets.participant_ids, &unit.participant_ids),
        Dimension::MeetingType => one_selected(&facets.meeting_types, &unit.meeting_type),
        Dimension::Year => facets.date_range.is_none_or(|r| r.contains(unit.meeting_date)),
    }
}

/// AND across dimensions, optionally ignoring one of them.
pub fn passes_all_except(unit: &UnitInput, facets: &Facets, except: Option<Dimension>) -> bool {
    Dimension::ALL
        .iter()
        .filter(|&&d| Some(d) != except)
        .all(|&d| passes(unit, facets, d))
}

/// Values a unit contributes to a dimension's counts.
pub fn values_of(unit: &UnitInput, dim: Dimension) -> Vec<String> {
    match dim {
        Dimension::Municipality => vec![unit.municipality_id.clone()],
        Dimension::Topic => unit.topic_ids.clone(),
        Dimension::Party => unit.parties.clone(),
        Dimension::Participant => unit.participant_ids.clone(),
        Dimension::MeetingType => vec![unit.meeting_type.clone()],
        Dimension::Year => vec![unit.meeting_date.year().to_string()],
    }
}

/// Multi-select counts: each dimension is counted over units that satisfy
/// every other dimension's selection, so picking a value never hides its
/// siblings.
pub fn count_facets<'a>(units: impl Iterator<Item = &'a UnitInput> + Clone, facets: &Facets) -> FacetCounts {
    let mut out = FacetCounts::new();
    for dim in Dimension::ALL {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for unit in units.clone().filter(|u| passes_all_except(u, facets, Some(dim))) {
            for v in values_of(unit, dim) {
                *counts.entry(v).or_default() += 1;
            }
        }
        out.insert(dim, counts);
    }
    out
}
