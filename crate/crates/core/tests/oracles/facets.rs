//! Brute-force facet recount over every selection subset.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, NaiveDate};
use citilink_core::search::{facet_counts, DateRange, Dimension, Facets, IndexSnapshot, Query, Scope, UnitInput};

fn unit_values(u: &UnitInput, dim: Dimension) -> Vec<String> {
    match dim {
        Dimension::Municipality => vec![u.municipality_id.clone()],
        Dimension::Topic => u.topic_ids.clone(),
        Dimension::Party => u.parties.clone(),
        Dimension::Participant => u.participant_ids.clone(),
        Dimension::MeetingType => vec![u.meeting_type.clone()],
        Dimension::Year => vec![u.meeting_date.year().to_string()],
    }
}

/// Selections as plain value sets; years stand for the date range from the
/// first of January of the smallest to the end of the largest.
type Selection = BTreeMap<Dimension, BTreeSet<String>>;

fn to_facets(sel: &Selection) -> Facets {
    let list = |d| {
        sel.get(&d)
            .map(|s: &BTreeSet<String>| s.iter().cloned().collect())
            .unwrap_or_default()
    };
    let years: Vec<i32> = sel
        .get(&Dimension::Year)
        .into_iter()
        .flatten()
        .map(|y| y.parse().unwrap())
        .collect();
    Facets {
        municipality_ids: list(Dimension::Municipality),
        topic_ids: list(Dimension::Topic),
        parties: list(Dimension::Party),
        participant_ids: list(Dimension::Participant),
        meeting_types: list(Dimension::MeetingType),
        date_range: (!years.is_empty()).then(|| DateRange {
            start: NaiveDate::from_ymd_opt(*years.iter().min().unwrap(), 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(*years.iter().max().unwrap(), 12, 31).unwrap(),
        }),
    }
}

fn passes(u: &UnitInput, sel: &Selection, dim: Dimension) -> bool {
    match sel.get(&dim) {
        None => true,
        Some(s) if s.is_empty() => true,
        Some(s) if dim == Dimension::Year => {
            let ys: Vec<i32> = s.iter().map(|y| y.parse().unwrap()).collect();
            let y = u.meeting_date.year();
            *ys.iter().min().unwrap() <= y && y <= *ys.iter().max().unwrap()
        }
        Some(s) => unit_values(u, dim).iter().any(|v| s.contains(v)),
    }
}

fn brute(units: &[&UnitInput], sel: &Selection) -> BTreeMap<Dimension, BTreeMap<String, u64>> {
    let mut out = BTreeMap::new();
    for dim in Dimension::ALL {
        let mut counts = BTreeMap::new();
        for u in units {
            let others_ok = Dimension::ALL.iter().filter(|d| **d != dim).all(|d| passes(u, sel, *d));
            if others_ok {
                for v in unit_values(u, dim) {
                    *counts.entry(v).or_insert(0u64) += 1;
                }
            }
        }
        out.insert(dim, counts);
    }
    out
}

fn subsets(values: &[String]) -> Vec<BTreeSet<String>> {
    assert!(values.len() <= 12, "too many values for exhaustive subsets");
    (0u32..(1 << values.len()))
        .map(|mask| {
            values
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

/// Every subset of every dimension's values, alone and combined with a
/// fixed selection in one other dimension, for each scope. Returns the
/// number of selections compared.
pub fn check_all_subsets(snap: &IndexSnapshot) -> Result<usize, String> {
    let all: Vec<&UnitInput> = snap.units().iter().collect();
    let mut checked = 0;
    for dim in Dimension::ALL {
        let values: Vec<String> = all
            .iter()
            .flat_map(|u| unit_values(u, dim))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let backgrounds: Vec<Selection> = vec![
            Selection::new(),
            // a second-dimension selection checks the AND across dimensions
            if dim == Dimension::Party {
                [(Dimension::Topic, ["topic-finance".to_string()].into())].into()
            } else {
                [(Dimension::Party, ["PS".to_string()].into())].into()
            },
        ];
        for subset in subsets(&values) {
            for bg in &backgrounds {
                for scope in [Scope::All, Scope::Minutes, Scope::Subjects] {
                    let mut sel = bg.clone();
                    sel.insert(dim, subset.clone());
                    let q = Query {
                        scope,
                        facets: to_facets(&sel),
                        ..Query::default()
                    };
                    let in_scope: Vec<&UnitInput> = all
                        .iter()
                        .copied()
                        .filter(|u| match scope {
                            Scope::All => true,
                            Scope::Minutes => u.kind == citilink_core::search::UnitKind::Minute,
                            Scope::Subjects => u.kind == citilink_core::search::UnitKind::Subject,
                        })
                        .collect();
                    let want = brute(&in_scope, &sel);
                    let got = facet_counts(snap, &q);
                    if got != want {
                        return Err(format!(
                            "{dim:?} {subset:?} {scope:?}: got {got:?}, brute force {want:?}"
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}
