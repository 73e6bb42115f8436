//! Crash-injection and snapshot round-trip checks over a file store.

use std::path::Path;
use std::sync::Arc;

use citilink_core::extraction::RuleExtractor;
use citilink_core::search::{search, DateRange, Facets, IndexSnapshot, Query, Scope};
use citilink_core::service::{RegistryFile, Service};
use citilink_core::store::{FailPoint, FileStore, Store};
use citilink_core::MinuteStatus;

pub fn file_store(dir: &Path) -> FileStore {
    FileStore::open(dir).unwrap().without_fsync()
}

/// Twenty queries over the fixture corpus covering every scope and facet
/// dimension, paging and a no-match term.
pub fn battery() -> Vec<Query> {
    let d = |s: &str| chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
    let with = |text: &str, scope: Scope, facets: Facets| Query {
        text: text.into(),
        scope,
        facets,
        ..Query::default()
    };
    let f = Facets::default;
    vec![
        with("health", Scope::Subjects, f()),
        with("health", Scope::All, f()),
        with("health", Scope::Minutes, f()),
        with("budget", Scope::All, f()),
        with("flood prevention", Scope::Subjects, f()),
        with("water tariff", Scope::All, f()),
        with("saúde", Scope::All, f()),
        with(
            "",
            Scope::All,
            Facets {
                municipality_ids: vec!["covilha".into()],
                ..f()
            },
        ),
        with(
            "",
            Scope::Subjects,
            Facets {
                topic_ids: vec!["topic-finance".into()],
                ..f()
            },
        ),
        with(
            "",
            Scope::All,
            Facets {
                parties: vec!["CDU".into()],
                ..f()
            },
        ),
        with(
            "road",
            Scope::All,
            Facets {
                municipality_ids: vec!["fundao".into()],
                ..f()
            },
        ),
        with(
            "",
            Scope::Minutes,
            Facets {
                meeting_types: vec!["extraordinary".into()],
                ..f()
            },
        ),
        with(
            "",
            Scope::All,
            Facets {
                date_range: Some(DateRange {
                    start: d("2025-02-01"),
                    end: d("2025-04-30"),
                }),
                ..f()
            },
        ),
        with(
            "unit",
            Scope::Subjects,
            Facets {
                parties: vec!["PS".into(), "PSD".into()],
                ..f()
            },
        ),
        with(
            "",
            Scope::Subjects,
            Facets {
                parties: vec!["PS".into()],
                topic_ids: vec!["topic-urbanism".into()],
                ..f()
            },
        ),
        with("school transport", Scope::All, f()),
        with(
            "festival",
            Scope::All,
            Facets {
                participant_ids: vec!["fundao-igor-matias".into()],
                ..f()
            },
        ),
        with("centre", Scope::All, f()),
        Query {
            text: "the".into(),
            page: 2,
            page_size: 3,
            ..Query::default()
        },
        with("nonexistentterm", Scope::All, f()),
    ]
}

/// The live snapshot, its byte round-trip and the copy loaded from disk
/// must answer every battery query identically.
pub fn check_battery(live: &IndexSnapshot, from_disk: &IndexSnapshot) -> Result<usize, String> {
    let from_bytes = IndexSnapshot::from_bytes(&live.to_bytes()).map_err(|e| e.to_string())?;
    let queries = battery();
    for q in &queries {
        let a = search(live, q).map_err(|e| e.to_string())?;
        if a != search(&from_bytes, q).map_err(|e| e.to_string())? {
            return Err(format!("byte round-trip differs on {q:?}"));
        }
        if a != search(from_disk, q).map_err(|e| e.to_string())? {
            return Err(format!("disk copy differs on {q:?}"));
        }
    }
    Ok(queries.len())
}

/// Brings one minute to `validated`, then publishes through a store that
/// fails at `point`. The on-disk state must still be the validated one,
/// and the next healthy writer must publish over the debris.
pub fn check_crash(
    dir: &Path,
    point: FailPoint,
    registry: &RegistryFile,
    municipality: &str,
    filename: &str,
    text: &str,
) -> Result<(), String> {
    let e = |e: &dyn std::fmt::Display| e.to_string();
    let svc = Service::open(Arc::new(file_store(dir))).map_err(|x| e(&x))?;
    svc.import_registry(registry.clone()).map_err(|x| e(&x))?;
    let m = svc.ingest(municipality, filename, text).map_err(|x| e(&x))?;
    svc.run_extraction(&m.id, &RuleExtractor).map_err(|x| e(&x))?;
    svc.validate(&m.id, true).map_err(|x| e(&x))?;
    let before = file_store(dir).load().map_err(|x| e(&x))?;

    let failing = Service::open(Arc::new(file_store(dir).with_fail_point(Some(point)))).map_err(|x| e(&x))?;
    if failing.publish(&m.id).is_ok() {
        return Err(format!("{point:?}: publish succeeded despite the injected fault"));
    }
    let after = file_store(dir).load().map_err(|x| e(&x))?;
    if after.data != before.data || after.manifest != before.manifest {
        return Err(format!("{point:?} leaked a partial commit"));
    }
    if after.data.minute(&m.id).map(|x| x.status) != Some(MinuteStatus::Validated) {
        return Err(format!("{point:?}: minute no longer validated"));
    }

    let healthy = Service::open(Arc::new(file_store(dir))).map_err(|x| e(&x))?;
    healthy.publish(&m.id).map_err(|x| e(&x))?;
    let done = file_store(dir).load().map_err(|x| e(&x))?;
    if done.data.minute(&m.id).map(|x| x.status) != Some(MinuteStatus::Published) {
        return Err(format!("{point:?}: recovery publish did not stick"));
    }
    if done.snapshot.map(|s| s.minutes().len()) != Some(1) {
        return Err(format!("{point:?}: recovered snapshot does not hold the minute"));
    }
    Ok(())
}
