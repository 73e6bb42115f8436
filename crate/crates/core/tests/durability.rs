mod common;
mod oracles;

use std::sync::Arc;

use citilink_core::search::IndexSnapshot;
use citilink_core::service::Service;
use citilink_core::store::{FailPoint, Store, StoreError};
use oracles::durability::{self, file_store};

#[test]
fn reopen_reproduces_state() {
    let dir = tempfile::tempdir().unwrap();
    let svc = common::publish_all(Arc::new(file_store(dir.path())));
    let reopened = file_store(dir.path()).load().unwrap();
    assert_eq!(reopened.data, *svc.data());
    assert_eq!(reopened.snapshot.unwrap(), *svc.snapshot());
    assert_eq!(reopened.manifest.schema_version, 1);
}

#[test]
fn empty_root_loads_empty() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = file_store(dir.path()).load().unwrap();
    assert!(loaded.data.minutes.is_empty());
    assert_eq!(loaded.manifest.generation, 0);
    assert!(loaded.snapshot.is_none());
}

fn crash_during_publish(point: FailPoint) {
    let dir = tempfile::tempdir().unwrap();
    let (slug, name, text) = common::minute_files().remove(0);
    durability::check_crash(dir.path(), point, &common::registry(), &slug, &name, &text).unwrap();
}

#[test]
fn crash_after_staging_keeps_old_state() {
    crash_during_publish(FailPoint::AfterStaging);
}

#[test]
fn crash_before_manifest_rename_keeps_old_state() {
    crash_during_publish(FailPoint::BeforeManifestRename);
}

#[test]
fn stale_generations_are_collected() {
    let dir = tempfile::tempdir().unwrap();
    common::publish_all(Arc::new(file_store(dir.path())));
    let loaded = file_store(dir.path()).load().unwrap();
    let files = std::fs::read_dir(dir.path().join("collections")).unwrap().count();
    // current plus at most one previous generation of each collection
    assert!(
        files <= 2 * loaded.manifest.collections.len(),
        "{files} collection files left"
    );
    let snaps = std::fs::read_dir(dir.path().join("index")).unwrap().count();
    assert!(snaps <= 2);
}

#[test]
fn corrupt_line_is_reported_with_location() {
    let dir = tempfile::tempdir().unwrap();
    common::publish_all(Arc::new(file_store(dir.path())));
    let store = file_store(dir.path());
    let rel = store.load().unwrap().manifest.collections["minutes"].clone();
    let path = dir.path().join(&rel);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.extend_from_slice(b"{not json\n");
    std::fs::write(&path, bytes).unwrap();
    match store.load() {
        Err(StoreError::Corrupt { file, line, .. }) => {
            assert_eq!(file, rel);
            assert_eq!(line, 7);
        }
        other => panic!("expected corruption error, got {other:?}"),
    }
}

#[test]
fn second_writer_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let owner = file_store(dir.path());
    owner.hold_writer_lock().unwrap();
    let other = Service::open(Arc::new(file_store(dir.path()))).unwrap();
    assert!(matches!(
        other.import_registry(common::registry()),
        Err(citilink_core::service::ServiceError::Store(StoreError::Locked))
    ));
    // the owner itself still commits
    Service::open(Arc::new(owner.clone()))
        .unwrap()
        .import_registry(common::registry())
        .unwrap();
    drop(owner);
}

#[test]
fn snapshot_save_load_answers_battery_identically() {
    let dir = tempfile::tempdir().unwrap();
    let svc = common::publish_all(Arc::new(file_store(dir.path())));
    let from_disk = file_store(dir.path()).load().unwrap().snapshot.unwrap();
    assert_eq!(durability::check_battery(&svc.snapshot(), &from_disk).unwrap(), 20);
}

#[test]
fn truncated_snapshot_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let svc = common::publish_all(Arc::new(file_store(dir.path())));
    let bytes = svc.snapshot().to_bytes();
    assert!(IndexSnapshot::from_bytes(&bytes[..bytes.len() / 2]).is_err());
    assert!(IndexSnapshot::from_bytes(b"CIDX2\n{}").is_err());
}
