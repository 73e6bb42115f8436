#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use citilink_core::extraction::RuleExtractor;
use citilink_core::service::{RegistryFile, Service};
use citilink_core::store::Store;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn registry() -> RegistryFile {
    serde_json::from_slice(&std::fs::read(fixtures().join("registry.json")).unwrap()).unwrap()
}

/// `(municipality slug, file name, text)` for every fixture minute, sorted.
pub fn minute_files() -> Vec<(String, String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(fixtures().join("minutes"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let slug = name.split('-').next().unwrap().to_string();
            (slug, name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

/// Registry imported and all fixture minutes published.
pub fn publish_all(store: Arc<dyn Store>) -> Service {
    let svc = Service::open(store).unwrap();
    svc.import_registry(registry()).unwrap();
    for (slug, name, text) in minute_files() {
        let m = svc.ingest(&slug, &name, &text).unwrap();
        svc.run_extraction(&m.id, &RuleExtractor).unwrap();
        svc.validate(&m.id, true).unwrap();
        svc.publish(&m.id).unwrap();
    }
    svc
}
