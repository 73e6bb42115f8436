use std::sync::Mutex;

use chrono::Utc;

use super::{ChangeSet, Committed, DataSet, Loaded, Store, StoreError, StoreManifest};
use crate::search::{Bm25Params, IndexSnapshot};

/// Same commit rules as [`super::FileStore`], kept in memory.
#[derive(Debug, Default)]
pub struct MemoryStore {
    state: Mutex<Loaded>,
    audit: Mutex<Vec<serde_json::Value>>,
}

impl Default for Loaded {
    fn default() -> Self {
        Loaded {
            manifest: StoreManifest::empty(),
            data: DataSet::default(),
            snapshot: None,
        }
    }
}

impl MemoryStore {
    pub fn new() -> Self {
        MemoryStore::default()
    }

    pub fn audit_entries(&self) -> Vec<serde_json::Value> {
        self.audit.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }
}

impl Store for MemoryStore {
    fn load(&self) -> Result<Loaded, StoreError> {
        Ok(self.state.lock().unwrap_or_else(|p| p.into_inner()).clone())
    }

    fn commit(&self, change: ChangeSet) -> Result<Committed, StoreError> {
        let mut state = self.state.lock().unwrap_or_else(|p| p.into_inner());
        let data = state.data.apply(&change)?;
        data.check()?;
        let snapshot = if change.rebuild_index {
            Some(IndexSnapshot::build(&data, Bm25Params::default()).0)
        } else {
            state.snapshot.clone()
        };
        let mut manifest = state.manifest.clone();
        manifest.generation += 1;
        manifest.updated_at = Utc::now();
        *state = Loaded {
            manifest: manifest.clone(),
            data: data.clone(),
            snapshot: snapshot.clone(),
        };
        Ok(Committed {
            manifest,
            data,
            snapshot,
        })
    }

    fn append_audit(&self, entry: &serde_json::Value) -> Result<(), StoreError> {
        self.audit.lock().unwrap_or_else(|p| p.into_inner()).push(entry.clone());
        Ok(())
    }
}
