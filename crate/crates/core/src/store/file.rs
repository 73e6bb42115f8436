use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::Utc;
use log::{debug, warn};

use super::{ChangeSet, Committed, DataSet, Loaded, Store, StoreError, StoreManifest, COLLECTIONS, SCHEMA_VERSION};
use crate::search::{Bm25Params, IndexSnapshot};

const MANIFEST: &str = "manifest.json";
const LOCK: &str = ".writer.lock";
const AUDIT: &str = "audit.jsonl";

/// Where an injected fault aborts a commit, for crash testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailPoint {
    /// New collection files are on disk, the manifest is untouched.
    AfterStaging,
    /// `manifest.json.tmp` is written but not yet renamed into place.
    BeforeManifestRename,
}

/// JSON-lines collections under `<root>/collections`, snapshots under
/// `<root>/index`, tied together by `<root>/manifest.json`.
///
/// Collection files are immutable once written; each commit writes the
/// touched collections under a new generation number and swaps the
/// manifest with a rename.
#[derive(Debug, Clone)]
pub struct FileStore {
    root: PathBuf,
    durable: bool,
    fail_point: Option<FailPoint>,
    params: Bm25Params,
    /// Serializes in-process writers; holds the lock file when the store is
    /// owned long-term (see [`FileStore::hold_writer_lock`]).
    writer: Arc<Mutex<Option<File>>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for dir in [root.clone(), root.join("collections"), root.join("index")] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        Ok(FileStore {
            root,
            durable: true,
            fail_point: None,
            params: Bm25Params::default(),
            writer: Arc::new(Mutex::new(None)),
        })
    }

    /// Skips fsync; for tests and throwaway stores.
    pub fn without_fsync(mut self) -> Self {
        self.durable = false;
        self
    }

    pub fn with_fail_point(mut self, point: Option<FailPoint>) -> Self {
        self.fail_point = point;
        self
    }

    pub fn with_bm25(mut self, params: Bm25Params) -> Self {
        self.params = params;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST)
    }

    fn write_file(&self, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        let mut f = File::create(path).map_err(io_err(path))?;
        f.write_all(bytes).map_err(io_err(path))?;
        if self.durable {
            f.sync_all().map_err(io_err(path))?;
        }
        Ok(())
    }

    fn sync_dir(&self, dir: &Path) {
        if self.durable {
            if let Ok(d) = File::open(dir) {
                let _ = d.sync_all();
            }
        }
    }

    fn read_manifest(&self) -> Result<Option<StoreManifest>, StoreError> {
        let path = self.manifest_path();
        match fs::read(&path) {
            Ok(bytes) => {
                let m: StoreManifest = serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
                    file: path.display().to_string(),
                    line: e.line(),
                    reason: e.to_string(),
                })?;
                if m.schema_version != SCHEMA_VERSION {
                    return Err(StoreError::SchemaVersion(m.schema_version));
                }
                Ok(Some(m))
            }
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    fn load_once(&self) -> Result<Loaded, StoreError> {
        let Some(manifest) = self.read_manifest()? else {
            return Ok(Loaded {
                manifest: StoreManifest::empty(),
                data: DataSet::default(),
                snapshot: None,
            });
        };
        let mut data = DataSet::default();
        for (name, rel) in &manifest.collections {
            let path = self.root.join(rel);
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            data.decode_into(name, &bytes, rel)?;
            data.check_records(name, rel)?;
        }
        data.check()?;
        let snapshot = match &manifest.last_snapshot_path {
            Some(rel) => {
                let path = self.root.join(rel);
                let bytes = fs::read(&path).map_err(io_err(&path))?;
                Some(IndexSnapshot::from_bytes(&bytes).map_err(|e| StoreError::Corrupt {
                    file: rel.clone(),
                    line: 0,
                    reason: e.to_string(),
                })?)
            }
            None => None,
        };
        Ok(Loaded {
            manifest,
            data,
            snapshot,
        })
    }

    fn lock(&self) -> Result<File, StoreError> {
        let path = self.root.join(LOCK);
        let f = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(io_err(&path))?;
        match f.try_lock() {
            Ok(()) => Ok(f),
            Err(fs::TryLockError::WouldBlock) => Err(StoreError::Locked),
            Err(fs::TryLockError::Error(e)) => Err(io_err(&path)(e)),
        }
    }

    /// Keeps the writer lock until the store (and its clones) are dropped,
    /// so other processes cannot commit meanwhile.
    pub fn hold_writer_lock(&self) -> Result<(), StoreError> {
        let mut held = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        if held.is_none() {
            *held = Some(self.lock()?);
        }
        Ok(())
    }

    fn commit_locked(&self, change: ChangeSet) -> Result<Committed, StoreError> {
        let current = self.load_once()?;
        let data = current.data.apply(&change)?;
        data.check()?;

        let generation = current.manifest.generation + 1;
        let mut manifest = StoreManifest {
            schema_version: SCHEMA_VERSION,
            generation,
            collections: current.manifest.collections.clone(),
            last_snapshot_path: current.manifest.last_snapshot_path.clone(),
            updated_at: Utc::now(),
        };
        let touched = change.touched();
        for name in COLLECTIONS {
            if touched.contains(name) || !manifest.collections.contains_key(name) {
                let rel = format!("collections/{name}.{generation}.jsonl");
                self.write_file(&self.root.join(&rel), &data.encode(name))?;
                manifest.collections.insert(name.to_string(), rel);
            }
        }
        let mut snapshot = current.snapshot;
        if change.rebuild_index {
            let (snap, warnings) = IndexSnapshot::build(&data, self.params);
            for w in &warnings {
                warn!("index: {w}");
            }
            let rel = format!("index/snapshot.{generation}.cidx");
            self.write_file(&self.root.join(&rel), &snap.to_bytes())?;
            manifest.last_snapshot_path = Some(rel);
            snapshot = Some(snap);
        }
        self.sync_dir(&self.root.join("collections"));
        self.sync_dir(&self.root.join("index"));
        if self.fail_point == Some(FailPoint::AfterStaging) {
            return Err(StoreError::Injected("after staging"));
        }

        let tmp = self.root.join(format!("{MANIFEST}.tmp"));
        let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        self.write_file(&tmp, &bytes)?;
        if self.fail_point == Some(FailPoint::BeforeManifestRename) {
            return Err(StoreError::Injected("before manifest rename"));
        }
        fs::rename(&tmp, self.manifest_path()).map_err(io_err(&tmp))?;
        self.sync_dir(&self.root);

        self.collect_garbage(&current.manifest, &manifest);
        Ok(Committed {
            manifest,
            data,
            snapshot,
        })
    }

    /// Removes files referenced by neither the new nor the previous manifest.
    /// Keeping the previous generation lets readers that loaded it a moment
    /// ago finish.
    fn collect_garbage(&self, previous: &StoreManifest, current: &StoreManifest) {
        let keep: BTreeSet<PathBuf> = previous
            .collections
            .values()
            .chain(current.collections.values())
            .chain(previous.last_snapshot_path.iter())
            .chain(current.last_snapshot_path.iter())
            .map(|rel| self.root.join(rel))
            .collect();
        for dir in ["collections", "index"] {
            let Ok(entries) = fs::read_dir(self.root.join(dir)) else {
                continue;
            };
            for entry in entries.flatten() {
                let path = entry.path();
                if !keep.contains(&path) {
                    debug!("removing stale {}", path.display());
                    let _ = fs::remove_file(&path);
                }
            }
        }
    }

    /// Bytes of one committed collection file.
    pub fn collection_bytes(&self, name: &str) -> Result<Option<Vec<u8>>, StoreError> {
        let Some(manifest) = self.read_manifest()? else {
            return Ok(None);
        };
        match manifest.collections.get(name) {
            Some(rel) => {
                let path = self.root.join(rel);
                fs::read(&path).map(Some).map_err(io_err(&path))
            }
            None => Ok(None),
        }
    }
}

impl Store for FileStore {
    fn load(&self) -> Result<Loaded, StoreError> {
        // a concurrent commit may garbage-collect files of a manifest two
        // generations old; re-read the manifest and try again
        let mut attempt = 0;
        loop {
            match self.load_once() {
                Err(StoreError::Io { source, .. }) if source.kind() == ErrorKind::NotFound && attempt < 3 => {
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn commit(&self, change: ChangeSet) -> Result<Committed, StoreError> {
        let held = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let _temporary = if held.is_none() { Some(self.lock()?) } else { None };
        self.commit_locked(change)
    }

    fn append_audit(&self, entry: &serde_json::Value) -> Result<(), StoreError> {
        let path = self.root.join(AUDIT);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let mut line = serde_json::to_vec(entry).expect("audit entry serializes");
        line.push(b'\n');
        f.write_all(&line).map_err(io_err(&path))?;
        if self.durable {
            f.sync_all().map_err(io_err(&path))?;
        }
        Ok(())
    }
}
