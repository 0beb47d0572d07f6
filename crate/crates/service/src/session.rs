//! Session documents and their file-backed store.

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex as AsyncMutex, OwnedMutexGuard};
use uuid::Uuid;

use causeplan::{BindingDoc, PlanReport, TransferResult, ValidationDocument, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub v: u32,
    pub id: String,
    /// Bumped on every write; clients echo it back in `save_step`.
    pub version: u64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub step1: Option<Step1>,
    pub step2: Option<Step2>,
    pub step3: Option<Step3>,
}

/// Training-object bindings, stored as submitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step1 {
    pub bindings: Vec<BindingDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step2 {
    pub source: String,
    pub validation: ValidationDocument,
    pub plan: Option<PlanReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step3 {
    pub results: Vec<Step3Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step3Entry {
    pub binding: BindingDoc,
    pub result: TransferResult,
}

impl Session {
    fn new() -> Self {
        let now = Utc::now();
        Session {
            v: SCHEMA_VERSION,
            id: Uuid::new_v4().to_string(),
            version: 0,
            created_at: now,
            updated_at: now,
            step1: None,
            step2: None,
            step3: None,
        }
    }

    pub fn training_objects(&self) -> Vec<String> {
        self.step1
            .iter()
            .flat_map(|s| s.bindings.iter().map(|b| b.object_id.clone()))
            .collect()
    }

    /// Source text of a step-2 model that passed validation.
    pub fn validated_source(&self) -> Option<&str> {
        self.step2
            .as_ref()
            .filter(|s| s.validation.ok)
            .map(|s| s.source.as_str())
    }

    pub fn is_frozen(&self) -> bool {
        self.step3.as_ref().is_some_and(|s| !s.results.is_empty())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("session not found")]
    NotFound,
    #[error("session store: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt session document: {0}")]
    Corrupt(#[from] serde_json::Error),
}

/// One JSON file per session. Writes go through a temp file and a rename,
/// and are serialized per session by an async lock.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
    locks: Arc<Mutex<HashMap<String, Arc<AsyncMutex<()>>>>>,
}

/// Exclusive access to one session until dropped.
pub struct SessionGuard {
    _guard: OwnedMutexGuard<()>,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(SessionStore {
            dir,
            locks: Arc::default(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf, StoreError> {
        // Only well-formed ids map to files.
        let id = Uuid::parse_str(id).map_err(|_| StoreError::NotFound)?;
        Ok(self.dir.join(format!("{}.json", id.hyphenated())))
    }

    pub async fn lock(&self, id: &str) -> SessionGuard {
        let lock = self
            .locks
            .lock()
            .expect("lock table")
            .entry(id.to_string())
            .or_default()
            .clone();
        SessionGuard {
            _guard: lock.lock_owned().await,
        }
    }

    pub async fn create(&self) -> Result<Session, StoreError> {
        let session = Session::new();
        self.write(&session).await?;
        Ok(session)
    }

    pub async fn load(&self, id: &str) -> Result<Session, StoreError> {
        let path = self.path(id)?;
        match tokio::fs::read(&path).await {
            Ok(bytes) => Ok(serde_json::from_slice(&bytes)?),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::NotFound),
            Err(e) => Err(e.into()),
        }
    }

    /// Persists `session` with a bumped version and timestamp. Callers hold
    /// the session's guard.
    pub async fn commit(&self, _guard: &SessionGuard, session: &mut Session) -> Result<(), StoreError> {
        session.version += 1;
        session.updated_at = Utc::now().max(session.created_at);
        self.write(session).await
    }

    async fn write(&self, session: &Session) -> Result<(), StoreError> {
        let path = self.path(&session.id)?;
        let tmp = path.with_extension("json.tmp");
        let bytes = serde_json::to_vec_pretty(session)?;
        tokio::fs::write(&tmp, bytes).await?;
        tokio::fs::rename(&tmp, &path).await?;
        Ok(())
    }
}
