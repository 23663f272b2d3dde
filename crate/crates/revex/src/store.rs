//! Durable sessions: one append-only JSON-lines file per session.
//!
//! The first line of `<session_id>.jsonl` is a header with the session id
//! and creation time; every later line is one [`InteractionEvent`]. State is
//! never written, only rebuilt by replaying the events.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use revex_core::{Catalog, EngineConfig, InteractionEvent, ReadingSession, SessionSnapshot};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EXTENSION: &str = "jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    pub created_at: u64,
}

pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    /// Opens (creating if needed) a store directory.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, session_id: &str) -> PathBuf {
        self.dir.join(format!("{session_id}.{EXTENSION}"))
    }

    /// Starts a new session file. Fails if the id is taken.
    pub fn create(&self, session_id: &str, created_at: u64) -> Result<SessionFile> {
        if !valid_session_id(session_id) {
            return Err(Error::Config(format!("invalid session id {session_id:?}")));
        }
        let path = self.path_of(session_id);
        let file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let mut out = SessionFile { path, file };
        let header = SessionHeader {
            session_id: session_id.to_string(),
            created_at,
        };
        out.write_line(&header)?;
        Ok(out)
    }

    /// Writes a session from an exported log, e.g. into a fresh store.
    pub fn import(&self, snapshot: &SessionSnapshot) -> Result<()> {
        let mut file = self.create(&snapshot.session_id, snapshot.created_at)?;
        for e in &snapshot.events {
            file.write_line(e)?;
        }
        Ok(())
    }

    /// Reopens an existing session file for appending.
    pub fn append_to(&self, session_id: &str) -> Result<SessionFile> {
        let path = self.path_of(session_id);
        let file = OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(SessionFile { path, file })
    }

    /// Session files in id order.
    fn files(&self) -> Result<Vec<(String, PathBuf)>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))? {
            let path = entry.map_err(|e| Error::io(&self.dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some(EXTENSION) {
                continue;
            }
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path));
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn load(&self, session_id: &str) -> Result<SessionSnapshot> {
        read_session_file(session_id, &self.path_of(session_id))
    }

    /// Every stored session. Any unreadable file aborts the whole load.
    pub fn load_all(&self) -> Result<Vec<SessionSnapshot>> {
        self.files()?
            .into_iter()
            .map(|(id, path)| read_session_file(&id, &path))
            .collect()
    }

    /// Replays every stored session against the catalog.
    pub fn restore(&self, catalog: &Catalog, config: &EngineConfig) -> Result<Vec<ReadingSession>> {
        self.load_all()?
            .into_iter()
            .map(|snap| {
                ReadingSession::replay(&snap, catalog, config).map_err(|e| Error::CorruptSession {
                    session: snap.session_id.clone(),
                    message: e.to_string(),
                })
            })
            .collect()
    }
}

fn read_session_file(session_id: &str, path: &Path) -> Result<SessionSnapshot> {
    let corrupt = |message: String| Error::CorruptSession {
        session: session_id.to_string(),
        message,
    };
    let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut lines = reader.lines().enumerate();
    let header: SessionHeader = match lines.next() {
        Some((_, Ok(line))) => serde_json::from_str(&line).map_err(|e| corrupt(format!("header: {e}")))?,
        Some((_, Err(e))) => return Err(Error::io(path, e)),
        None => return Err(corrupt("empty file".into())),
    };
    if header.session_id != session_id {
        return Err(corrupt(format!("header names session {}", header.session_id)));
    }
    let mut events = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let event: InteractionEvent =
            serde_json::from_str(&line).map_err(|e| corrupt(format!("line {}: {e}", i + 1)))?;
        events.push(event);
    }
    Ok(SessionSnapshot {
        session_id: header.session_id,
        created_at: header.created_at,
        events,
    })
}

/// Append handle for one session file.
#[derive(Debug)]
pub struct SessionFile {
    path: PathBuf,
    file: File,
}

impl SessionFile {
    fn write_line<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let mut line = serde_json::to_vec(value).expect("serializable");
        line.push(b'\n');
        self.file.write_all(&line).map_err(|e| Error::io(&self.path, e))?;
        self.file.flush().map_err(|e| Error::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }

    /// Appends one event and syncs it to disk before returning.
    pub fn append(&mut self, event: &InteractionEvent) -> Result<()> {
        self.write_line(event)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
