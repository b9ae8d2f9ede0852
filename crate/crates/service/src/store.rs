//! Append-only JSON-lines log per session under the data directory.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::session::{Event, Session};

#[derive(Debug, Clone)]
pub struct Store {
    dir: PathBuf,
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Store { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    pub fn create(&self, event: &Event, id: &str) -> io::Result<()> {
        let mut f = OpenOptions::new().write(true).create_new(true).open(self.path(id))?;
        write_event(&mut f, event)
    }

    pub fn append(&self, id: &str, event: &Event) -> io::Result<()> {
        let mut f = OpenOptions::new().append(true).open(self.path(id))?;
        write_event(&mut f, event)
    }

    /// Loads every session in the directory. Unreadable or inapplicable
    /// trailing lines are cut from the file and the session is flagged.
    pub fn recover(&self) -> io::Result<Vec<Session>> {
        let mut sessions = Vec::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match recover_file(&path) {
                Ok(s) => sessions.push(s),
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        Ok(sessions)
    }
}

fn write_event(f: &mut File, event: &Event) -> io::Result<()> {
    let mut line = serde_json::to_vec(event).map_err(io::Error::other)?;
    line.push(b'\n');
    f.write_all(&line)?;
    f.sync_data()
}

fn recover_file(path: &Path) -> io::Result<Session> {
    let bytes = fs::read(path)?;
    let mut events = Vec::new();
    let mut offsets = vec![0u64];
    let mut pos = 0usize;
    let mut damaged = false;
    while pos < bytes.len() {
        let end = bytes[pos..].iter().position(|&b| b == b'\n').map(|i| pos + i);
        let line = &bytes[pos..end.unwrap_or(bytes.len())];
        match serde_json::from_slice::<Event>(line) {
            Ok(ev) => events.push(ev),
            Err(_) => {
                damaged = true;
                break;
            }
        }
        match end {
            Some(e) => pos = e + 1,
            None => {
                // Complete event whose newline never reached the disk.
                OpenOptions::new().append(true).open(path)?.write_all(b"\n")?;
                pos = bytes.len() + 1;
            }
        }
        offsets.push(pos as u64);
    }
    let (mut session, used) = Session::replay(&events).map_err(io::Error::other)?;
    if damaged || used < events.len() {
        log::warn!("{}: dropped log lines after event {used}", path.display());
        session.mark_recovered_with_loss();
        OpenOptions::new().write(true).open(path)?.set_len(offsets[used])?;
    }
    Ok(session)
}
