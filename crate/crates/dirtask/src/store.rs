//! Content-addressed example store: one `<id>.json` per example.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use dirtask_core::forge::ThoughtActionExample;

use crate::error::{Error, Result};
use crate::io::{read_json, write_json};

pub struct ExampleStore {
    dir: PathBuf,
    writes: Mutex<()>,
}

impl ExampleStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ExampleStore {
            dir: dir.into(),
            writes: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Stores `ex` unless an example with the same id is already there.
    /// Returns the path and whether a file was written.
    pub fn put(&self, ex: &ThoughtActionExample) -> Result<(PathBuf, bool)> {
        if ex.id != ex.content_id() {
            return Err(Error::format(self.path_of(&ex.id), "example id does not match its content"));
        }
        let _guard = self.writes.lock().unwrap_or_else(|e| e.into_inner());
        let p = self.path_of(&ex.id);
        if p.exists() {
            return Ok((p, false));
        }
        write_json(&p, ex)?;
        Ok((p, true))
    }

    /// All stored examples, ordered by id. A missing directory is an empty
    /// store.
    pub fn load_all(&self) -> Result<Vec<ThoughtActionExample>> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(&self.dir, e)),
        };
        let mut paths = Vec::new();
        for e in entries {
            let p = e.map_err(|e| Error::io(&self.dir, e))?.path();
            if p.extension().is_some_and(|x| x == "json") {
                paths.push(p);
            }
        }
        paths.sort();
        let mut out = Vec::with_capacity(paths.len());
        for p in paths {
            let ex: ThoughtActionExample = read_json(&p)?;
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            if ex.id != ex.content_id() || stem != ex.id {
                return Err(Error::format(&p, "content hash does not match"));
            }
            out.push(ex);
        }
        Ok(out)
    }
}
