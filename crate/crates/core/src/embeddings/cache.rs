//! Append-only embedding cache: JSON lines on disk, an in-memory index,
//! compaction on demand. The file format doubles as the local-embedding
//! interchange format.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::vector::Vector;

use super::EmbeddingRecord;

type Key = (String, String, String); // (source, model_id, normalized text)

pub struct EmbeddingCache {
    path: PathBuf,
    index: HashMap<Key, EmbeddingRecord>,
    writer: BufWriter<File>,
}

impl std::fmt::Debug for EmbeddingCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EmbeddingCache")
            .field("path", &self.path)
            .field("entries", &self.index.len())
            .finish()
    }
}

impl EmbeddingCache {
    /// Open (or create) the cache file and replay it into the index.
    /// Later lines win, which makes appends a valid update mechanism.
    pub fn open(path: &Path) -> Result<Self> {
        let mut index = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: EmbeddingRecord = serde_json::from_str(&line).map_err(|e| {
                    Error::Integrity(format!(
                        "{}:{}: corrupt cache line: {e}",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                index.insert(Self::key(&record), record);
            }
        } else if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let writer = BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?);
        Ok(Self {
            path: path.to_path_buf(),
            index,
            writer,
        })
    }

    fn key(record: &EmbeddingRecord) -> Key {
        (
            record.source.clone(),
            record.model_id.clone(),
            record.text.clone(),
        )
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, source: &str, model_id: &str, text: &str) -> Option<Vector> {
        self.index
            .get(&(source.to_string(), model_id.to_string(), text.to_string()))
            .map(|r| r.vector.clone())
    }

    /// Append a record to the log and the index. Flushed immediately so a
    /// later crash cannot lose acknowledged entries.
    pub fn put(&mut self, record: &EmbeddingRecord) -> Result<()> {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::Internal(format!("cache serialization failed: {e}")))?;
        writeln!(self.writer, "{line}")?;
        self.writer.flush()?;
        self.index.insert(Self::key(record), record.clone());
        Ok(())
    }

    /// Rewrite the log with exactly one line per key, sorted by key, so two
    /// compacted caches with equal content are byte-identical.
    pub fn compact(&mut self) -> Result<()> {
        let mut records: Vec<&EmbeddingRecord> = self.index.values().collect();
        records.sort_by(|a, b| Self::key(a).cmp(&Self::key(b)));
        let tmp = self.path.with_extension("tmp");
        {
            let mut out = BufWriter::new(File::create(&tmp)?);
            for r in &records {
                let line = serde_json::to_string(r)
                    .map_err(|e| Error::Internal(format!("cache serialization failed: {e}")))?;
                writeln!(out, "{line}")?;
            }
            out.flush()?;
        }
        std::fs::rename(&tmp, &self.path)?;
        self.writer = BufWriter::new(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)?,
        );
        Ok(())
    }
}
