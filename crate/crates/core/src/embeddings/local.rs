//! Exact-match lookups against a local vector file — how externally
//! extracted embeddings (e.g. encoder CLS vectors) enter the pipeline.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::vector::Vector;

use super::{normalize_text, EmbeddingSource};

/// A line of the local file; only `text` and `vector` are required, so
/// cache files are accepted too.
#[derive(Debug, Deserialize)]
struct LocalRow {
    text: String,
    vector: Vec<f64>,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    model_id: Option<String>,
}

#[derive(Debug, Clone)]
pub struct LocalFileSource {
    name: String,
    model_id: String,
    dim: usize,
    table: HashMap<String, Vector>,
}

impl LocalFileSource {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Load a JSON-lines vector file. The dimension is inferred from the first
/// row and enforced on the rest; a duplicate text keeps the last row.
pub fn load_local_embeddings(path: &Path) -> Result<LocalFileSource> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut table: HashMap<String, Vector> = HashMap::new();
    let mut dim: Option<usize> = None;
    let mut name: Option<String> = None;
    let mut model_id: Option<String> = None;
    let mut duplicates = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: LocalRow = serde_json::from_str(&line).map_err(|e| {
            Error::Schema(format!(
                "{}:{}: invalid vector line: {e}",
                path.display(),
                lineno + 1
            ))
        })?;
        let expected = *dim.get_or_insert(row.vector.len());
        if row.vector.len() != expected {
            return Err(Error::Integrity(format!(
                "{}:{}: vector for '{}' has dimension {}, expected {expected}",
                path.display(),
                lineno + 1,
                row.text,
                row.vector.len()
            )));
        }
        let vector = Vector::new(row.vector).map_err(|e| {
            Error::Integrity(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        if name.is_none() {
            name = row.source;
            model_id = row.model_id;
        }
        if table.insert(normalize_text(&row.text), vector).is_some() {
            duplicates += 1;
        }
    }

    let dim = dim.ok_or_else(|| {
        Error::Schema(format!("{}: no vector rows found", path.display()))
    })?;
    if duplicates > 0 {
        log::warn!(
            "{}: {duplicates} duplicate texts, keeping the last occurrence of each",
            path.display()
        );
    }

    let fallback_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "local".into());
    Ok(LocalFileSource {
        name: name.unwrap_or(fallback_name),
        model_id: model_id.unwrap_or_else(|| "local".into()),
        dim,
        table,
    })
}

impl EmbeddingSource for LocalFileSource {
    fn name(&self) -> &str {
        &self.name
    }
    fn model_id(&self) -> &str {
        &self.model_id
    }
    fn expected_dim(&self) -> usize {
        self.dim
    }
    fn fetch(&self, texts: &[String]) -> Result<Vec<Vector>> {
        texts
            .iter()
            .map(|t| {
                self.table.get(t).cloned().ok_or_else(|| {
                    Error::NotFound(format!(
                        "text '{t}' not present in local source '{}'",
                        self.name
                    ))
                })
            })
            .collect()
    }
    fn fetch_optional(&self, texts: &[String]) -> Result<Vec<Option<Vector>>> {
        Ok(texts.iter().map(|t| self.table.get(t).cloned()).collect())
    }
}
