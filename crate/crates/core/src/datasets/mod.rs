//! Compound datasets: the LADEC loader, generated novel compounds,
//! the adjective-noun grid and its phrase variants.

mod ladec;
mod novel;
mod sanc;

pub use ladec::{load_ladec, ColumnMap, LoadedLadec};
pub use novel::{generate_ladec_nc, NovelCompounds};
pub use sanc::{
    generate_phrase_variants, generate_sanc, AdjNounRecord, AdjectiveCategory, PhraseVariantSet,
    ADJECTIVES, NOUNS,
};

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};

/// A two-constituent compound plus any semantic ratings that came with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundRecord {
    pub compound: String,
    pub c1: String,
    pub c2: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ratings: BTreeMap<String, f64>,
}

impl CompoundRecord {
    pub fn new(
        compound: impl Into<String>,
        c1: impl Into<String>,
        c2: impl Into<String>,
    ) -> Result<Self> {
        let compound = compound.into();
        let c1 = c1.into();
        let c2 = c2.into();
        if compound.is_empty() || c1.is_empty() || c2.is_empty() {
            return Err(Error::Parameter(
                "compound and constituents must be non-empty".into(),
            ));
        }
        if compound == c1 || compound == c2 {
            return Err(Error::Parameter(format!(
                "compound '{compound}' must differ from both constituents"
            )));
        }
        Ok(Self {
            compound,
            c1,
            c2,
            ratings: BTreeMap::new(),
        })
    }

    pub fn with_ratings(mut self, ratings: BTreeMap<String, f64>) -> Self {
        self.ratings = ratings;
        self
    }

    pub fn rating(&self, name: &str) -> Option<f64> {
        self.ratings.get(name).copied()
    }
}

/// Write items as one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item)
            .map_err(|e| Error::Internal(format!("jsonl serialization failed: {e}")))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read one JSON object per line, reporting the offending line on failure.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut items = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: T = serde_json::from_str(&line).map_err(|e| {
            Error::Schema(format!(
                "{}:{}: invalid JSON line: {e}",
                path.display(),
                lineno + 1
            ))
        })?;
        items.push(item);
    }
    Ok(items)
}
