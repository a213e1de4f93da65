//! Loader for the LADEC delimited-text distribution.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

use super::CompoundRecord;

/// Names of the compound/constituent columns and of the rating columns to
/// pull along. Defaults follow the dataset's published column names; the
/// indirection absorbs version drift.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub compound: String,
    pub c1: String,
    pub c2: String,
    pub ratings: Vec<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            compound: "stim".into(),
            c1: "c1".into(),
            c2: "c2".into(),
            ratings: DEFAULT_RATING_COLUMNS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// The semantic-metric columns consumed by the correlation analysis.
pub const DEFAULT_RATING_COLUMNS: &[&str] = &[
    "ratingcmp",
    "ratingC1",
    "ratingC2",
    "Juhasz_tran",
    "st_c1_mean",
    "st_c2_mean",
    "LSAc1stim",
    "LSAc2stim",
    "LSAc1c2",
    "concreteness_stim",
    "concreteness_c1",
    "concreteness_c2",
    "valence_stim",
    "valence_c1",
    "valence_c2",
    "sentimentprobpos_stim",
    "sentimentprobpos_c1",
    "sentimentprobpos_c2",
    "sentimentprobneg_stim",
    "sentimentprobneg_c1",
    "sentimentprobneg_c2",
    "sentimentratioposneg_stim",
    "sentimentratioposneg_c1",
    "sentimentratioposneg_c2",
    "Zipfvalue",
    "stim_SLlg10wf",
    "c1_SLlg10wf",
    "c2_SLlg10wf",
];

#[derive(Debug)]
pub struct LoadedLadec {
    pub records: Vec<CompoundRecord>,
    pub skipped: usize,
}

/// Load a LADEC file (comma- or tab-delimited, auto-detected, header row
/// required). Malformed rows are counted and skipped; rating values that do
/// not parse as numbers are simply left unset.
pub fn load_ladec(path: &Path, columns: &ColumnMap) -> Result<LoadedLadec> {
    let content = std::fs::read_to_string(path)?;
    let header_line = content
        .lines()
        .next()
        .ok_or_else(|| Error::Schema(format!("{}: empty file", path.display())))?;
    let delimiter = if header_line.contains('\t') { b'\t' } else { b',' };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(content.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: unreadable header: {e}", path.display())))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let compound_idx = col(&columns.compound).ok_or_else(|| {
        Error::Schema(format!(
            "{}: missing mandatory column '{}'",
            path.display(),
            columns.compound
        ))
    })?;
    let c1_idx = col(&columns.c1).ok_or_else(|| {
        Error::Schema(format!(
            "{}: missing mandatory column '{}'",
            path.display(),
            columns.c1
        ))
    })?;
    let c2_idx = col(&columns.c2).ok_or_else(|| {
        Error::Schema(format!(
            "{}: missing mandatory column '{}'",
            path.display(),
            columns.c2
        ))
    })?;
    let rating_idx: Vec<(String, usize)> = columns
        .ratings
        .iter()
        .filter_map(|name| col(name).map(|i| (name.clone(), i)))
        .collect();

    let mut records = Vec::new();
    let mut skipped = 0usize;
    for row in reader.records() {
        let Ok(row) = row else {
            skipped += 1;
            continue;
        };
        let field = |i: usize| row.get(i).map(str::trim).unwrap_or("");
        let (compound, c1, c2) = (field(compound_idx), field(c1_idx), field(c2_idx));
        let Ok(mut record) = CompoundRecord::new(compound, c1, c2) else {
            skipped += 1;
            continue;
        };
        let mut ratings = BTreeMap::new();
        for (name, idx) in &rating_idx {
            if let Ok(value) = field(*idx).parse::<f64>() {
                if value.is_finite() {
                    ratings.insert(name.clone(), value);
                }
            }
        }
        record = record.with_ratings(ratings);
        records.push(record);
    }

    if skipped > 0 {
        log::warn!(
            "{}: skipped {skipped} malformed rows, kept {}",
            path.display(),
            records.len()
        );
    }
    Ok(LoadedLadec { records, skipped })
}
