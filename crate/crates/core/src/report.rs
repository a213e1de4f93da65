//! Evaluation reports: a stable, hashable JSON body plus provenance, and
//! the side-by-side rendering used by the `report` subcommand.
//!
//! The body carries every number; provenance carries timestamps and the
//! body hash, so two runs with identical inputs produce byte-identical
//! bodies even though their provenance differs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::hex_string;
use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Flag set on entries whose mean cosine fell below the baseline mean.
pub const FLAG_NON_COMPOSITIONAL: &str = "non_compositional";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub body: ReportBody,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBody {
    pub seed: u64,
    pub config_hash: String,
    pub dataset: DatasetSummary,
    pub split: SplitSummary,
    pub entries: Vec<ReportEntry>,
    /// Phrase-variant distributions; present only for that dataset.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<VariantEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub kind: String,
    pub fingerprint: String,
    pub n_records: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSummary {
    pub train_fraction: f64,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
}

/// One (source x composer) result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEntry {
    #[serde(rename = "embedding_source")]
    pub source: String,
    pub composer: String,
    pub mean_cosine: f64,
    pub js_divergence: f64,
    pub baseline_mean: f64,
    pub n_records: usize,
    pub n_skipped: usize,
    pub n_degenerate: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_params: Option<serde_json::Value>,
}

impl ReportEntry {
    pub fn is_non_compositional(&self) -> bool {
        self.flags.iter().any(|f| f == FLAG_NON_COMPOSITIONAL)
    }
}

/// Similarity of phrase rephrasings to the base composition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantEntry {
    pub source: String,
    pub variant: String,
    pub mean_cosine: f64,
    pub js_divergence: f64,
    pub n_records: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub generated_at: String,
    pub body_sha256: String,
}

impl ReportBody {
    /// Canonical serialization, the exact bytes hashed into provenance.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("report body serializes")
    }

    pub fn sha256(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_json().as_bytes());
        hex_string(&hasher.finalize())
    }
}

impl EvaluationReport {
    pub fn new(body: ReportBody) -> Self {
        let body_sha256 = body.sha256();
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            body,
            provenance: Provenance {
                generated_at: chrono::Utc::now().to_rfc3339(),
                body_sha256,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let report: EvaluationReport = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "{}: report schema version {} not supported (this build reads {})",
                path.display(),
                report.schema_version,
                REPORT_SCHEMA_VERSION
            )));
        }
        Ok(report)
    }
}

/// Render JS with the non-compositional convention: flagged entries show
/// "n/a" in tables while the JSON keeps the computed number.
fn js_cell(entry: &ReportEntry) -> String {
    if entry.is_non_compositional() {
        "n/a".into()
    } else {
        format!("{:.3}", entry.js_divergence)
    }
}

/// Side-by-side text table over one or more labelled reports. Rows are
/// (source, composer) pairs; each report contributes a cosine and a JS
/// column.
pub fn render_text(reports: &[(String, &EvaluationReport)]) -> String {
    let mut keys: Vec<(String, String)> = Vec::new();
    for (_, r) in reports {
        for e in &r.body.entries {
            let key = (e.source.clone(), e.composer.clone());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
    }

    let mut header = vec!["source".to_string(), "composer".to_string()];
    for (label, _) in reports {
        header.push(format!("{label} cosine"));
        header.push(format!("{label} js"));
    }
    let mut rows: Vec<Vec<String>> = vec![header];
    for (source, composer) in &keys {
        let mut row = vec![source.clone(), composer.clone()];
        for (_, report) in reports {
            match report
                .body
                .entries
                .iter()
                .find(|e| &e.source == source && &e.composer == composer)
            {
                Some(e) => {
                    row.push(format!("{:.3}", e.mean_cosine));
                    row.push(js_cell(e));
                }
                None => {
                    row.push("-".into());
                    row.push("-".into());
                }
            }
        }
        rows.push(row);
    }

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }

    // variant distributions, when present
    for (label, report) in reports {
        if report.body.variants.is_empty() {
            continue;
        }
        out.push('\n');
        out.push_str(&format!("phrase variants ({label}):\n"));
        for v in &report.body.variants {
            out.push_str(&format!(
                "  {:<12} {:<16} cosine {:.3}  js {:.3}\n",
                v.source, v.variant, v.mean_cosine, v.js_divergence
            ));
        }
    }
    out
}

/// CSV with the same layout as the text table, full precision.
pub fn render_csv(reports: &[(String, &EvaluationReport)]) -> String {
    let mut keys: Vec<(String, String)> = Vec::new();
    for (_, r) in reports {
        for e in &r.body.entries {
            let key = (e.source.clone(), e.composer.clone());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
    }
    let mut out = String::from("source,composer");
    for (label, _) in reports {
        out.push_str(&format!(",{label}_cosine,{label}_js,{label}_flags"));
    }
    out.push('\n');
    for (source, composer) in &keys {
        out.push_str(&format!("{source},{composer}"));
        for (_, report) in reports {
            match report
                .body
                .entries
                .iter()
                .find(|e| &e.source == source && &e.composer == composer)
            {
                Some(e) => out.push_str(&format!(
                    ",{},{},{}",
                    e.mean_cosine,
                    e.js_divergence,
                    e.flags.join(";")
                )),
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(source: &str, composer: &str, cosine: f64, js: f64, flags: Vec<String>) -> ReportEntry {
        ReportEntry {
            source: source.into(),
            composer: composer.into(),
            mean_cosine: cosine,
            js_divergence: js,
            baseline_mean: 0.0,
            n_records: 10,
            n_skipped: 0,
            n_degenerate: 0,
            flags,
            fitted_params: None,
        }
    }

    fn report(entries: Vec<ReportEntry>) -> EvaluationReport {
        EvaluationReport::new(ReportBody {
            seed: 42,
            config_hash: "h".into(),
            dataset: DatasetSummary {
                kind: "sanc".into(),
                fingerprint: "f".into(),
                n_records: 10,
            },
            split: SplitSummary {
                train_fraction: 0.8,
                seed: 42,
                n_train: 8,
                n_test: 2,
            },
            entries,
            variants: vec![],
        })
    }

    #[test]
    fn body_hash_ignores_provenance() {
        let a = report(vec![entry("s", "simple_add", 0.9, 0.8, vec![])]);
        std::thread::sleep(std::time::Duration::from_millis(5));
        let b = report(vec![entry("s", "simple_add", 0.9, 0.8, vec![])]);
        assert_eq!(a.body.canonical_json(), b.body.canonical_json());
        assert_eq!(a.provenance.body_sha256, b.provenance.body_sha256);
    }

    #[test]
    fn non_compositional_renders_as_na() {
        let r = report(vec![
            entry("s", "simple_add", 0.9, 0.8, vec![]),
            entry(
                "s",
                "multiplicative",
                -0.02,
                0.75,
                vec![FLAG_NON_COMPOSITIONAL.into()],
            ),
        ]);
        let text = render_text(&[("run".into(), &r)]);
        assert!(text.contains("0.800"));
        assert!(text.contains("n/a"));
        // the JSON body still carries the computed number
        assert!(r.body.entries[1].js_divergence > 0.0);
    }

    #[test]
    fn merge_renders_side_by_side() {
        let a = report(vec![entry("s", "simple_add", 0.85, 0.82, vec![])]);
        let b = report(vec![entry("s", "simple_add", 0.86, 0.83, vec![])]);
        let text = render_text(&[("ladec".into(), &a), ("ladec_nc".into(), &b)]);
        let header = text.lines().next().unwrap();
        assert!(header.contains("ladec cosine"));
        assert!(header.contains("ladec_nc cosine"));
        let row = text.lines().nth(2).unwrap();
        assert!(row.contains("0.850") && row.contains("0.860"));

        let csv = render_csv(&[("a".into(), &a), ("b".into(), &b)]);
        assert!(csv.starts_with("source,composer,a_cosine,a_js,a_flags,b_cosine,b_js,b_flags"));
    }

    #[test]
    fn schema_version_mismatch_names_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let mut value: serde_json::Value =
            serde_json::from_str(&report(vec![]).to_json()).unwrap();
        value["schema_version"] = serde_json::json!(99);
        std::fs::write(&path, value.to_string()).unwrap();
        match EvaluationReport::load(&path) {
            Err(Error::Schema(msg)) => {
                assert!(msg.contains("99") && msg.contains('1'), "versions missing: {msg}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }
}
