//! Post-evaluation analyses: which constituent dominates a composition,
//! and how per-compound scores correlate with the semantic ratings.

mod projection;

pub use projection::{
    project_2d, LabelledVector, PointKind, ProjectionMethod, ProjectionOutput, ProjectionPoint,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datasets::CompoundRecord;
use crate::error::{Error, Result};
use crate::metrics::{cosine_with_flag, EmbeddedRecord};

/// Tie tolerance for dominance decisions.
const DOMINANCE_TAU: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominant {
    First,
    Second,
    Tie,
}

/// Cosine of the compound embedding against each constituent embedding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominanceRecord {
    pub composition: String,
    pub sim_to_first: f64,
    pub sim_to_second: f64,
    pub dominant: Dominant,
}

/// Aggregate for one constituent word: how often it dominates across its
/// compositions, and by how much on average. Both views are reported since
/// either can drive the ranking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstituentStats {
    pub constituent: String,
    pub n: usize,
    /// Fraction of this constituent's compositions it dominates.
    pub win_rate: f64,
    /// Mean of (similarity to it) - (similarity to the other constituent).
    pub mean_margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominanceAnalysis {
    pub records: Vec<DominanceRecord>,
    pub n_skipped: usize,
    pub per_first: Vec<ConstituentStats>,
    pub per_second: Vec<ConstituentStats>,
}

/// Compare each compound embedding's similarity to its two constituents.
/// Records missing an embedding are skipped and counted.
pub fn constituent_dominance(records: &[EmbeddedRecord]) -> Result<DominanceAnalysis> {
    let mut out = Vec::new();
    let mut n_skipped = 0usize;
    let mut first_agg: BTreeMap<String, (usize, usize, f64)> = BTreeMap::new();
    let mut second_agg: BTreeMap<String, (usize, usize, f64)> = BTreeMap::new();

    for r in records {
        let (Some(u), Some(v), Some(w)) = (&r.u, &r.v, &r.w) else {
            n_skipped += 1;
            continue;
        };
        let (sim_to_first, _) = cosine_with_flag(w, u)?;
        let (sim_to_second, _) = cosine_with_flag(w, v)?;
        let diff = sim_to_first - sim_to_second;
        let dominant = if diff > DOMINANCE_TAU {
            Dominant::First
        } else if diff < -DOMINANCE_TAU {
            Dominant::Second
        } else {
            Dominant::Tie
        };
        let f = first_agg.entry(r.c1.clone()).or_insert((0, 0, 0.0));
        f.0 += 1;
        f.1 += usize::from(dominant == Dominant::First);
        f.2 += diff;
        let s = second_agg.entry(r.c2.clone()).or_insert((0, 0, 0.0));
        s.0 += 1;
        s.1 += usize::from(dominant == Dominant::Second);
        s.2 -= diff;
        out.push(DominanceRecord {
            composition: r.compound.clone(),
            sim_to_first,
            sim_to_second,
            dominant,
        });
    }
    if out.is_empty() {
        return Err(Error::Usage(
            "no record had all three embeddings present".into(),
        ));
    }

    let finalize = |agg: BTreeMap<String, (usize, usize, f64)>| -> Vec<ConstituentStats> {
        let mut stats: Vec<ConstituentStats> = agg
            .into_iter()
            .map(|(constituent, (n, wins, margin))| ConstituentStats {
                constituent,
                n,
                win_rate: wins as f64 / n as f64,
                mean_margin: margin / n as f64,
            })
            .collect();
        stats.sort_by(|a, b| {
            b.win_rate
                .total_cmp(&a.win_rate)
                .then(b.mean_margin.total_cmp(&a.mean_margin))
                .then(a.constituent.cmp(&b.constituent))
        });
        stats
    };

    Ok(DominanceAnalysis {
        records: out,
        n_skipped,
        per_first: finalize(first_agg),
        per_second: finalize(second_agg),
    })
}

/// One correlation table row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub metric_name: String,
    /// Pearson correlation coefficient.
    pub r: f64,
    /// Spearman rank correlation, reported alongside as a robustness check.
    pub spearman: f64,
    /// Records contributing both a score and this metric.
    pub n: usize,
}

/// Pearson (and Spearman) correlation of per-compound scores against every
/// rating column present in the records, sorted descending by `r`. The
/// score's self-correlation leads the table as the `compositionality` row.
/// Metrics with fewer than 3 complete observations are omitted.
pub fn correlate_with_semantic_metrics(
    scores: &BTreeMap<String, f64>,
    records: &[CompoundRecord],
) -> Result<Vec<CorrelationRow>> {
    if scores.is_empty() {
        return Err(Error::Usage("no per-compound scores supplied".into()));
    }

    let mut metric_names: Vec<String> = records
        .iter()
        .flat_map(|r| r.ratings.keys().cloned())
        .collect();
    metric_names.sort();
    metric_names.dedup();

    let mut rows = Vec::new();
    let self_values: Vec<f64> = records
        .iter()
        .filter_map(|r| scores.get(&r.compound).copied())
        .collect();
    if self_values.len() >= 3 {
        rows.push(CorrelationRow {
            metric_name: "compositionality".into(),
            r: pearson(&self_values, &self_values),
            spearman: spearman(&self_values, &self_values),
            n: self_values.len(),
        });
    }

    for name in metric_names {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for r in records {
            if let (Some(score), Some(rating)) = (scores.get(&r.compound), r.rating(&name)) {
                xs.push(*score);
                ys.push(rating);
            }
        }
        if xs.len() < 3 {
            log::warn!("metric '{name}' has only {} complete observations; omitted", xs.len());
            continue;
        }
        rows.push(CorrelationRow {
            metric_name: name,
            r: pearson(&xs, &ys),
            spearman: spearman(&xs, &ys),
            n: xs.len(),
        });
    }

    rows.sort_by(|a, b| b.r.total_cmp(&a.r).then(a.metric_name.cmp(&b.metric_name)));
    Ok(rows)
}

/// `metric,r,spearman,n` rows, in table order, full precision.
pub fn correlation_csv(rows: &[CorrelationRow]) -> String {
    let mut out = String::from("metric,r,spearman,n\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.metric_name, row.r, row.spearman, row.n
        ));
    }
    out
}

/// Plain Pearson correlation; 0 when either side has no variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}
