//! End-to-end runs: dataset -> embeddings -> fit (train split) ->
//! evaluate (held-out) -> report files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::compose::{
    fit_gradient_descent, fit_grid_search, mlp_fit, ridge_fit, CompositionModel, DilationParams,
    FitConfig, FitKind, FittedParams, Grid, LossKind, ModelDocument, TrainingPair,
    WeightedAddParams,
};
use crate::config::{
    hex_string, ComposerConfig, DatasetConfig, FitMethod, RunConfig, SourceConfig,
};
use crate::datasets::{
    generate_ladec_nc, generate_phrase_variants, generate_sanc, load_ladec, read_jsonl,
    write_jsonl, AdjectiveCategory, CompoundRecord, PhraseVariantSet,
};
use crate::embeddings::{
    load_local_embeddings, normalize_text, EmbeddingCache, EmbeddingRecord, EmbeddingSource,
    HttpProviderSource, SyntheticMode, SyntheticSource,
};
use crate::error::{Error, Result};
use crate::metrics::{
    baseline_distribution, cosine_with_flag, evaluate_model, kde_estimate, EmbeddedRecord,
    SimilarityDistribution,
};
use crate::report::{
    DatasetSummary, EvaluationReport, ReportBody, ReportEntry, SplitSummary, VariantEntry,
    FLAG_NON_COMPOSITIONAL,
};
use crate::vector::Vector;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// A dataset resolved into records, plus phrase-variant sets when relevant.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub kind: String,
    pub records: Vec<CompoundRecord>,
    pub fingerprint: String,
    pub variants: Option<Vec<PhraseVariantSet>>,
}

pub fn prepare_dataset(config: &RunConfig) -> Result<PreparedDataset> {
    let (records, variants): (Vec<CompoundRecord>, Option<Vec<PhraseVariantSet>>) =
        match &config.dataset {
            DatasetConfig::Ladec { path, columns } => {
                let map = columns
                    .as_ref()
                    .map(|c| c.to_column_map())
                    .unwrap_or_default();
                (load_ladec(path, &map)?.records, None)
            }
            DatasetConfig::LadecNc {
                ladec_path,
                n,
                dictionary_path,
                columns,
            } => {
                let map = columns
                    .as_ref()
                    .map(|c| c.to_column_map())
                    .unwrap_or_default();
                let base = load_ladec(ladec_path, &map)?.records;
                let mut exclusion: BTreeSet<String> =
                    base.iter().map(|r| r.compound.clone()).collect();
                if let Some(dict) = dictionary_path {
                    for line in std::fs::read_to_string(dict)?.lines() {
                        let word = line.trim();
                        if !word.is_empty() {
                            exclusion.insert(word.to_string());
                        }
                    }
                }
                let novel = generate_ladec_nc(&base, *n, config.seed, &exclusion)?;
                (novel.records, None)
            }
            DatasetConfig::Sanc => {
                let records = generate_sanc()
                    .into_iter()
                    .map(|r| CompoundRecord::new(r.composition, r.adjective, r.noun))
                    .collect::<Result<Vec<_>>>()?;
                (records, None)
            }
            DatasetConfig::PhraseVariants => {
                let mut records = Vec::new();
                let mut sets = Vec::new();
                for r in generate_sanc() {
                    if r.category != AdjectiveCategory::Color {
                        continue;
                    }
                    records.push(CompoundRecord::new(
                        r.composition.clone(),
                        r.adjective.clone(),
                        r.noun.clone(),
                    )?);
                    sets.push(generate_phrase_variants(&r.adjective, &r.noun)?);
                }
                (records, Some(sets))
            }
            DatasetConfig::Jsonl { path } => (read_jsonl(path)?, None),
        };

    if records.is_empty() {
        return Err(Error::Usage("dataset resolved to zero records".into()));
    }
    let fingerprint = dataset_fingerprint(config.dataset.kind_name(), &records, config.seed);
    Ok(PreparedDataset {
        kind: config.dataset.kind_name().to_string(),
        records,
        fingerprint,
        variants,
    })
}

fn dataset_fingerprint(kind: &str, records: &[CompoundRecord], seed: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(kind.as_bytes());
    hasher.update(seed.to_le_bytes());
    for r in records {
        hasher.update(r.compound.as_bytes());
        hasher.update([0]);
        hasher.update(r.c1.as_bytes());
        hasher.update([0]);
        hasher.update(r.c2.as_bytes());
        hasher.update([0xff]);
    }
    hex_string(&hasher.finalize())
}

/// Instantiate a configured source. Compositional synthetic sources get
/// every dataset compound registered so they know the constituents.
pub fn build_source(
    spec: &SourceConfig,
    run_seed: u64,
    records: &[CompoundRecord],
) -> Result<Box<dyn EmbeddingSource>> {
    match spec {
        SourceConfig::Synthetic {
            name,
            dim,
            seed,
            compositional,
        } => {
            let mode = match compositional {
                None => SyntheticMode::Random,
                Some(c) => SyntheticMode::Compositional {
                    w1: c.w1,
                    w2: c.w2,
                    sigma: c.sigma,
                },
            };
            let mut source = SyntheticSource::new(name, *dim, seed.unwrap_or(run_seed), mode)?;
            if matches!(mode, SyntheticMode::Compositional { .. }) {
                for r in records {
                    source.register_compound(&r.compound, &r.c1, &r.c2);
                }
            }
            Ok(Box::new(source))
        }
        SourceConfig::Local { path, name } => {
            let mut source = load_local_embeddings(path)?;
            if let Some(name) = name {
                source = source.with_name(name);
            }
            Ok(Box::new(source))
        }
        SourceConfig::Http { provider } => {
            Ok(Box::new(HttpProviderSource::new(provider.clone())?))
        }
    }
}

/// Resolve unique normalized texts to vectors, consulting the cache first
/// and tolerating per-text misses from partial (local) sources.
pub fn resolve_embeddings(
    source: &dyn EmbeddingSource,
    texts: &[String],
    mut cache: Option<&mut EmbeddingCache>,
    offline: bool,
) -> Result<BTreeMap<String, Option<Vector>>> {
    let mut resolved: BTreeMap<String, Option<Vector>> = BTreeMap::new();
    let mut misses: Vec<String> = Vec::new();
    for text in texts {
        let ntext = normalize_text(text);
        if resolved.contains_key(&ntext) || misses.contains(&ntext) {
            continue;
        }
        match cache
            .as_ref()
            .and_then(|c| c.get(source.name(), source.model_id(), &ntext))
        {
            Some(v) => {
                resolved.insert(ntext, Some(v));
            }
            None => misses.push(ntext),
        }
    }

    if !misses.is_empty() {
        if offline && source.requires_network() {
            return Err(Error::Source(format!(
                "offline mode: {} texts missing from cache for source '{}'",
                misses.len(),
                source.name()
            )));
        }
        for batch in misses.chunks(source.batch_limit().max(1)) {
            let vectors = source.fetch_optional(batch)?;
            if vectors.len() != batch.len() {
                return Err(Error::Source(format!(
                    "source '{}' returned {} vectors for a batch of {}",
                    source.name(),
                    vectors.len(),
                    batch.len()
                )));
            }
            let fetched_at = chrono::Utc::now().to_rfc3339();
            for (ntext, vector) in batch.iter().zip(vectors) {
                if let Some(v) = &vector {
                    if v.dim() != source.expected_dim() {
                        return Err(Error::Integrity(format!(
                            "source '{}' returned dimension {} for '{ntext}', expected {}",
                            source.name(),
                            v.dim(),
                            source.expected_dim()
                        )));
                    }
                    if let Some(c) = cache.as_mut() {
                        c.put(&EmbeddingRecord {
                            source: source.name().to_string(),
                            model_id: source.model_id().to_string(),
                            text: ntext.clone(),
                            vector: v.clone(),
                            fetched_at: fetched_at.clone(),
                        })?;
                    }
                }
                resolved.insert(ntext.clone(), vector);
            }
        }
    }
    Ok(resolved)
}

fn lookup(map: &BTreeMap<String, Option<Vector>>, text: &str) -> Option<Vector> {
    map.get(&normalize_text(text)).cloned().flatten()
}

fn embed_records(
    records: &[CompoundRecord],
    map: &BTreeMap<String, Option<Vector>>,
) -> Vec<EmbeddedRecord> {
    records
        .iter()
        .map(|r| EmbeddedRecord {
            compound: r.compound.clone(),
            c1: r.c1.clone(),
            c2: r.c2.clone(),
            u: lookup(map, &r.c1),
            v: lookup(map, &r.c2),
            w: lookup(map, &r.compound),
        })
        .collect()
}

/// Deterministic train/test index split: seeded shuffle, first part trains.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, n.saturating_sub(1));
    let test = indices.split_off(n_train);
    (indices, test)
}

/// Fit (when needed) and return the composition model plus a JSON summary of
/// the fitted parameters for the report.
pub fn build_composer(
    spec: &ComposerConfig,
    train: &[TrainingPair],
    run_seed: u64,
) -> Result<(CompositionModel, Option<serde_json::Value>)> {
    let gd_config = |epochs: &Option<usize>, step: &Option<f64>| FitConfig {
        epochs: epochs.unwrap_or(100),
        step_size: step.unwrap_or(0.1),
        batch_size: 64,
        seed: run_seed,
        loss: LossKind::OneMinusCosine,
    };
    match spec {
        ComposerConfig::SimpleAdd => Ok((CompositionModel::SimpleAdd, None)),
        ComposerConfig::Multiplicative => Ok((CompositionModel::Multiplicative, None)),
        ComposerConfig::WeightedAdd {
            fit,
            alpha,
            beta,
            epochs,
            step_size,
        } => {
            let (params, info) = match fit {
                FitMethod::Fixed => {
                    let p = WeightedAddParams::new(
                        alpha.expect("validated"),
                        beta.expect("validated"),
                    )?;
                    (p, serde_json::json!({"method": "fixed"}))
                }
                FitMethod::GradientDescent => {
                    let out = fit_gradient_descent(
                        FitKind::WeightedAdd,
                        train,
                        &gd_config(epochs, step_size),
                    )?;
                    let FittedParams::WeightedAdd(p) = out.params else {
                        return Err(Error::Internal("wrong fitted kind".into()));
                    };
                    (
                        p,
                        serde_json::json!({
                            "method": "gradient_descent",
                            "final_loss": out.final_loss,
                        }),
                    )
                }
                FitMethod::GridSearch => {
                    let out = fit_grid_search(train, &Grid::default_weighted_add())?;
                    let FittedParams::WeightedAdd(p) = out.params else {
                        return Err(Error::Internal("wrong fitted kind".into()));
                    };
                    (
                        p,
                        serde_json::json!({
                            "method": "grid_search",
                            "mean_cosine": out.mean_cosine,
                        }),
                    )
                }
            };
            let mut info = info;
            info["alpha"] = serde_json::json!(params.alpha);
            info["beta"] = serde_json::json!(params.beta);
            Ok((CompositionModel::WeightedAdd { params }, Some(info)))
        }
        ComposerConfig::Dilation {
            fit,
            lambda,
            epochs,
            step_size,
            extended_grid,
        } => {
            let (params, info) = match fit {
                FitMethod::Fixed => {
                    let p = DilationParams::new(lambda.expect("validated"))?;
                    (p, serde_json::json!({"method": "fixed"}))
                }
                FitMethod::GradientDescent => {
                    let out = fit_gradient_descent(
                        FitKind::Dilation,
                        train,
                        &gd_config(epochs, step_size),
                    )?;
                    let FittedParams::Dilation(p) = out.params else {
                        return Err(Error::Internal("wrong fitted kind".into()));
                    };
                    (
                        p,
                        serde_json::json!({
                            "method": "gradient_descent",
                            "final_loss": out.final_loss,
                        }),
                    )
                }
                FitMethod::GridSearch => {
                    let grid = if *extended_grid {
                        Grid::extended_dilation()
                    } else {
                        Grid::default_dilation()
                    };
                    let out = fit_grid_search(train, &grid)?;
                    let FittedParams::Dilation(p) = out.params else {
                        return Err(Error::Internal("wrong fitted kind".into()));
                    };
                    (
                        p,
                        serde_json::json!({
                            "method": "grid_search",
                            "mean_cosine": out.mean_cosine,
                        }),
                    )
                }
            };
            let mut info = info;
            info["lambda"] = serde_json::json!(params.lambda);
            Ok((CompositionModel::Dilation { params }, Some(info)))
        }
        ComposerConfig::Ridge { regularization } => {
            let model = ridge_fit(train, *regularization)?;
            let info = serde_json::json!({
                "method": "closed_form",
                "regularization": regularization,
            });
            Ok((CompositionModel::Ridge { model }, Some(info)))
        }
        ComposerConfig::Mlp {
            epochs,
            step_size,
            batch_size,
        } => {
            let config = FitConfig {
                epochs: epochs.unwrap_or(100),
                step_size: step_size.unwrap_or(1e-3),
                batch_size: batch_size.unwrap_or(64),
                seed: run_seed,
                loss: LossKind::OneMinusCosine,
            };
            let (model, losses) = mlp_fit(train, &config)?;
            let info = serde_json::json!({
                "method": "adaptive_moment_gd",
                "epochs": config.epochs,
                "step_size": config.step_size,
                "batch_size": config.batch_size,
                "final_loss": losses.last(),
            });
            Ok((CompositionModel::Mlp { model }, Some(info)))
        }
    }
}

fn training_pairs(records: &[EmbeddedRecord]) -> Vec<TrainingPair> {
    records
        .iter()
        .filter_map(|r| match (&r.u, &r.v, &r.w) {
            (Some(u), Some(v), Some(w)) => Some(TrainingPair {
                u: u.clone(),
                v: v.clone(),
                w: w.clone(),
            }),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct KdePlotData {
    schema_version: u32,
    sources: Vec<SourceKde>,
}

#[derive(Debug, Serialize)]
struct SourceKde {
    source: String,
    bandwidth: f64,
    grid: Vec<f64>,
    curves: Vec<NamedDensity>,
}

#[derive(Debug, Serialize)]
struct NamedDensity {
    label: String,
    density: Vec<f64>,
}

#[derive(Debug)]
pub struct EvaluateOutcome {
    pub report: EvaluationReport,
    pub report_path: PathBuf,
    pub per_record_paths: Vec<PathBuf>,
    pub kde_path: PathBuf,
}

pub fn run_evaluate(config: &RunConfig, offline: bool) -> Result<EvaluateOutcome> {
    config.validate()?;
    let staging = Staging::new(&config.outputs.dir)?;
    match evaluate_into(config, offline, &staging) {
        Ok(outcome) => {
            staging.commit()?;
            Ok(outcome)
        }
        Err(e) => {
            let quarantined = staging.quarantine();
            if let Some(dir) = quarantined {
                log::warn!("partial outputs quarantined under {}", dir.display());
            }
            Err(e)
        }
    }
}

fn evaluate_into(
    config: &RunConfig,
    offline: bool,
    staging: &Staging,
) -> Result<EvaluateOutcome> {
    let dataset = prepare_dataset(config)?;
    let mut cache = match &config.cache_path {
        Some(path) => Some(EmbeddingCache::open(path)?),
        None => None,
    };

    let (train_idx, test_idx) =
        split_indices(dataset.records.len(), config.split.train_fraction, config.seed);

    let mut entries: Vec<ReportEntry> = Vec::new();
    let mut variant_entries: Vec<VariantEntry> = Vec::new();
    let mut kde_sources: Vec<SourceKde> = Vec::new();
    let mut per_record_paths = Vec::new();

    for source_spec in &config.sources {
        let source = build_source(source_spec, config.seed, &dataset.records)?;

        let mut texts: Vec<String> = Vec::new();
        for r in &dataset.records {
            texts.push(r.c1.clone());
            texts.push(r.c2.clone());
            texts.push(r.compound.clone());
        }
        if let Some(sets) = &dataset.variants {
            for set in sets {
                for (_, text) in set.labelled() {
                    texts.push(text.to_string());
                }
            }
        }
        let map = resolve_embeddings(source.as_ref(), &texts, cache.as_mut(), offline)?;
        let embedded = embed_records(&dataset.records, &map);

        let compound_embeddings: Vec<Vector> = embedded
            .iter()
            .filter_map(|r| r.w.clone())
            .collect();
        let baseline =
            baseline_distribution(&compound_embeddings, config.metrics.n_pairs, config.seed)?;
        let bandwidth = config
            .metrics
            .bandwidth
            .unwrap_or_else(|| crate::metrics::scott_bandwidth(&baseline));

        let train: Vec<EmbeddedRecord> =
            train_idx.iter().map(|&i| embedded[i].clone()).collect();
        let test: Vec<EmbeddedRecord> = test_idx.iter().map(|&i| embedded[i].clone()).collect();
        let train_pairs = training_pairs(&train);

        let baseline_kde = kde_estimate(&baseline, Some(bandwidth))?;
        let mut curves = vec![NamedDensity {
            label: "baseline".into(),
            density: baseline_kde.density.clone(),
        }];

        let mut per_composer_scores: Vec<(String, BTreeMap<String, f64>)> = Vec::new();
        for composer_spec in &config.composers {
            let (model, fitted_params) = build_composer(composer_spec, &train_pairs, config.seed)?;
            let eval = evaluate_model(&model, &test, &baseline, Some(bandwidth))?;
            let mut flags = Vec::new();
            if eval.non_compositional {
                flags.push(FLAG_NON_COMPOSITIONAL.to_string());
            }
            curves.push(NamedDensity {
                label: eval.composer.clone(),
                density: eval.kde.density.clone(),
            });
            per_composer_scores.push((
                eval.composer.clone(),
                eval.per_record
                    .iter()
                    .map(|r| (r.compound.clone(), r.cosine))
                    .collect(),
            ));
            entries.push(ReportEntry {
                source: source.name().to_string(),
                composer: eval.composer,
                mean_cosine: eval.mean_cosine,
                js_divergence: eval.js_divergence,
                baseline_mean: baseline.mean(),
                n_records: eval.n_records,
                n_skipped: eval.n_skipped,
                n_degenerate: eval.n_degenerate,
                flags,
                fitted_params,
            });
        }

        if let Some(sets) = &dataset.variants {
            let (variant_rows, variant_curves) = evaluate_variants(
                source.name(),
                sets,
                &embedded,
                &map,
                &baseline,
                bandwidth,
            )?;
            variant_entries.extend(variant_rows);
            curves.extend(variant_curves);
        }

        // per-record CSV over the held-out records with complete embeddings
        let csv_path = staging.path(&format!("per_record_{}.csv", source.name()));
        write_per_record_csv(&csv_path, &test, &per_composer_scores)?;
        per_record_paths.push(staging.final_path(&format!("per_record_{}.csv", source.name())));

        kde_sources.push(SourceKde {
            source: source.name().to_string(),
            bandwidth,
            grid: baseline_kde.grid.clone(),
            curves,
        });
    }

    let body = ReportBody {
        seed: config.seed,
        config_hash: config.content_hash(),
        dataset: DatasetSummary {
            kind: dataset.kind.clone(),
            fingerprint: dataset.fingerprint.clone(),
            n_records: dataset.records.len(),
        },
        split: SplitSummary {
            train_fraction: config.split.train_fraction,
            seed: config.seed,
            n_train: train_idx.len(),
            n_test: test_idx.len(),
        },
        entries,
        variants: variant_entries,
    };
    let report = EvaluationReport::new(body);

    std::fs::write(staging.path("report.json"), report.to_json())?;
    let kde_data = KdePlotData {
        schema_version: 1,
        sources: kde_sources,
    };
    std::fs::write(
        staging.path("kde.json"),
        serde_json::to_string(&kde_data)
            .map_err(|e| Error::Internal(format!("kde serialization: {e}")))?,
    )?;

    Ok(EvaluateOutcome {
        report,
        report_path: staging.final_path("report.json"),
        per_record_paths,
        kde_path: staging.final_path("kde.json"),
    })
}

/// Distributions of similarity between the base composition and each phrase
/// variant (plus the added-constituents comparison).
fn evaluate_variants(
    source: &str,
    sets: &[PhraseVariantSet],
    embedded: &[EmbeddedRecord],
    map: &BTreeMap<String, Option<Vector>>,
    baseline: &SimilarityDistribution,
    bandwidth: f64,
) -> Result<(Vec<VariantEntry>, Vec<NamedDensity>)> {
    let labels = [
        "constituent_add",
        "hyphenated",
        "predicate",
        "attributive",
        "adjective_only",
        "noun_only",
        "distractor",
    ];
    let mut samples: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let baseline_kde = kde_estimate(baseline, Some(bandwidth))?;

    for (record, set) in embedded.iter().zip(sets) {
        let Some(w) = &record.w else { continue };
        if let (Some(u), Some(v)) = (&record.u, &record.v) {
            let added = crate::compose::compose_simple_add(u, v)?;
            let (c, _) = cosine_with_flag(w, &added)?;
            samples.entry("constituent_add").or_default().push(c.clamp(-1.0, 1.0));
        }
        let pairs = [
            ("hyphenated", set.hyphenated.as_str()),
            ("predicate", set.predicate.as_str()),
            ("attributive", set.attributive.as_str()),
            ("adjective_only", set.adjective_only.as_str()),
            ("noun_only", set.noun_only.as_str()),
            ("distractor", set.distractor.as_str()),
        ];
        for (label, text) in pairs {
            if let Some(variant_vec) = lookup(map, text) {
                let (c, _) = cosine_with_flag(w, &variant_vec)?;
                samples.entry(label).or_default().push(c.clamp(-1.0, 1.0));
            }
        }
    }

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for label in labels {
        let Some(s) = samples.get(label) else { continue };
        if s.is_empty() {
            continue;
        }
        let dist = SimilarityDistribution::new(s.clone(), label)?;
        let kde = kde_estimate(&dist, Some(bandwidth))?;
        let js = crate::metrics::js_divergence(&kde, &baseline_kde)?;
        rows.push(VariantEntry {
            source: source.to_string(),
            variant: label.to_string(),
            mean_cosine: dist.mean(),
            js_divergence: js,
            n_records: dist.count(),
        });
        curves.push(NamedDensity {
            label: format!("variant:{label}"),
            density: kde.density,
        });
    }
    Ok((rows, curves))
}

fn write_per_record_csv(
    path: &Path,
    test: &[EmbeddedRecord],
    per_composer: &[(String, BTreeMap<String, f64>)],
) -> Result<()> {
    let mut out = String::from("compound,c1,c2");
    for (name, _) in per_composer {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for record in test {
        if record.u.is_none() || record.v.is_none() || record.w.is_none() {
            continue;
        }
        out.push_str(&format!(
            "{},{},{}",
            csv_escape(&record.compound),
            csv_escape(&record.c1),
            csv_escape(&record.c2)
        ));
        for (_, scores) in per_composer {
            match scores.get(&record.compound) {
                Some(score) => out.push_str(&format!(",{score}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Staging directory: outputs are written here and moved into place on
/// success; on failure whatever was produced is parked under `quarantine/`.
struct Staging {
    out_dir: PathBuf,
    dir: PathBuf,
    committed: std::cell::Cell<bool>,
}

impl Staging {
    fn new(out_dir: &Path) -> Result<Self> {
        let dir = out_dir.join(".staging");
        if dir.exists() {
            std::fs::remove_dir_all(&dir)?;
        }
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            dir,
            committed: std::cell::Cell::new(false),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn final_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn commit(&self) -> Result<()> {
        for entry in std::fs::read_dir(&self.dir)? {
            let entry = entry?;
            std::fs::rename(entry.path(), self.out_dir.join(entry.file_name()))?;
        }
        std::fs::remove_dir_all(&self.dir)?;
        self.committed.set(true);
        Ok(())
    }

    fn quarantine(&self) -> Option<PathBuf> {
        if self.committed.get() {
            return None;
        }
        let has_content = std::fs::read_dir(&self.dir)
            .map(|mut d| d.next().is_some())
            .unwrap_or(false);
        if !has_content {
            let _ = std::fs::remove_dir_all(&self.dir);
            return None;
        }
        let mut target = self.out_dir.join("quarantine");
        let mut counter = 1;
        while target.exists() {
            counter += 1;
            target = self.out_dir.join(format!("quarantine-{counter}"));
        }
        match std::fs::rename(&self.dir, &target) {
            Ok(()) => Some(target),
            Err(_) => None,
        }
    }
}

#[derive(Debug)]
pub struct GenerateOutcome {
    pub dataset_path: PathBuf,
    pub fingerprint_path: PathBuf,
    pub n_records: usize,
    pub fingerprint: String,
}

/// Write the configured generatable dataset as JSON lines plus a
/// fingerprint file. Refuses to overwrite existing output without `force`.
pub fn run_generate(config: &RunConfig, force: bool) -> Result<GenerateOutcome> {
    let kind = config.dataset.kind_name();
    std::fs::create_dir_all(&config.outputs.dir)?;
    let dataset_path = config.outputs.dir.join(format!("{kind}.jsonl"));
    let fingerprint_path = config.outputs.dir.join(format!("{kind}.fingerprint.json"));
    if dataset_path.exists() && !force {
        return Err(Error::Usage(format!(
            "{} already exists; pass --force to overwrite",
            dataset_path.display()
        )));
    }

    let (n_records, params) = match &config.dataset {
        DatasetConfig::LadecNc { n, .. } => {
            let prepared = prepare_dataset(config)?;
            write_jsonl(&dataset_path, &prepared.records)?;
            (prepared.records.len(), serde_json::json!({"n": n}))
        }
        DatasetConfig::Sanc => {
            let records = generate_sanc();
            write_jsonl(&dataset_path, &records)?;
            (records.len(), serde_json::json!({}))
        }
        DatasetConfig::PhraseVariants => {
            let sets: Vec<serde_json::Value> = generate_sanc()
                .into_iter()
                .filter(|r| r.category == AdjectiveCategory::Color)
                .map(|r| {
                    let set = generate_phrase_variants(&r.adjective, &r.noun)?;
                    let mut value = serde_json::to_value(&set)
                        .map_err(|e| Error::Internal(format!("variant serialization: {e}")))?;
                    value["adjective"] = serde_json::json!(r.adjective);
                    value["noun"] = serde_json::json!(r.noun);
                    Ok(value)
                })
                .collect::<Result<_>>()?;
            write_jsonl(&dataset_path, &sets)?;
            (sets.len(), serde_json::json!({}))
        }
        other => {
            return Err(Error::Usage(format!(
                "dataset kind '{}' is not generatable",
                other.kind_name()
            )))
        }
    };

    let bytes = std::fs::read(&dataset_path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let fingerprint = hex_string(&hasher.finalize());
    let fp_doc = serde_json::json!({
        "kind": kind,
        "sha256": fingerprint,
        "seed": config.seed,
        "params": params,
        "n_records": n_records,
    });
    std::fs::write(
        &fingerprint_path,
        serde_json::to_string_pretty(&fp_doc)
            .map_err(|e| Error::Internal(format!("fingerprint serialization: {e}")))?,
    )?;

    Ok(GenerateOutcome {
        dataset_path,
        fingerprint_path,
        n_records,
        fingerprint,
    })
}

/// Warm the embedding cache for every text the configured run would need.
pub fn run_embed(config: &RunConfig, offline: bool) -> Result<usize> {
    config.validate()?;
    let Some(cache_path) = &config.cache_path else {
        return Err(Error::Usage(
            "embed needs cache_path set in the config".into(),
        ));
    };
    let dataset = prepare_dataset(config)?;
    let mut cache = EmbeddingCache::open(cache_path)?;
    let mut total = 0usize;
    for source_spec in &config.sources {
        let source = build_source(source_spec, config.seed, &dataset.records)?;
        let mut texts: Vec<String> = Vec::new();
        for r in &dataset.records {
            texts.push(r.c1.clone());
            texts.push(r.c2.clone());
            texts.push(r.compound.clone());
        }
        if let Some(sets) = &dataset.variants {
            for set in sets {
                for (_, text) in set.labelled() {
                    texts.push(text.to_string());
                }
            }
        }
        let map = resolve_embeddings(source.as_ref(), &texts, Some(&mut cache), offline)?;
        total += map.values().filter(|v| v.is_some()).count();
    }
    Ok(total)
}

/// Fit every parametric configured composer on the train split and write one
/// model document per (source, composer).
pub fn run_fit(config: &RunConfig, offline: bool) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let dataset = prepare_dataset(config)?;
    let mut cache = match &config.cache_path {
        Some(path) => Some(EmbeddingCache::open(path)?),
        None => None,
    };
    let (train_idx, _) =
        split_indices(dataset.records.len(), config.split.train_fraction, config.seed);
    std::fs::create_dir_all(&config.outputs.dir)?;

    let mut written = Vec::new();
    for source_spec in &config.sources {
        let source = build_source(source_spec, config.seed, &dataset.records)?;
        let mut texts: Vec<String> = Vec::new();
        for r in &dataset.records {
            texts.push(r.c1.clone());
            texts.push(r.c2.clone());
            texts.push(r.compound.clone());
        }
        let map = resolve_embeddings(source.as_ref(), &texts, cache.as_mut(), offline)?;
        let embedded = embed_records(&dataset.records, &map);
        let train: Vec<EmbeddedRecord> =
            train_idx.iter().map(|&i| embedded[i].clone()).collect();
        let train_pairs = training_pairs(&train);

        for composer_spec in &config.composers {
            if matches!(
                composer_spec,
                ComposerConfig::SimpleAdd | ComposerConfig::Multiplicative
            ) {
                log::info!("{} has no parameters; skipping fit", composer_spec.kind_name());
                continue;
            }
            let (model, _) = build_composer(composer_spec, &train_pairs, config.seed)?;
            let dim = train_pairs.first().map(|p| p.u.dim()).unwrap_or(0);
            let fit_config = FitConfig {
                seed: config.seed,
                ..FitConfig::default()
            };
            let doc = ModelDocument::new(
                dim,
                model,
                Some(fit_config),
                Some(dataset.fingerprint.clone()),
            );
            let path = config.outputs.dir.join(format!(
                "model_{}_{}.json",
                source.name(),
                composer_spec.kind_name()
            ));
            std::fs::write(&path, doc.to_json()?)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Merge one or more report files into text and CSV tables.
pub fn run_report(paths: &[PathBuf]) -> Result<(String, String)> {
    if paths.is_empty() {
        return Err(Error::Usage("report needs at least one report file".into()));
    }
    let mut loaded = Vec::new();
    for path in paths {
        let report = EvaluationReport::load(path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "report".into());
        loaded.push((label, report));
    }
    // disambiguate duplicate labels by appending the dataset kind or index
    let mut labels: Vec<String> = Vec::new();
    for (i, (label, report)) in loaded.iter().enumerate() {
        let mut candidate = label.clone();
        if labels.contains(&candidate) {
            candidate = format!("{label}_{}", report.body.dataset.kind);
        }
        if labels.contains(&candidate) {
            candidate = format!("{label}_{i}");
        }
        labels.push(candidate);
    }
    let labelled: Vec<(String, &EvaluationReport)> = labels
        .into_iter()
        .zip(loaded.iter().map(|(_, r)| r))
        .collect();
    Ok((
        crate::report::render_text(&labelled),
        crate::report::render_csv(&labelled),
    ))
}
