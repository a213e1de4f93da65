//! Integration tests of `run_evaluate` over a local vector file, on a corpus
//! whose generating map is linear but not a scalar weighting — the regime
//! where ridge regression is optimal by construction among the composers.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use embcomp::config::{
    ComposerConfig, DatasetConfig, FitMethod, MetricsConfig, OutputConfig, RunConfig,
    SourceConfig, SplitConfig,
};
use embcomp::pipeline::run_evaluate;

const DIM: usize = 48;

fn unit(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..DIM).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Writes the corpus (600 compounds over 40x40 pools) and a local vector
/// file where `w = normalize(a .* u + b .* v) + noise`, with coordinate
/// ramps `a` and `b` that no single scalar pair reproduces.
fn write_linear_corpus(dir: &Path) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let ramp_a: Vec<f64> = (0..DIM)
        .map(|i| 0.3 + 0.6 * i as f64 / (DIM - 1) as f64)
        .collect();
    let ramp_b: Vec<f64> = ramp_a.iter().map(|a| 1.2 - a).collect();

    let firsts: Vec<(String, Vec<f64>)> =
        (0..40).map(|i| (format!("a{i:02}"), unit(&mut rng))).collect();
    let seconds: Vec<(String, Vec<f64>)> =
        (0..40).map(|j| (format!("b{j:02}"), unit(&mut rng))).collect();
    let mut cells: Vec<(usize, usize)> = (0..40)
        .flat_map(|i| (0..40).map(move |j| (i, j)))
        .collect();
    cells.shuffle(&mut rng);

    let vectors_path = dir.join("vectors.jsonl");
    let corpus_path = dir.join("corpus.jsonl");
    let mut vectors = std::io::BufWriter::new(std::fs::File::create(&vectors_path).unwrap());
    let mut corpus = std::io::BufWriter::new(std::fs::File::create(&corpus_path).unwrap());

    let write_vec = |out: &mut dyn Write, text: &str, v: &[f64]| {
        let vals: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        writeln!(out, "{{\"text\": \"{text}\", \"vector\": [{}]}}", vals.join(", ")).unwrap();
    };
    for (text, v) in firsts.iter().chain(&seconds) {
        write_vec(&mut vectors, text, v);
    }
    for &(i, j) in cells.iter().take(600) {
        let (ref c1, ref u) = firsts[i];
        let (ref c2, ref v) = seconds[j];
        let mut w: Vec<f64> = (0..DIM)
            .map(|k| ramp_a[k] * u[k] + ramp_b[k] * v[k])
            .collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut w {
            *x /= norm;
        }
        let noise = unit(&mut rng);
        for (x, n) in w.iter_mut().zip(&noise) {
            *x += 0.02 * n;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut w {
            *x /= norm;
        }
        let compound = format!("{c1}{c2}");
        write_vec(&mut vectors, &compound, &w);
        writeln!(
            corpus,
            "{{\"compound\": \"{compound}\", \"c1\": \"{c1}\", \"c2\": \"{c2}\"}}"
        )
        .unwrap();
    }
    vectors.flush().unwrap();
    corpus.flush().unwrap();
    (corpus_path, vectors_path)
}

#[test]
fn ridge_leads_all_composers_on_a_general_linear_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, vectors) = write_linear_corpus(dir.path());
    let config = RunConfig {
        version: 1,
        seed: 42,
        dataset: DatasetConfig::Jsonl { path: corpus },
        sources: vec![SourceConfig::Local {
            path: vectors,
            name: Some("local".into()),
        }],
        composers: vec![
            ComposerConfig::SimpleAdd,
            ComposerConfig::WeightedAdd {
                fit: FitMethod::GradientDescent,
                alpha: None,
                beta: None,
                epochs: Some(150),
                step_size: Some(0.1),
            },
            ComposerConfig::Multiplicative,
            ComposerConfig::Dilation {
                fit: FitMethod::GradientDescent,
                lambda: None,
                epochs: Some(100),
                step_size: Some(0.1),
                extended_grid: false,
            },
            ComposerConfig::Ridge {
                regularization: 1.0,
            },
            ComposerConfig::Mlp {
                epochs: Some(40),
                step_size: Some(1e-3),
                batch_size: Some(64),
            },
        ],
        metrics: MetricsConfig {
            n_pairs: 500,
            bandwidth: None,
        },
        split: SplitConfig {
            train_fraction: 0.8,
        },
        outputs: OutputConfig {
            dir: dir.path().join("out"),
        },
        cache_path: None,
    };

    let outcome = run_evaluate(&config, true).unwrap();
    let entries = &outcome.report.body.entries;
    assert_eq!(entries.len(), 6);
    let ridge = entries.iter().find(|e| e.composer == "ridge").unwrap();
    for e in entries {
        if e.composer != "ridge" {
            assert!(
                ridge.mean_cosine > e.mean_cosine,
                "ridge {:.4} did not beat {} at {:.4}",
                ridge.mean_cosine,
                e.composer,
                e.mean_cosine
            );
        }
    }
    assert!(ridge.mean_cosine > 0.99, "ridge only reached {}", ridge.mean_cosine);

    let mult = entries.iter().find(|e| e.composer == "multiplicative").unwrap();
    assert!(mult.is_non_compositional());
    assert!(mult.mean_cosine < ridge.mean_cosine);

    // every configured (source x composer) pair appears exactly once
    let mut keys: Vec<(String, String)> = entries
        .iter()
        .map(|e| (e.source.clone(), e.composer.clone()))
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 6);
}
