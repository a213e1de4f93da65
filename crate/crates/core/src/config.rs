//! Run configuration: one self-describing, versioned TOML file drives a
//! whole run; CLI flags override individual scalars.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embeddings::ProviderConfig;
use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub composers: Vec<ComposerConfig>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Embedding cache location; unset means no persistent cache.
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetConfig {
    /// A LADEC-style delimited file with a header row.
    Ladec {
        path: PathBuf,
        #[serde(default)]
        columns: Option<ColumnMapConfig>,
    },
    /// Novel compounds generated from the constituents of a LADEC file.
    LadecNc {
        ladec_path: PathBuf,
        #[serde(default = "default_nc_count")]
        n: usize,
        /// Extra existing words to exclude, one per line.
        #[serde(default)]
        dictionary_path: Option<PathBuf>,
        #[serde(default)]
        columns: Option<ColumnMapConfig>,
    },
    /// The built-in 25x25 adjective-noun grid.
    Sanc,
    /// The color subset of the grid plus its phrase variants.
    PhraseVariants,
    /// A pregenerated JSON-lines file of compound records.
    Jsonl { path: PathBuf },
}

fn default_nc_count() -> usize {
    10_000
}

impl DatasetConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DatasetConfig::Ladec { .. } => "ladec",
            DatasetConfig::LadecNc { .. } => "ladec_nc",
            DatasetConfig::Sanc => "sanc",
            DatasetConfig::PhraseVariants => "phrase_variants",
            DatasetConfig::Jsonl { .. } => "jsonl",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMapConfig {
    #[serde(default = "default_compound_column")]
    pub compound: String,
    #[serde(default = "default_c1_column")]
    pub c1: String,
    #[serde(default = "default_c2_column")]
    pub c2: String,
    /// Rating columns to ingest; unset keeps the standard list.
    #[serde(default)]
    pub ratings: Option<Vec<String>>,
}

fn default_compound_column() -> String {
    "stim".into()
}
fn default_c1_column() -> String {
    "c1".into()
}
fn default_c2_column() -> String {
    "c2".into()
}

impl ColumnMapConfig {
    pub fn to_column_map(&self) -> crate::datasets::ColumnMap {
        let defaults = crate::datasets::ColumnMap::default();
        crate::datasets::ColumnMap {
            compound: self.compound.clone(),
            c1: self.c1.clone(),
            c2: self.c2.clone(),
            ratings: self.ratings.clone().unwrap_or(defaults.ratings),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceConfig {
    Synthetic {
        name: String,
        dim: usize,
        /// Defaults to the run seed.
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        compositional: Option<CompositionalSpec>,
    },
    Local {
        path: PathBuf,
        #[serde(default)]
        name: Option<String>,
    },
    Http {
        #[serde(flatten)]
        provider: ProviderConfig,
    },
}

impl SourceConfig {
    pub fn name(&self) -> &str {
        match self {
            SourceConfig::Synthetic { name, .. } => name,
            SourceConfig::Local { name, path } => name
                .as_deref()
                .unwrap_or_else(|| path.file_stem().and_then(|s| s.to_str()).unwrap_or("local")),
            SourceConfig::Http { provider } => &provider.name,
        }
    }
}

/// Parameters of the synthetic compositional generator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CompositionalSpec {
    pub w1: f64,
    pub w2: f64,
    #[serde(default)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    #[default]
    GradientDescent,
    GridSearch,
    /// Use the parameters given in the config without fitting.
    Fixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComposerConfig {
    SimpleAdd,
    Multiplicative,
    WeightedAdd {
        #[serde(default)]
        fit: FitMethod,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default)]
        epochs: Option<usize>,
        #[serde(default)]
        step_size: Option<f64>,
    },
    Dilation {
        #[serde(default)]
        fit: FitMethod,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        epochs: Option<usize>,
        #[serde(default)]
        step_size: Option<f64>,
        /// Grid-search over 1..=40 instead of -1..=1.
        #[serde(default)]
        extended_grid: bool,
    },
    Ridge {
        #[serde(default = "default_regularization")]
        regularization: f64,
    },
    Mlp {
        #[serde(default)]
        epochs: Option<usize>,
        #[serde(default)]
        step_size: Option<f64>,
        #[serde(default)]
        batch_size: Option<usize>,
    },
}

fn default_regularization() -> f64 {
    1.0
}

impl ComposerConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ComposerConfig::SimpleAdd => "simple_add",
            ComposerConfig::Multiplicative => "multiplicative",
            ComposerConfig::WeightedAdd { .. } => "weighted_add",
            ComposerConfig::Dilation { .. } => "dilation",
            ComposerConfig::Ridge { .. } => "ridge",
            ComposerConfig::Mlp { .. } => "mlp",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricsConfig {
    #[serde(default = "default_n_pairs")]
    pub n_pairs: usize,
    /// KDE bandwidth override; unset means Scott's rule on the baseline.
    #[serde(default)]
    pub bandwidth: Option<f64>,
}

fn default_n_pairs() -> usize {
    1000
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            n_pairs: default_n_pairs(),
            bandwidth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitConfig {
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.8
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: default_train_fraction(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_output_dir(),
        }
    }
}

/// Scalar overrides coming from CLI flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub source: Option<String>,
    pub composer: Option<String>,
    pub out: Option<PathBuf>,
    pub offline: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        if config.version != CONFIG_VERSION {
            return Err(Error::Schema(format!(
                "config version {} not supported (expected {CONFIG_VERSION})",
                config.version
            )));
        }
        Ok(config)
    }

    /// Apply CLI overrides: `--seed` replaces the seed, `--source` and
    /// `--composer` filter the configured lists by name, `--out` replaces
    /// the output directory.
    pub fn apply_overrides(mut self, overrides: &Overrides) -> Result<Self> {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(out) = &overrides.out {
            self.outputs.dir = out.clone();
        }
        if let Some(name) = &overrides.source {
            self.sources.retain(|s| s.name() == name);
            if self.sources.is_empty() {
                return Err(Error::Usage(format!(
                    "--source '{name}' matches no configured source"
                )));
            }
        }
        if let Some(name) = &overrides.composer {
            self.composers.retain(|c| c.kind_name() == name);
            if self.composers.is_empty() {
                return Err(Error::Usage(format!(
                    "--composer '{name}' matches no configured composer"
                )));
            }
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Usage("config needs at least one source".into()));
        }
        if self.composers.is_empty() {
            return Err(Error::Usage("config needs at least one composer".into()));
        }
        let tf = self.split.train_fraction;
        if !tf.is_finite() || tf <= 0.0 || tf >= 1.0 {
            return Err(Error::Parameter(
                "split.train_fraction must be in (0, 1)".into(),
            ));
        }
        if self.metrics.n_pairs == 0 {
            return Err(Error::Parameter("metrics.n_pairs must be positive".into()));
        }
        if let Some(b) = self.metrics.bandwidth {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::Parameter("metrics.bandwidth must be positive".into()));
            }
        }
        for source in &self.sources {
            match source {
                SourceConfig::Synthetic {
                    dim, compositional, ..
                } => {
                    if *dim < 2 {
                        return Err(Error::Parameter("synthetic dim must be >= 2".into()));
                    }
                    if let Some(c) = compositional {
                        if !c.w1.is_finite() || !c.w2.is_finite() || !c.sigma.is_finite() || c.sigma < 0.0 {
                            return Err(Error::Parameter(
                                "compositional spec needs finite weights and sigma >= 0".into(),
                            ));
                        }
                    }
                }
                SourceConfig::Http { provider } => {
                    if provider.expected_dim == 0 {
                        return Err(Error::Parameter(format!(
                            "source '{}': expected_dim must be positive",
                            provider.name
                        )));
                    }
                }
                SourceConfig::Local { .. } => {}
            }
        }
        for composer in &self.composers {
            match composer {
                ComposerConfig::WeightedAdd {
                    fit, alpha, beta, ..
                } => {
                    if *fit == FitMethod::Fixed && (alpha.is_none() || beta.is_none()) {
                        return Err(Error::Usage(
                            "weighted_add with fit = \"fixed\" needs alpha and beta".into(),
                        ));
                    }
                }
                ComposerConfig::Dilation { fit, lambda, .. } => {
                    if *fit == FitMethod::Fixed && lambda.is_none() {
                        return Err(Error::Usage(
                            "dilation with fit = \"fixed\" needs lambda".into(),
                        ));
                    }
                }
                ComposerConfig::Ridge { regularization }
                    if !regularization.is_finite() || *regularization < 0.0 =>
                {
                    return Err(Error::Parameter(
                        "ridge regularization must be >= 0".into(),
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Hash of the effective configuration, recorded in report provenance.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_string(&hasher.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
