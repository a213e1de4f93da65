//! Embedding acquisition: pluggable sources behind a persistent cache.
//!
//! Sources are HTTP providers, local vector files, or the deterministic
//! synthetic generator. All text is put through one documented
//! normalization pass (lowercase, whitespace collapse) before hashing,
//! caching or fetching.

mod cache;
mod local;
mod provider;
mod synthetic;

pub use cache::EmbeddingCache;
pub use local::{load_local_embeddings, LocalFileSource};
pub use provider::{HttpProviderSource, ProviderConfig, ResponseShape};
pub use synthetic::{synthetic_embed, SyntheticMode, SyntheticSource};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// The single normalization pass applied to every text before it is hashed,
/// cached or sent to a source: lowercase plus whitespace collapse.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// One cached embedding; also the on-disk cache line and the interchange
/// format for local vector files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub source: String,
    pub model_id: String,
    /// Normalized text (see [`normalize_text`]), stored byte-exact.
    pub text: String,
    pub vector: Vector,
    pub fetched_at: String,
}

/// A place embeddings come from. `fetch` receives already-normalized texts.
pub trait EmbeddingSource {
    fn name(&self) -> &str;
    fn model_id(&self) -> &str;
    fn expected_dim(&self) -> usize;
    /// Maximum number of texts per fetch call.
    fn batch_limit(&self) -> usize {
        256
    }
    /// True for sources that talk to the network, so offline runs can refuse.
    fn requires_network(&self) -> bool {
        false
    }
    fn fetch(&self, texts: &[String]) -> Result<Vec<Vector>>;
    /// Fetch where individual texts may legitimately be absent (local
    /// stores). The default treats the source as all-or-nothing.
    fn fetch_optional(&self, texts: &[String]) -> Result<Vec<Option<Vector>>> {
        Ok(self.fetch(texts)?.into_iter().map(Some).collect())
    }
}

/// Resolve embeddings for `texts`, consulting `cache` first and writing every
/// fetched record back to it before returning. Output preserves input order
/// and multiplicity. A dimension disagreeing with the source's expected
/// dimension is an integrity error.
pub fn embed_texts(
    source: &dyn EmbeddingSource,
    texts: &[String],
    cache: Option<&mut EmbeddingCache>,
) -> Result<Vec<EmbeddingRecord>> {
    embed_texts_with_policy(source, texts, cache, false)
}

/// [`embed_texts`] with an offline switch: when `offline` is set, any cache
/// miss against a network-backed source is an error instead of a fetch.
pub fn embed_texts_with_policy(
    source: &dyn EmbeddingSource,
    texts: &[String],
    mut cache: Option<&mut EmbeddingCache>,
    offline: bool,
) -> Result<Vec<EmbeddingRecord>> {
    if texts.is_empty() {
        return Err(Error::Usage("embed_texts needs at least one text".into()));
    }
    let normalized: Vec<String> = texts.iter().map(|t| normalize_text(t)).collect();

    // unique misses in first-seen order
    let mut resolved: std::collections::HashMap<String, Vector> = std::collections::HashMap::new();
    let mut misses: Vec<String> = Vec::new();
    for ntext in &normalized {
        if resolved.contains_key(ntext) || misses.contains(ntext) {
            continue;
        }
        let hit = cache
            .as_ref()
            .and_then(|c| c.get(source.name(), source.model_id(), ntext));
        match hit {
            Some(vector) => {
                resolved.insert(ntext.clone(), vector);
            }
            None => misses.push(ntext.clone()),
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
        let limit = source.batch_limit().max(1);
        for batch in misses.chunks(limit) {
            let vectors = source.fetch(batch)?;
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
                if vector.dim() != source.expected_dim() {
                    return Err(Error::Integrity(format!(
                        "source '{}' returned dimension {} for '{}', expected {}",
                        source.name(),
                        vector.dim(),
                        ntext,
                        source.expected_dim()
                    )));
                }
                let record = EmbeddingRecord {
                    source: source.name().to_string(),
                    model_id: source.model_id().to_string(),
                    text: ntext.clone(),
                    vector: vector.clone(),
                    fetched_at: fetched_at.clone(),
                };
                if let Some(c) = cache.as_mut() {
                    c.put(&record)?;
                }
                resolved.insert(ntext.clone(), vector);
            }
        }
    }

    let now = chrono::Utc::now().to_rfc3339();
    normalized
        .into_iter()
        .map(|ntext| {
            let vector = resolved
                .get(&ntext)
                .cloned()
                .ok_or_else(|| Error::Internal(format!("unresolved text '{ntext}'")))?;
            Ok(EmbeddingRecord {
                source: source.name().to_string(),
                model_id: source.model_id().to_string(),
                text: ntext,
                vector,
                fetched_at: now.clone(),
            })
        })
        .collect()
}
