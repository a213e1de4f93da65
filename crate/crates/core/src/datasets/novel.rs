//! Novel-compound generation: all pairwise first x second constituent
//! concatenations, minus existing words, sampled without replacement.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::CompoundRecord;

/// Output of [`generate_ladec_nc`].
#[derive(Debug, Clone)]
pub struct NovelCompounds {
    pub records: Vec<CompoundRecord>,
    /// True when fewer candidates existed than were requested.
    pub truncated: bool,
}

/// Cross every unique first constituent with every unique second constituent,
/// drop compounds in `exclusion`, and draw `n` samples without replacement.
///
/// Sampling shuffles the candidate list sorted by compound surface form with
/// a generator seeded by `seed`, so the output is reproducible and
/// independent of set-iteration order. When one surface form arises from two
/// different constituent splits, the lexicographically smallest `(c1, c2)`
/// pair is kept.
pub fn generate_ladec_nc(
    records: &[CompoundRecord],
    n: usize,
    seed: u64,
    exclusion: &BTreeSet<String>,
) -> Result<NovelCompounds> {
    if records.is_empty() {
        return Err(Error::Usage(
            "novel-compound generation needs source records".into(),
        ));
    }

    let firsts: Vec<&str> = records
        .iter()
        .map(|r| r.c1.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let seconds: Vec<&str> = records
        .iter()
        .map(|r| r.c2.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    // Candidates as index pairs; the surface strings are only materialized
    // transiently so the full cross product stays affordable.
    let mut candidates: Vec<(u32, u32)> = Vec::new();
    let mut surface = String::new();
    for (ai, a) in firsts.iter().enumerate() {
        for (bi, b) in seconds.iter().enumerate() {
            surface.clear();
            surface.push_str(a);
            surface.push_str(b);
            if !exclusion.contains(surface.as_str()) {
                candidates.push((ai as u32, bi as u32));
            }
        }
    }

    let compound_bytes = |&(ai, bi): &(u32, u32)| {
        firsts[ai as usize]
            .bytes()
            .chain(seconds[bi as usize].bytes())
    };
    // Sort by surface form; (c1, c2) order breaks surface-form ties so the
    // later dedup keeps the smallest split.
    candidates.sort_by(|x, y| {
        compound_bytes(x)
            .cmp(compound_bytes(y))
            .then_with(|| {
                (firsts[x.0 as usize], seconds[x.1 as usize])
                    .cmp(&(firsts[y.0 as usize], seconds[y.1 as usize]))
            })
    });
    candidates.dedup_by(|a, b| compound_bytes(a).eq(compound_bytes(b)));

    let truncated = candidates.len() < n;
    if truncated {
        log::warn!(
            "only {} novel candidates available, {} requested",
            candidates.len(),
            n
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);
    candidates.truncate(n);

    let records = candidates
        .into_iter()
        .map(|(ai, bi)| {
            let a = firsts[ai as usize];
            let b = seconds[bi as usize];
            CompoundRecord::new(format!("{a}{b}"), a, b)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(NovelCompounds { records, truncated })
}
