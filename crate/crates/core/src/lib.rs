//! embcomp measures how predictable compound-word embeddings are from their
//! constituents' embeddings.
//!
//! Six composition functions map a pair of constituent vectors `(u, v)` to a
//! predicted compound vector: simple addition, weighted addition,
//! element-wise multiplication, dilation, ridge regression over the
//! concatenation, and a small MLP. Predictions are scored by cosine
//! similarity against the observed compound embedding, and each score
//! distribution is compared with a random-pair baseline through kernel
//! density estimates and Jensen-Shannon divergence.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`datasets`]: compound lists (LADEC files, generated novel compounds,
//!   the 25x25 adjective-noun grid, color phrase variants)
//! - [`embeddings`]: vector acquisition from HTTP providers, local files or
//!   the deterministic synthetic generator, behind a persistent cache
//! - [`compose`]: the six composition models and their fitting procedures
//! - [`metrics`]: cosine distributions, KDE curves, JS divergence
//! - [`analysis`]: constituent dominance, rating correlations, 2D projection
//! - [`pipeline`] + [`config`]: end-to-end runs driven by a single config
//!
//! The `embcomp` binary exposes the same stages as subcommands
//! (`generate`, `embed`, `fit`, `evaluate`, `report`).

// the linear-algebra kernels index both sides of symmetric updates
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod compose;
pub mod config;
pub mod datasets;
pub mod embeddings;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod vector;

pub use error::{Error, Result};
pub use vector::Vector;
