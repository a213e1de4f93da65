//! 2D projections of labelled embedding sets: deterministic PCA as the
//! reference method, plus a seeded neighbor-graph embedding for nonlinear
//! structure.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    Pca,
    NeighborEmbedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Composition,
    Constituent,
}

#[derive(Debug, Clone)]
pub struct LabelledVector {
    pub label: String,
    pub kind: PointKind,
    pub vector: Vector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionPoint {
    pub label: String,
    pub kind: PointKind,
    pub x: f64,
    pub y: f64,
}

/// A projection together with how it was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionOutput {
    pub method: ProjectionMethod,
    pub seed: u64,
    pub points: Vec<ProjectionPoint>,
}

impl ProjectionOutput {
    /// `label,kind,x,y` rows with full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,kind,x,y\n");
        for p in &self.points {
            let kind = match p.kind {
                PointKind::Composition => "composition",
                PointKind::Constituent => "constituent",
            };
            let label = if p.label.contains([',', '"', '\n']) {
                format!("\"{}\"", p.label.replace('"', "\"\""))
            } else {
                p.label.clone()
            };
            out.push_str(&format!("{label},{kind},{},{}\n", p.x, p.y));
        }
        out
    }
}

/// Project labelled vectors to 2D.
///
/// `Pca` centers the data and projects onto the top two principal
/// components, with the sign convention that each component's
/// largest-magnitude loading is positive. `NeighborEmbedding` runs a seeded
/// attraction/repulsion layout over the k-nearest-neighbor graph; it is
/// locally faithful but not metric.
pub fn project_2d(
    items: &[LabelledVector],
    method: ProjectionMethod,
    seed: u64,
) -> Result<ProjectionOutput> {
    if items.len() < 3 {
        return Err(Error::Usage("projection needs at least 3 vectors".into()));
    }
    let dim = items[0].vector.dim();
    if items.iter().any(|it| it.vector.dim() != dim) {
        return Err(Error::Shape("projection inputs must share one dimension".into()));
    }

    // mean-center
    let n = items.len();
    let mut mean = vec![0.0; dim];
    for it in items {
        for (m, x) in mean.iter_mut().zip(it.vector.as_slice()) {
            *m += x / n as f64;
        }
    }
    let centered: Vec<Vec<f64>> = items
        .iter()
        .map(|it| {
            it.vector
                .as_slice()
                .iter()
                .zip(&mean)
                .map(|(x, m)| x - m)
                .collect()
        })
        .collect();

    let spread = centered
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if spread == 0.0 {
        return Err(Error::Degenerate(
            "all points identical; nothing to project".into(),
        ));
    }

    let coords = match method {
        ProjectionMethod::Pca => pca_coords(&centered, seed),
        ProjectionMethod::NeighborEmbedding => neighbor_coords(&centered, seed),
    };

    Ok(ProjectionOutput {
        method,
        seed,
        points: items
            .iter()
            .zip(coords)
            .map(|(it, (x, y))| ProjectionPoint {
                label: it.label.clone(),
                kind: it.kind,
                x,
                y,
            })
            .collect(),
    })
}

fn matvec(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn matvec_t(rows: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    let dim = rows[0].len();
    let mut out = vec![0.0; dim];
    for (row, &ui) in rows.iter().zip(u) {
        for (o, &x) in out.iter_mut().zip(row) {
            *o += ui * x;
        }
    }
    out
}

fn normalize_in_place(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Top-2 principal directions by power iteration with deflation.
fn pca_coords(centered: &[Vec<f64>], seed: u64) -> Vec<(f64, f64)> {
    let dim = centered[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(2);

    for _ in 0..2 {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, &components);
        normalize_in_place(&mut v);
        let mut previous = v.clone();
        for _ in 0..500 {
            // v <- X' X v, restricted to the space orthogonal to found components
            let mut next = matvec_t(centered, &matvec(centered, &v));
            orthogonalize(&mut next, &components);
            if normalize_in_place(&mut next) == 0.0 {
                // no variance left (rank < 2); keep the current direction
                break;
            }
            let delta: f64 = next
                .iter()
                .zip(&previous)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            previous = next.clone();
            v = next;
            if delta < 1e-12 {
                break;
            }
        }
        fix_sign(&mut v);
        components.push(v);
    }

    centered
        .iter()
        .map(|row| {
            let x = row.iter().zip(&components[0]).map(|(a, b)| a * b).sum();
            let y = row.iter().zip(&components[1]).map(|(a, b)| a * b).sum();
            (x, y)
        })
        .collect()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let proj: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
        for (x, c) in v.iter_mut().zip(b) {
            *x -= proj * c;
        }
    }
}

/// Largest-magnitude loading made positive; first index wins ties.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Seeded attraction/repulsion layout over the kNN graph, initialized from
/// the PCA projection.
fn neighbor_coords(centered: &[Vec<f64>], seed: u64) -> Vec<(f64, f64)> {
    let n = centered.len();
    let k = 15.min(n - 1);

    // kNN by squared euclidean distance
    let mut neighbors: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let d2: f64 = centered[i]
                    .iter()
                    .zip(&centered[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2, j)
            })
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        neighbors.push(dists.iter().take(k).map(|&(_, j)| j).collect());
    }

    // scale the PCA layout to unit-ish spread as the starting state
    let init = pca_coords(centered, seed);
    let spread = init
        .iter()
        .flat_map(|&(x, y)| [x.abs(), y.abs()])
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let mut layout: Vec<(f64, f64)> = init
        .iter()
        .map(|&(x, y)| (10.0 * x / spread, 10.0 * y / spread))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e65_6967_6862_6f72); // distinct stream
    let epochs = 200;
    for epoch in 0..epochs {
        let lr = 1.0 * (1.0 - epoch as f64 / epochs as f64);
        for i in 0..n {
            for &j in &neighbors[i] {
                let (dx, dy) = (layout[i].0 - layout[j].0, layout[i].1 - layout[j].1);
                let d2 = dx * dx + dy * dy;
                let w = -2.0 / (1.0 + d2); // attraction
                layout[i].0 += lr * w * dx;
                layout[i].1 += lr * w * dy;
            }
            for _ in 0..5 {
                let j = rng.random_range(0..n);
                if j == i || neighbors[i].contains(&j) {
                    continue;
                }
                let (dx, dy) = (layout[i].0 - layout[j].0, layout[i].1 - layout[j].1);
                let d2 = dx * dx + dy * dy;
                let w = 2.0 / ((0.01 + d2) * (1.0 + d2)); // repulsion
                layout[i].0 += (lr * w * dx).clamp(-4.0, 4.0);
                layout[i].1 += (lr * w * dy).clamp(-4.0, 4.0);
            }
        }
    }
    layout
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    fn labelled(label: &str, values: Vec<f64>) -> LabelledVector {
        LabelledVector {
            label: label.into(),
            kind: PointKind::Composition,
            vector: Vector::new(values).unwrap(),
        }
    }

    #[test]
    fn planar_input_preserves_pairwise_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let items: Vec<LabelledVector> = (0..12)
            .map(|i| {
                labelled(
                    &format!("p{i}"),
                    vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)],
                )
            })
            .collect();
        let points = project_2d(&items, ProjectionMethod::Pca, 42).unwrap().points;
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                let orig = {
                    let a = items[i].vector.as_slice();
                    let b = items[j].vector.as_slice();
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                };
                let proj = ((points[i].x - points[j].x).powi(2)
                    + (points[i].y - points[j].y).powi(2))
                .sqrt();
                assert!(
                    (orig - proj).abs() < 1e-9,
                    "distance {orig} became {proj}"
                );
            }
        }
    }

    #[test]
    fn collinear_points_flatten_to_a_line() {
        let items: Vec<LabelledVector> = (0..8)
            .map(|i| {
                let t = i as f64;
                labelled(&format!("p{i}"), vec![t, 2.0 * t, -t])
            })
            .collect();
        let points = project_2d(&items, ProjectionMethod::Pca, 42).unwrap().points;
        for p in &points {
            assert!(p.y.abs() < 1e-9, "second coordinate {}", p.y);
        }
        // total variance ordering
        let var = |f: &dyn Fn(&ProjectionPoint) -> f64| -> f64 {
            let m = points.iter().map(f).sum::<f64>() / points.len() as f64;
            points.iter().map(|p| (f(p) - m).powi(2)).sum::<f64>()
        };
        assert!(var(&|p| p.x) >= var(&|p| p.y));
    }

    #[test]
    fn identical_points_are_degenerate() {
        let items: Vec<LabelledVector> =
            (0..4).map(|i| labelled(&format!("p{i}"), vec![1.0, 2.0, 3.0])).collect();
        let err = project_2d(&items, ProjectionMethod::Pca, 42).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn pca_is_deterministic_across_seeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let items: Vec<LabelledVector> = (0..30)
            .map(|i| {
                labelled(
                    &format!("p{i}"),
                    (0..10).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
                )
            })
            .collect();
        let a = project_2d(&items, ProjectionMethod::Pca, 42).unwrap().points;
        let b = project_2d(&items, ProjectionMethod::Pca, 43).unwrap().points;
        for (pa, pb) in a.iter().zip(&b) {
            assert!((pa.x - pb.x).abs() < 1e-8);
            assert!((pa.y - pb.y).abs() < 1e-8);
        }
    }

    fn three_clusters(per_cluster: usize, dim: usize, seed: u64) -> (Vec<LabelledVector>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centers = Vec::new();
        for _ in 0..3 {
            let c: Vec<f64> = (0..dim)
                .map(|_| 10.0 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            centers.push(c);
        }
        let mut items = Vec::new();
        let mut labels = Vec::new();
        for (ci, center) in centers.iter().enumerate() {
            for i in 0..per_cluster {
                let v: Vec<f64> = center
                    .iter()
                    .map(|c| c + rng.sample::<f64, _>(StandardNormal))
                    .collect();
                items.push(labelled(&format!("c{ci}_{i}"), v));
                labels.push(ci);
            }
        }
        (items, labels)
    }

    fn nearest_centroid_accuracy(points: &[ProjectionPoint], labels: &[usize]) -> f64 {
        let mut centroids = [(0.0, 0.0, 0usize); 3];
        for (p, &l) in points.iter().zip(labels) {
            centroids[l].0 += p.x;
            centroids[l].1 += p.y;
            centroids[l].2 += 1;
        }
        let centroids: Vec<(f64, f64)> = centroids
            .iter()
            .map(|&(x, y, n)| (x / n as f64, y / n as f64))
            .collect();
        let mut correct = 0;
        for (p, &l) in points.iter().zip(labels) {
            let nearest = (0..3)
                .min_by(|&a, &b| {
                    let da = (p.x - centroids[a].0).powi(2) + (p.y - centroids[a].1).powi(2);
                    let db = (p.x - centroids[b].0).powi(2) + (p.y - centroids[b].1).powi(2);
                    da.total_cmp(&db)
                })
                .unwrap();
            correct += usize::from(nearest == l);
        }
        correct as f64 / points.len() as f64
    }

    #[test]
    fn pca_separates_well_spaced_clusters() {
        let (items, labels) = three_clusters(60, 64, 7);
        let points = project_2d(&items, ProjectionMethod::Pca, 42).unwrap().points;
        let acc = nearest_centroid_accuracy(&points, &labels);
        assert!(acc >= 0.99, "cluster accuracy {acc}");
    }

    #[test]
    fn neighbor_embedding_keeps_clusters_locally_coherent() {
        let (items, labels) = three_clusters(40, 32, 8);
        let output = project_2d(&items, ProjectionMethod::NeighborEmbedding, 42).unwrap();
        assert_eq!(output.method, ProjectionMethod::NeighborEmbedding);
        assert_eq!(output.seed, 42);
        let points = output.points;
        let acc = nearest_centroid_accuracy(&points, &labels);
        assert!(acc >= 0.9, "cluster accuracy {acc}");
        // seeded: same seed, same layout
        let again = project_2d(&items, ProjectionMethod::NeighborEmbedding, 42).unwrap().points;
        for (a, b) in points.iter().zip(&again) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
    }
}
