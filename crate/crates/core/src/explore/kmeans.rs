//! Lloyd's k-means on sparse rows with restarts and an elbow report.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::vectorize::{FeatureMatrix, Vocabulary};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ClusterResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroid.
    pub sse: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Euclidean,
    /// Squared Euclidean on L2-normalized rows (equivalent ordering to
    /// cosine dissimilarity).
    Cosine,
}

fn row_norm_sq(row: &[(u32, f64)]) -> f64 {
    row.iter().map(|(_, w)| w * w).sum()
}

fn dist_sq(row: &[(u32, f64)], row_sq: f64, centroid: &[f64], centroid_sq: f64) -> f64 {
    let mut dot = 0.0;
    for &(col, w) in row {
        dot += w * centroid[col as usize];
    }
    (row_sq - 2.0 * dot + centroid_sq).max(0.0)
}

struct Dataset {
    rows: Vec<Vec<(u32, f64)>>,
    norms: Vec<f64>,
    n_cols: usize,
}

impl Dataset {
    fn new(x: &FeatureMatrix, distance: Distance) -> Dataset {
        let rows: Vec<Vec<(u32, f64)>> = match distance {
            Distance::Euclidean => x.rows.clone(),
            Distance::Cosine => x
                .rows
                .iter()
                .map(|row| {
                    let norm = row_norm_sq(row).sqrt();
                    if norm == 0.0 {
                        row.clone()
                    } else {
                        row.iter().map(|(c, w)| (*c, w / norm)).collect()
                    }
                })
                .collect(),
        };
        let norms = rows.iter().map(|r| row_norm_sq(r)).collect();
        Dataset {
            rows,
            norms,
            n_cols: x.n_cols,
        }
    }
}

struct Run {
    assignments: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    sse: f64,
    iterations: usize,
    /// Assignment-step SSE per Lloyd iteration.
    #[allow(dead_code)] // read by the monotonicity test
    sse_history: Vec<f64>,
}

fn lloyd(data: &Dataset, mut centroids: Vec<Vec<f64>>, max_iter: usize) -> Run {
    let n = data.rows.len();
    let k = centroids.len();
    let mut assignments = vec![usize::MAX; n];
    let mut iterations = 0;
    let mut sse_history = Vec::new();

    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let centroid_sq: Vec<f64> = centroids.iter().map(|c| row_norm_sq_dense(c)).collect();
        // assignment step; ties go to the lower cluster index
        let mut changed = false;
        let mut dists = vec![0.0f64; n];
        for i in 0..n {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (j, centroid) in centroids.iter().enumerate() {
                let d = dist_sq(&data.rows[i], data.norms[i], centroid, centroid_sq[j]);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            if assignments[i] != best {
                changed = true;
                assignments[i] = best;
            }
            dists[i] = best_d;
        }

        // empty clusters re-seed from the farthest point
        let mut counts = vec![0usize; k];
        for &a in &assignments {
            counts[a] += 1;
        }
        let mut reseeded = false;
        for j in 0..k {
            if counts[j] == 0 {
                let farthest = (0..n)
                    .max_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap())
                    .expect("non-empty data");
                let donor = assignments[farthest];
                counts[donor] -= 1;
                assignments[farthest] = j;
                counts[j] = 1;
                dists[farthest] = 0.0;
                reseeded = true;
            }
        }

        sse_history.push(dists.iter().sum());

        if !changed && !reseeded {
            break;
        }

        // update step
        for centroid in &mut centroids {
            centroid.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            for &(col, w) in &data.rows[i] {
                centroids[a][col as usize] += w;
            }
        }
        for (j, centroid) in centroids.iter_mut().enumerate() {
            if counts[j] > 0 {
                let inv = 1.0 / counts[j] as f64;
                centroid.iter_mut().for_each(|v| *v *= inv);
            }
        }
    }

    let centroid_sq: Vec<f64> = centroids.iter().map(|c| row_norm_sq_dense(c)).collect();
    let mut sse = 0.0;
    for i in 0..n {
        sse += dist_sq(
            &data.rows[i],
            data.norms[i],
            &centroids[assignments[i]],
            centroid_sq[assignments[i]],
        );
    }
    Run {
        assignments,
        centroids,
        sse,
        iterations,
        sse_history,
    }
}

fn row_norm_sq_dense(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn seeded_centroids(data: &Dataset, k: usize, rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
    let picks = sample(rng, data.rows.len(), k);
    picks
        .into_iter()
        .map(|i| {
            let mut dense = vec![0.0; data.n_cols];
            for &(col, w) in &data.rows[i] {
                dense[col as usize] = w;
            }
            dense
        })
        .collect()
}

/// Best-of-restarts Lloyd clustering; deterministic given the seed. The
/// restart with the lowest SSE wins (ties: lowest restart index).
pub fn kmeans(
    x: &FeatureMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<ClusterResult> {
    kmeans_with(x, k, seed, restarts, max_iter, Distance::Euclidean)
}

pub fn kmeans_with(
    x: &FeatureMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
    distance: Distance,
) -> Result<ClusterResult> {
    if k < 1 || k > x.n_rows {
        return Err(Error::InvalidArgument(format!(
            "k={k} outside 1..={}",
            x.n_rows
        )));
    }
    let data = Dataset::new(x, distance);
    let mut best: Option<Run> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let init = seeded_centroids(&data, k, &mut rng);
        let run = lloyd(&data, init, max_iter);
        let better = match &best {
            None => true,
            Some(b) => run.sse < b.sse,
        };
        if better {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    Ok(ClusterResult {
        k,
        assignments: run.assignments,
        centroids: run.centroids,
        sse: run.sse,
        iterations: run.iterations,
    })
}

/// SSE per k. Each k also tries a warm start from the previous best
/// (previous centroids plus the farthest point), which keeps the curve
/// non-increasing.
pub fn elbow_curve(x: &FeatureMatrix, k_range: &[usize], seed: u64) -> Result<Vec<(usize, f64)>> {
    elbow_curve_with(x, k_range, seed, 5, 100, Distance::Euclidean)
}

pub fn elbow_curve_with(
    x: &FeatureMatrix,
    k_range: &[usize],
    seed: u64,
    restarts: usize,
    max_iter: usize,
    distance: Distance,
) -> Result<Vec<(usize, f64)>> {
    let data = Dataset::new(x, distance);
    let mut out = Vec::with_capacity(k_range.len());
    let mut previous: Option<Run> = None;
    for &k in k_range {
        if k < 1 || k > x.n_rows {
            return Err(Error::InvalidArgument(format!(
                "k={k} outside 1..={}",
                x.n_rows
            )));
        }
        let mut best: Option<Run> = None;
        for r in 0..restarts.max(1) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let init = seeded_centroids(&data, k, &mut rng);
            let run = lloyd(&data, init, max_iter);
            if best.as_ref().map_or(true, |b| run.sse < b.sse) {
                best = Some(run);
            }
        }
        if let Some(prev) = &previous {
            if prev.centroids.len() < k {
                // warm start: previous centroids + farthest points
                let mut init = prev.centroids.clone();
                let centroid_sq: Vec<f64> =
                    init.iter().map(|c| row_norm_sq_dense(c)).collect();
                let mut dists: Vec<f64> = (0..data.rows.len())
                    .map(|i| {
                        (0..init.len())
                            .map(|j| {
                                dist_sq(&data.rows[i], data.norms[i], &init[j], centroid_sq[j])
                            })
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect();
                while init.len() < k {
                    let farthest = (0..data.rows.len())
                        .max_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap())
                        .expect("non-empty data");
                    let mut dense = vec![0.0; data.n_cols];
                    for &(col, w) in &data.rows[farthest] {
                        dense[col as usize] = w;
                    }
                    init.push(dense);
                    dists[farthest] = 0.0;
                }
                let run = lloyd(&data, init, max_iter);
                if best.as_ref().map_or(true, |b| run.sse < b.sse) {
                    best = Some(run);
                }
            }
        }
        let run = best.expect("at least one run");
        out.push((k, run.sse));
        previous = Some(run);
    }
    Ok(out)
}

/// Per-cluster top-m terms by centroid coordinate, descending (ties to the
/// lower column index).
pub fn top_terms(
    result: &ClusterResult,
    vocab: &Vocabulary,
    m: usize,
) -> Vec<Vec<(String, f64)>> {
    result
        .centroids
        .iter()
        .map(|centroid| {
            let mut order: Vec<usize> = (0..centroid.len().min(vocab.len())).collect();
            order.sort_by(|&a, &b| {
                centroid[b]
                    .partial_cmp(&centroid[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| a.cmp(&b))
            });
            order
                .into_iter()
                .take(m)
                .map(|i| (vocab.terms[i].clone(), centroid[i]))
                .collect()
        })
        .collect()
}
