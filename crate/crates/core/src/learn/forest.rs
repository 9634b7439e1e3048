//! Random forest with Gini splitting, bootstrap sampling and per-node
//! feature subsampling. Per-tree seeds derive from the model seed, so
//! serial and parallel training build identical forests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::vectorize::{FeatureMatrix, SparseVec};
use crate::{Error, Result};

/// Features examined per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// floor(sqrt(n_cols)), at least 1.
    Sqrt,
    All,
    Fixed(usize),
}

impl Default for MaxFeatures {
    fn default() -> Self {
        MaxFeatures::Sqrt
    }
}

impl MaxFeatures {
    fn resolve(&self, n_cols: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((n_cols as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::All => n_cols.max(1),
            MaxFeatures::Fixed(k) => (*k).clamp(1, n_cols.max(1)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        pos: u32,
        total: u32,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// True when the leaf majority is positive (ties vote negative).
    fn vote(&self, x: &SparseVec) -> bool {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { pos, total } => return *pos * 2 > *total,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let value = match x.binary_search_by_key(feature, |e| e.0) {
                        Ok(i) => x[i].1,
                        Err(_) => 0.0,
                    };
                    at = if value <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Fraction of trees voting positive.
    pub fn score(&self, x: &SparseVec) -> f64 {
        let positive = self.trees.iter().filter(|t| t.vote(x)).count();
        positive as f64 / self.trees.len() as f64
    }
}

/// Gini impurity of a (pos, total) node.
fn gini(pos: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [bool],
    max_features: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn build(&mut self, rows: Vec<u32>, rng: &mut ChaCha12Rng) -> u32 {
        let pos = rows.iter().filter(|&&r| self.y[r as usize]).count() as u32;
        let total = rows.len() as u32;

        if pos == 0 || pos == total || total < 2 {
            self.nodes.push(Node::Leaf { pos, total });
            return (self.nodes.len() - 1) as u32;
        }

        // candidate features: walk a shuffled order until max_features
        // non-constant candidates have been scored (constant columns do
        // not count against the budget)
        let mut features: Vec<u32> = (0..self.x.n_cols as u32).collect();
        features.shuffle(rng);

        let parent_gini = gini(pos as f64, total as f64);
        let mut best: Option<(f64, u32, f64)> = None; // (decrease, feature, threshold)
        let mut scored = 0usize;
        let mut values: Vec<(f64, bool)> = Vec::with_capacity(rows.len());
        for &feature in &features {
            if scored >= self.max_features {
                break;
            }
            values.clear();
            for &r in &rows {
                values.push((self.x.get(r as usize, feature), self.y[r as usize]));
            }
            values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            if values[0].0 == values[values.len() - 1].0 {
                continue; // constant in this node
            }
            scored += 1;
            let mut left_pos = 0.0f64;
            let mut left_n = 0.0f64;
            let total_f = total as f64;
            let pos_f = pos as f64;
            for i in 0..values.len() - 1 {
                left_n += 1.0;
                if values[i].1 {
                    left_pos += 1.0;
                }
                if values[i].0 == values[i + 1].0 {
                    continue;
                }
                let right_n = total_f - left_n;
                let right_pos = pos_f - left_pos;
                let weighted = (left_n / total_f) * gini(left_pos, left_n)
                    + (right_n / total_f) * gini(right_pos, right_n);
                let decrease = parent_gini - weighted;
                let threshold = (values[i].0 + values[i + 1].0) / 2.0;
                let candidate = (decrease, feature, threshold);
                let better = match best {
                    None => true,
                    Some((bd, bf, bt)) => {
                        decrease > bd + 1e-15
                            || ((decrease - bd).abs() <= 1e-15
                                && (feature < bf || (feature == bf && threshold < bt)))
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }

        match best {
            // splits with zero decrease still partition the node, which is
            // what lets depth >= 2 interactions resolve
            Some((decrease, feature, threshold)) if decrease >= 0.0 => {
                let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
                    .iter()
                    .partition(|&&r| self.x.get(r as usize, feature) <= threshold);
                debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
                let placeholder = self.nodes.len();
                self.nodes.push(Node::Leaf { pos, total });
                let left = self.build(left_rows, rng);
                let right = self.build(right_rows, rng);
                self.nodes[placeholder] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                placeholder as u32
            }
            _ => {
                self.nodes.push(Node::Leaf { pos, total });
                (self.nodes.len() - 1) as u32
            }
        }
    }
}

fn tree_seed(base: u64, index: usize) -> u64 {
    // splitmix64 step keeps per-tree streams independent
    let mut z = base ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn train_forest(
    x: &FeatureMatrix,
    y: &[bool],
    n_trees: usize,
    max_features: MaxFeatures,
    bootstrap: bool,
    seed: u64,
) -> Result<ForestModel> {
    assert_eq!(x.n_rows, y.len());
    if n_trees < 1 {
        return Err(Error::Config("random forest needs at least one tree".into()));
    }
    if x.n_rows == 0 {
        return Err(Error::Training("empty training set".into()));
    }
    let resolved_max = max_features.resolve(x.n_cols);
    let trees: Vec<Tree> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(tree_seed(seed, t));
            let rows: Vec<u32> = if bootstrap {
                (0..x.n_rows)
                    .map(|_| rng.random_range(0..x.n_rows) as u32)
                    .collect()
            } else {
                (0..x.n_rows as u32).collect()
            };
            let mut builder = Builder {
                x,
                y,
                max_features: resolved_max,
                nodes: Vec::new(),
            };
            builder.build(rows, &mut rng);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();
    Ok(ForestModel {
        n_features: x.n_cols,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::{ColumnMeta, ColumnOrigin};

    fn matrix(dense: &[Vec<f64>]) -> FeatureMatrix {
        let n_cols = dense.first().map_or(0, Vec::len);
        FeatureMatrix {
            n_rows: dense.len(),
            n_cols,
            rows: dense
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(i, v)| (i as u32, *v))
                        .collect()
                })
                .collect(),
            columns: (0..n_cols)
                .map(|i| ColumnMeta {
                    name: format!("c{i}"),
                    origin: ColumnOrigin::Term,
                })
                .collect(),
        }
    }

    fn sparse(row: &[f64]) -> SparseVec {
        row.iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .collect()
    }

    #[test]
    fn gini_endpoints() {
        assert_eq!(gini(5.0, 10.0), 0.5);
        assert_eq!(gini(10.0, 10.0), 0.0);
        assert_eq!(gini(0.0, 10.0), 0.0);
    }

    #[test]
    fn single_tree_pure_split_reaches_training_accuracy_one() {
        let dense: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![if i < 5 { 0.0 } else { 1.0 }, 0.3])
            .collect();
        let y: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let x = matrix(&dense);
        let model = train_forest(&x, &y, 1, MaxFeatures::All, false, 1).unwrap();
        for (row, want) in dense.iter().zip(&y) {
            let score = model.score(&sparse(row));
            assert_eq!(score >= 0.5, *want);
        }
    }

    #[test]
    fn xor_data_needs_depth_two_and_succeeds() {
        let mut dense = Vec::new();
        let mut y = Vec::new();
        for _rep in 0..10 {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                dense.push(vec![a, b]);
                y.push((a > 0.5) ^ (b > 0.5));
            }
        }
        let x = matrix(&dense);
        let model = train_forest(&x, &y, 100, MaxFeatures::Sqrt, true, 7).unwrap();
        let correct = dense
            .iter()
            .zip(&y)
            .filter(|(row, want)| (model.score(&sparse(row)) >= 0.5) == **want)
            .count();
        assert_eq!(correct, dense.len(), "training accuracy must be 1.0");
    }

    #[test]
    fn all_positive_leaves_score_one() {
        let dense: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let y = vec![false, false, false, true, true, true];
        let x = matrix(&dense);
        let model = train_forest(&x, &y, 25, MaxFeatures::All, false, 3).unwrap();
        assert_eq!(model.score(&sparse(&[5.0])), 1.0);
        assert_eq!(model.score(&sparse(&[0.0])), 0.0);
    }

    #[test]
    fn forest_training_is_seed_deterministic_across_thread_counts() {
        let mut dense = Vec::new();
        let mut y = Vec::new();
        let mut rng = <ChaCha12Rng as SeedableRng>::seed_from_u64(2);
        for _ in 0..40 {
            let a: f64 = rng.random_range(0.0..1.0);
            let b: f64 = rng.random_range(0.0..1.0);
            dense.push(vec![a, b]);
            y.push(a + b > 1.0);
        }
        let x = matrix(&dense);
        let reference = train_forest(&x, &y, 16, MaxFeatures::Sqrt, true, 99).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| train_forest(&x, &y, 16, MaxFeatures::Sqrt, true, 99).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(7)
            .build()
            .unwrap()
            .install(|| train_forest(&x, &y, 16, MaxFeatures::Sqrt, true, 99).unwrap());
        let as_json = |m: &ForestModel| serde_json::to_string(m).unwrap();
        assert_eq!(as_json(&reference), as_json(&single));
        assert_eq!(as_json(&reference), as_json(&many));
    }
}
