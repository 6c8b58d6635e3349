//! Brute-force k-nearest-neighbors classifier with frozen tie rules.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub n_neighbors: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { n_neighbors: 5 }
    }
}

/// Lazy learner: keeps the training rows verbatim.
///
/// Neighbors are ranked by Euclidean distance, ties broken by training
/// position. The majority label wins; when several labels tie on votes, the
/// one whose closest neighbor ranks first wins (which is the nearest
/// neighbor's label whenever that label is among the tied ones).
#[derive(Debug, Clone)]
pub struct KnnModel<T> {
    d: usize,
    features: Vec<T>,
    labels: Vec<usize>,
    n_label_slots: usize,
    n_neighbors: usize,
}

impl<T: Scalar> KnnModel<T> {
    pub fn fit<'a>(
        rows: impl IntoIterator<Item = &'a [T]>,
        labels: &[usize],
        cfg: KnnConfig,
    ) -> Result<Self> {
        let mut features = Vec::new();
        let mut d = None;
        let mut n = 0;
        for row in rows {
            match d {
                None => d = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(Error::DimensionMismatch {
                        left: d,
                        right: row.len(),
                    })
                }
                _ => {}
            }
            features.extend_from_slice(row);
            n += 1;
        }
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if labels.len() != n {
            return Err(Error::Shape(format!(
                "{n} training rows but {} labels",
                labels.len()
            )));
        }
        if cfg.n_neighbors == 0 {
            return Err(Error::InvalidArgument(
                "n_neighbors must be at least 1".into(),
            ));
        }
        if cfg.n_neighbors > n {
            return Err(Error::TooManyNeighbors {
                n_neighbors: cfg.n_neighbors,
                train_size: n,
            });
        }
        Ok(KnnModel {
            d: d.unwrap(),
            features,
            labels: labels.to_vec(),
            n_label_slots: labels.iter().max().map_or(0, |&m| m + 1),
            n_neighbors: cfg.n_neighbors,
        })
    }

    pub fn n_train(&self) -> usize {
        self.labels.len()
    }

    /// The `n_neighbors` nearest training positions with their distances,
    /// nearest first.
    pub fn neighbors(&self, query: &[T]) -> Result<Vec<(T, usize)>> {
        if query.len() != self.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: query.len(),
            });
        }
        let mut dists: Vec<(T, usize)> = self
            .features
            .chunks_exact(self.d)
            .enumerate()
            .map(|(i, row)| (euclidean(row, query), i))
            .collect();
        let cmp = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        };
        let k = self.n_neighbors;
        if k < dists.len() {
            dists.select_nth_unstable_by(k - 1, cmp);
            dists.truncate(k);
        }
        dists.sort_unstable_by(cmp);
        Ok(dists)
    }

    pub fn predict(&self, query: &[T]) -> Result<usize> {
        let neighbors = self.neighbors(query)?;
        let mut votes = vec![0usize; self.n_label_slots];
        for &(_, i) in &neighbors {
            votes[self.labels[i]] += 1;
        }
        let top = votes.iter().copied().max().unwrap_or(0);
        let winner = neighbors
            .iter()
            .map(|&(_, i)| self.labels[i])
            .find(|&l| votes[l] == top)
            .expect("at least one neighbor");
        Ok(winner)
    }

    pub fn predict_many<'a>(
        &self,
        queries: impl IntoParallelIterator<Item = &'a [T]>,
    ) -> Result<Vec<usize>> {
        queries.into_par_iter().map(|q| self.predict(q)).collect()
    }
}

fn euclidean<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter()
        .zip(v)
        .map(|(&a, &b)| {
            let t = a - b;
            t * t
        })
        .sum::<T>()
        .sqrt()
}
