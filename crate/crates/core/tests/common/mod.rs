//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use sbss::rng::SplitRng;
use sbss::{Dataset64, FoldAssignment, SimilarityKind};

pub fn uniform(rng: &mut SplitRng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Textbook formulas, evaluated with plain loops.
pub fn naive_distance(kind: SimilarityKind, u: &[f64], v: &[f64]) -> f64 {
    let d = u.len();
    match kind {
        SimilarityKind::Chebyshev => {
            let mut m = 0.0f64;
            for i in 0..d {
                m = m.max((u[i] - v[i]).abs());
            }
            m
        }
        SimilarityKind::Cityblock => {
            let mut s = 0.0;
            for i in 0..d {
                s += (u[i] - v[i]).abs();
            }
            s
        }
        SimilarityKind::Euclidean => {
            let mut s = 0.0;
            for i in 0..d {
                s += (u[i] - v[i]).powi(2);
            }
            s.sqrt()
        }
        SimilarityKind::Cosine => {
            let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
            for i in 0..d {
                dot += u[i] * v[i];
                nu += u[i] * u[i];
                nv += v[i] * v[i];
            }
            1.0 - dot / (nu.sqrt() * nv.sqrt())
        }
        SimilarityKind::Correlation => {
            let mu = u.iter().sum::<f64>() / d as f64;
            let mv = v.iter().sum::<f64>() / d as f64;
            let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
            for i in 0..d {
                dot += (u[i] - mu) * (v[i] - mv);
                nu += (u[i] - mu).powi(2);
                nv += (v[i] - mv).powi(2);
            }
            1.0 - dot / (nu.sqrt() * nv.sqrt())
        }
    }
}

/// `(W, p)` by walking all `2^n` sign assignments of the nonzero
/// differences' average ranks.
pub fn brute_force_wilcoxon(diffs: &[f64]) -> (f64, f64) {
    let nz: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nz.len();
    if n == 0 {
        return (0.0, 1.0);
    }
    let ranks: Vec<f64> = nz
        .iter()
        .map(|x| {
            let less = nz.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let equal = nz.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let w_plus: f64 = ranks
        .iter()
        .zip(&nz)
        .filter(|(_, &d)| d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let w = w_plus.min(total - w_plus);
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if s.min(total - s) <= w {
            extreme += 1;
        }
    }
    (w, extreme as f64 / (1u64 << n) as f64)
}

/// KNN by fully sorting every training distance.
pub fn brute_force_knn(train: &[Vec<f64>], labels: &[usize], query: &[f64], k: usize) -> usize {
    let mut all: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| (naive_distance(SimilarityKind::Euclidean, row, query), i))
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nearest = &all[..k];
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for &(_, i) in nearest {
        *votes.entry(labels[i]).or_default() += 1;
    }
    let top = *votes.values().max().unwrap();
    nearest
        .iter()
        .map(|&(_, i)| labels[i])
        .find(|l| votes[l] == top)
        .unwrap()
}

/// Random dataset with `n` rows, `d` uniform features and labels drawn so
/// that each of `n_labels` labels occurs at least once.
pub fn random_dataset(rng: &mut SplitRng, n: usize, d: usize, n_labels: usize) -> Dataset64 {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| uniform(rng)).collect())
        .collect();
    let labels: Vec<String> = (0..n)
        .map(|i| {
            let l = if i < n_labels {
                i
            } else {
                rng.below(n_labels as u64) as usize
            };
            format!("c{l}")
        })
        .collect();
    Dataset64::new("random", rows, labels).unwrap()
}

/// Partition + per-label balance, checked from raw fold lists.
pub fn check_partition_and_strata(folds: &[Vec<usize>], labels: &[usize]) -> Result<(), String> {
    let n = labels.len();
    let mut seen = BTreeSet::new();
    for fold in folds {
        for &i in fold {
            if i >= n || !seen.insert(i) {
                return Err(format!("index {i} duplicated or out of range"));
            }
        }
    }
    if seen.len() != n {
        return Err(format!("{} of {n} samples covered", seen.len()));
    }
    let n_labels = labels.iter().max().unwrap() + 1;
    for l in 0..n_labels {
        let per_fold: Vec<usize> = folds
            .iter()
            .map(|f| f.iter().filter(|&&i| labels[i] == l).count())
            .collect();
        if per_fold.iter().max().unwrap() - per_fold.iter().min().unwrap() > 1 {
            return Err(format!("label {l} per-fold counts {per_fold:?}"));
        }
    }
    Ok(())
}

pub fn fold_lists(fa: &FoldAssignment) -> Vec<Vec<usize>> {
    fa.folds().to_vec()
}
