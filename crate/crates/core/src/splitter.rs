//! K-fold assignment: similarity-based stratified splitting (SBSS) and the
//! ordinary stratified K-fold baseline.
//!
//! SBSS walks the labels in canonical order. Within a label it repeatedly
//! takes the remaining sample with the smallest total distance to the other
//! remaining samples of that label (the pivot), gathers the `k - 1` remaining
//! samples closest to the pivot, shuffles that group and deals one member to
//! each fold. Similar samples therefore land in different folds, so every fold
//! sees every region of the input space.
//!
//! All randomness comes from one [`SplitRng`] per split, consumed in a fixed
//! order: labels in canonical order, groups in extraction order, one
//! Fisher-Yates pass per group. Grouping itself is seed independent.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LabelCounts};
use crate::error::{Error, Result};
use crate::manifest::RunManifest;
use crate::rng::SplitRng;
use crate::scalar::Scalar;
use crate::similarity::{DistanceMatrix, SimilarityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Sbss,
    Stratified,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sbss => "sbss",
            Strategy::Stratified => "stratified",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sbss" => Ok(Strategy::Sbss),
            "stratified" => Ok(Strategy::Stratified),
            _ => Err(Error::InvalidArgument(format!(
                "unknown strategy {s:?}; expected sbss or stratified"
            ))),
        }
    }
}

/// How the non-pivot members of a similarity group are chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupCriterion {
    /// The `k - 1` candidates nearest to the pivot.
    #[default]
    Pivot,
    /// Greedy: each next member minimizes its summed distance to the members
    /// picked so far.
    PickedSet,
}

impl fmt::Display for GroupCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupCriterion::Pivot => "pivot",
            GroupCriterion::PickedSet => "picked-set",
        })
    }
}

impl FromStr for GroupCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pivot" => Ok(GroupCriterion::Pivot),
            "picked-set" => Ok(GroupCriterion::PickedSet),
            _ => Err(Error::InvalidArgument(format!(
                "unknown group criterion {s:?}; expected pivot or picked-set"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitConfig {
    pub k: usize,
    pub strategy: Strategy,
    /// Only consulted by [`Strategy::Sbss`].
    pub kind: SimilarityKind,
    pub seed: u64,
    pub criterion: GroupCriterion,
}

impl SplitConfig {
    pub fn new(k: usize, strategy: Strategy, kind: SimilarityKind, seed: u64) -> Self {
        SplitConfig {
            k,
            strategy,
            kind,
            seed,
            criterion: GroupCriterion::Pivot,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SplitConfig { seed, ..self }
    }

    pub fn with_criterion(self, criterion: GroupCriterion) -> Self {
        SplitConfig { criterion, ..self }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 || self.k > n {
            return Err(Error::FoldCount { k: self.k, n });
        }
        Ok(())
    }
}

/// A pivot and its nearest same-label companions, in selection order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimilarityGroup {
    pub label: usize,
    pub members: Vec<usize>,
    pub pivot: usize,
}

/// A partition of `0..n` into `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    folds: Vec<Vec<usize>>,
    fold_of: Vec<usize>,
    pub strategy: Strategy,
    /// `None` for the stratified baseline, which ignores features.
    pub kind: Option<SimilarityKind>,
    pub seed: u64,
}

impl FoldAssignment {
    /// Validate that `folds` partitions `0..n` and build the reverse map.
    /// Each fold is stored sorted ascending.
    pub fn from_folds(
        mut folds: Vec<Vec<usize>>,
        n: usize,
        strategy: Strategy,
        kind: Option<SimilarityKind>,
        seed: u64,
    ) -> Result<Self> {
        let mut fold_of = vec![usize::MAX; n];
        for (f, fold) in folds.iter_mut().enumerate() {
            fold.sort_unstable();
            for &i in fold.iter() {
                if i >= n {
                    return Err(Error::InvalidFolds(format!(
                        "index {i} out of range for {n} samples"
                    )));
                }
                if fold_of[i] != usize::MAX {
                    return Err(Error::InvalidFolds(format!(
                        "sample {i} appears in folds {} and {f}",
                        fold_of[i]
                    )));
                }
                fold_of[i] = f;
            }
        }
        if let Some(i) = fold_of.iter().position(|&f| f == usize::MAX) {
            return Err(Error::InvalidFolds(format!(
                "sample {i} is not assigned to any fold"
            )));
        }
        Ok(FoldAssignment {
            folds,
            fold_of,
            strategy,
            kind,
            seed,
        })
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn n_samples(&self) -> usize {
        self.fold_of.len()
    }

    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    pub fn fold(&self, f: usize) -> &[usize] {
        &self.folds[f]
    }

    pub fn fold_of(&self, i: usize) -> usize {
        self.fold_of[i]
    }

    /// Indices outside fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| self.fold_of[i] != f)
            .collect()
    }

    /// `counts[label][fold]`.
    pub fn label_fold_counts(&self, labels: &[usize], n_labels: usize) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0usize; self.k()]; n_labels];
        for (i, &f) in self.fold_of.iter().enumerate() {
            counts[labels[i]][f] += 1;
        }
        counts
    }

    /// Checks that every label's per-fold counts differ by at most one.
    pub fn check_stratified(&self, labels: &[usize], n_labels: usize) -> Result<()> {
        if labels.len() != self.n_samples() {
            return Err(Error::InvalidFolds(format!(
                "{} labels for {} samples",
                labels.len(),
                self.n_samples()
            )));
        }
        for (label, per_fold) in self.label_fold_counts(labels, n_labels).iter().enumerate() {
            let lo = per_fold.iter().min().copied().unwrap_or(0);
            let hi = per_fold.iter().max().copied().unwrap_or(0);
            if hi - lo > 1 {
                return Err(Error::InvalidFolds(format!(
                    "label {label} fold counts {per_fold:?} differ by more than one"
                )));
            }
        }
        Ok(())
    }

    pub fn to_fold_file(&self, dataset: &str) -> FoldFile {
        FoldFile {
            dataset: dataset.to_string(),
            strategy: self.strategy,
            kind: self.kind,
            k: self.k(),
            seed: self.seed,
            folds: self.folds.clone(),
            manifest: None,
        }
    }
}

/// On-disk fold assignment, the hand-off between `split` and `evaluate`.
/// Indices are zero-based data rows of the input CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldFile {
    pub dataset: String,
    pub strategy: Strategy,
    pub kind: Option<SimilarityKind>,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
}

impl FoldFile {
    pub fn into_assignment(self, n: usize) -> Result<FoldAssignment> {
        if self.folds.len() != self.k {
            return Err(Error::InvalidFolds(format!(
                "k={} but {} folds listed",
                self.k,
                self.folds.len()
            )));
        }
        FoldAssignment::from_folds(self.folds, n, self.strategy, self.kind, self.seed)
    }
}

/// The candidate with the smallest summed distance to the other candidates.
/// Ties go to the lowest sample index.
pub fn select_pivot<T: Scalar>(m: &DistanceMatrix<T>, candidates: &[usize]) -> Result<usize> {
    match candidates {
        [] => Err(Error::NoCandidates),
        [only] => Ok(*only),
        _ => {
            let sums: Vec<T> = candidates
                .par_iter()
                .map(|&i| {
                    let row = m.row(i);
                    candidates
                        .iter()
                        .filter(|&&j| j != i)
                        .map(|&j| row[j])
                        .sum()
                })
                .collect();
            Ok(argmin_by_index(candidates.iter().copied().zip(sums)).expect("nonempty"))
        }
    }
}

/// Lowest value, then lowest index.
fn argmin_by_index<T: Scalar>(items: impl Iterator<Item = (usize, T)>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in items {
        best = match best {
            Some((bi, bv)) if bv < v || (bv == v && bi < i) => Some((bi, bv)),
            _ => Some((i, v)),
        };
    }
    best.map(|(i, _)| i)
}

/// The pivot plus the `group_size - 1` candidates nearest to it, ties by
/// lowest sample index. Members are listed in selection order, pivot first.
pub fn select_group<T: Scalar>(
    m: &DistanceMatrix<T>,
    label: usize,
    pivot: usize,
    candidates: &[usize],
    group_size: usize,
) -> Result<SimilarityGroup> {
    select_group_with(
        m,
        label,
        pivot,
        candidates,
        group_size,
        GroupCriterion::Pivot,
    )
}

pub fn select_group_with<T: Scalar>(
    m: &DistanceMatrix<T>,
    label: usize,
    pivot: usize,
    candidates: &[usize],
    group_size: usize,
    criterion: GroupCriterion,
) -> Result<SimilarityGroup> {
    if !candidates.contains(&pivot) {
        return Err(Error::InvalidArgument(format!(
            "pivot {pivot} is not a candidate"
        )));
    }
    if group_size == 0 || group_size > candidates.len() {
        return Err(Error::GroupTooLarge {
            requested: group_size,
            available: candidates.len(),
        });
    }
    let mut members = Vec::with_capacity(group_size);
    members.push(pivot);
    let mut rest: Vec<usize> = candidates.iter().copied().filter(|&c| c != pivot).collect();
    match criterion {
        GroupCriterion::Pivot => {
            let row = m.row(pivot);
            rest.sort_by(|&a, &b| {
                row[a]
                    .partial_cmp(&row[b])
                    .expect("finite distances")
                    .then(a.cmp(&b))
            });
            members.extend_from_slice(&rest[..group_size - 1]);
        }
        GroupCriterion::PickedSet => {
            let mut acc: Vec<T> = vec![T::zero(); rest.len()];
            for _ in 1..group_size {
                let last = *members.last().unwrap();
                for (s, &c) in acc.iter_mut().zip(&rest) {
                    *s = *s + m.get(last, c);
                }
                let pick = argmin_by_index(rest.iter().copied().zip(acc.iter().copied()))
                    .expect("nonempty");
                let pos = rest.iter().position(|&c| c == pick).unwrap();
                rest.remove(pos);
                acc.remove(pos);
                members.push(pick);
            }
        }
    }
    Ok(SimilarityGroup {
        label,
        members,
        pivot,
    })
}

/// Similarity-based stratified K-fold split.
pub fn sbss_split<T: Scalar>(
    ds: &Dataset<T>,
    m: &DistanceMatrix<T>,
    cfg: &SplitConfig,
) -> Result<FoldAssignment> {
    sbss_split_traced(ds, m, cfg).map(|(fa, _)| fa)
}

/// [`sbss_split`], also returning the similarity groups in extraction order.
pub fn sbss_split_traced<T: Scalar>(
    ds: &Dataset<T>,
    m: &DistanceMatrix<T>,
    cfg: &SplitConfig,
) -> Result<(FoldAssignment, Vec<SimilarityGroup>)> {
    let n = ds.n_samples();
    cfg.validate(n)?;
    if m.len() != n {
        return Err(Error::Shape(format!(
            "distance matrix is {}x{0} but dataset has {n} samples",
            m.len()
        )));
    }
    if m.kind() != cfg.kind {
        return Err(Error::InvalidArgument(format!(
            "distance matrix was computed with {} but the split asks for {}",
            m.kind(),
            cfg.kind
        )));
    }
    let k = cfg.k;
    let mut rng = SplitRng::new(cfg.seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut groups = Vec::new();

    for (label, mut remaining) in ds.indices_by_label().into_iter().enumerate() {
        let mut per_fold = vec![0usize; k];
        while !remaining.is_empty() {
            let size = k.min(remaining.len());
            let pivot = select_pivot(m, &remaining)?;
            let group = select_group_with(m, label, pivot, &remaining, size, cfg.criterion)?;

            let mut dealt = group.members.clone();
            rng.shuffle(&mut dealt);
            let targets: Vec<usize> = if size == k {
                (0..k).collect()
            } else {
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by_key(|&f| (per_fold[f], f));
                let mut chosen = order[..size].to_vec();
                chosen.sort_unstable();
                chosen
            };
            for (&sample, &f) in dealt.iter().zip(&targets) {
                folds[f].push(sample);
                per_fold[f] += 1;
            }
            remaining.retain(|i| !group.members.contains(i));
            groups.push(group);
        }
    }
    let fa = FoldAssignment::from_folds(folds, n, Strategy::Sbss, Some(cfg.kind), cfg.seed)?;
    Ok((fa, groups))
}

/// Ordinary stratified K-fold: each label's indices are shuffled and dealt
/// round-robin, the dealing cursor carrying over from one label to the next.
pub fn stratified_kfold_split<T: Scalar>(
    ds: &Dataset<T>,
    cfg: &SplitConfig,
) -> Result<FoldAssignment> {
    let n = ds.n_samples();
    cfg.validate(n)?;
    let mut rng = SplitRng::new(cfg.seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); cfg.k];
    let mut cursor = 0;
    for mut members in ds.indices_by_label() {
        rng.shuffle(&mut members);
        for i in members {
            folds[cursor].push(i);
            cursor = (cursor + 1) % cfg.k;
        }
    }
    FoldAssignment::from_folds(folds, n, Strategy::Stratified, None, cfg.seed)
}

/// Dispatch on `cfg.strategy`. `m` is required for SBSS.
pub fn split<T: Scalar>(
    ds: &Dataset<T>,
    m: Option<&DistanceMatrix<T>>,
    cfg: &SplitConfig,
) -> Result<FoldAssignment> {
    match cfg.strategy {
        Strategy::Sbss => {
            let m =
                m.ok_or_else(|| Error::InvalidArgument("SBSS needs a distance matrix".into()))?;
            sbss_split(ds, m, cfg)
        }
        Strategy::Stratified => stratified_kfold_split(ds, cfg),
    }
}

/// Fold sizes either strategy will produce for these label counts. They do
/// not depend on the seed, which lets callers validate classifier settings
/// before any splitting happens.
pub fn expected_fold_sizes(counts: &LabelCounts, k: usize, strategy: Strategy) -> Vec<usize> {
    let mut sizes = vec![0usize; k];
    match strategy {
        Strategy::Sbss => {
            for &c in counts.counts() {
                for (f, s) in sizes.iter_mut().enumerate() {
                    *s += c / k + usize::from(f < c % k);
                }
            }
        }
        Strategy::Stratified => {
            let n = counts.total();
            for (f, s) in sizes.iter_mut().enumerate() {
                *s = n / k + usize::from(f < n % k);
            }
        }
    }
    sizes
}
