//! Cross-validation with the built-in KNN classifier and the repeated
//! K-fold experiment harness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::knn::{KnnConfig, KnnModel};
use crate::manifest::RunManifest;
use crate::scalar::Scalar;
use crate::similarity::{pairwise_matrix, DistanceMatrix, SimilarityKind};
use crate::splitter::{
    expected_fold_sizes, split, FoldAssignment, GroupCriterion, SplitConfig, Strategy,
};
use crate::stats::PairedSeries;

/// Percentage of positions where `predicted` equals `truth`.
pub fn accuracy<L: PartialEq>(predicted: &[L], truth: &[L]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument(
            "accuracy of an empty sequence".into(),
        ));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * hits as f64 / predicted.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub train_acc: f64,
    pub test_acc: f64,
}

/// Train on every fold but `f`, score on the training part and on `f`.
pub fn cross_validate<T: Scalar>(
    ds: &Dataset<T>,
    fa: &FoldAssignment,
    cfg: KnnConfig,
) -> Result<Vec<FoldScore>> {
    if fa.n_samples() != ds.n_samples() {
        return Err(Error::InvalidFolds(format!(
            "fold assignment covers {} samples, dataset has {}",
            fa.n_samples(),
            ds.n_samples()
        )));
    }
    if let Some(f) = fa.folds().iter().position(Vec::is_empty) {
        return Err(Error::EmptyFold(f));
    }
    (0..fa.k())
        .map(|f| {
            let train = fa.train_indices(f);
            let test = fa.fold(f);
            let train_labels: Vec<usize> = train.iter().map(|&i| ds.label(i)).collect();
            let model = KnnModel::fit(train.iter().map(|&i| ds.row(i)), &train_labels, cfg)?;
            let score = |idx: &[usize]| -> Result<f64> {
                let predicted = model.predict_many(idx.par_iter().map(|&i| ds.row(i)))?;
                let truth: Vec<usize> = idx.iter().map(|&i| ds.label(i)).collect();
                accuracy(&predicted, &truth)
            };
            Ok(FoldScore {
                train_acc: score(&train)?,
                test_acc: score(test)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub k: usize,
    pub strategy: Strategy,
    pub kind: SimilarityKind,
    pub repetitions: usize,
    pub base_seed: u64,
    pub knn: KnnConfig,
    pub criterion: GroupCriterion,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 10,
            strategy: Strategy::Sbss,
            kind: SimilarityKind::Correlation,
            repetitions: 10,
            base_seed: 0,
            knn: KnnConfig::default(),
            criterion: GroupCriterion::Pivot,
        }
    }
}

impl ExperimentConfig {
    pub fn with_strategy(self, strategy: Strategy) -> Self {
        ExperimentConfig { strategy, ..self }
    }

    pub fn split_config(&self, repetition: usize) -> SplitConfig {
        SplitConfig::new(self.k, self.strategy, self.kind, self.seed_for(repetition))
            .with_criterion(self.criterion)
    }

    /// Repetition `r` splits with `base_seed + r`, so two strategies run with
    /// the same base seed pair up repetition by repetition.
    pub fn seed_for(&self, repetition: usize) -> u64 {
        self.base_seed.wrapping_add(repetition as u64)
    }

    /// Reject settings that cannot work on `ds` before any distance or
    /// classifier work starts.
    pub fn validate<T: Scalar>(&self, ds: &Dataset<T>) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument(
                "repetitions must be at least 1".into(),
            ));
        }
        if self.knn.n_neighbors == 0 {
            return Err(Error::InvalidArgument(
                "n_neighbors must be at least 1".into(),
            ));
        }
        let n = ds.n_samples();
        self.split_config(0).validate(n)?;
        let largest_fold = expected_fold_sizes(&ds.label_counts(), self.k, self.strategy)
            .into_iter()
            .max()
            .unwrap_or(0);
        let smallest_train = n - largest_fold;
        if self.knn.n_neighbors > smallest_train {
            return Err(Error::TooManyNeighbors {
                n_neighbors: self.knn.n_neighbors,
                train_size: smallest_train,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnSection {
    pub n_neighbors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub seed: u64,
    pub folds: Vec<FoldScore>,
    pub mean_train: f64,
    pub mean_test: f64,
    /// Population std over this repetition's folds.
    pub std_train: f64,
    pub std_test: f64,
}

impl RepetitionResult {
    fn new(seed: u64, folds: Vec<FoldScore>) -> Self {
        let train: Vec<f64> = folds.iter().map(|f| f.train_acc).collect();
        let test: Vec<f64> = folds.iter().map(|f| f.test_acc).collect();
        let (mean_train, std_train) = mean_std(&train);
        let (mean_test, std_test) = mean_std(&test);
        RepetitionResult {
            seed,
            folds,
            mean_train,
            mean_test,
            std_train,
            std_test,
        }
    }
}

/// Repeated K-fold results.
///
/// `mean_*`/`std_*` are over the per-repetition means (population std).
/// `fold_std_*` average the within-repetition fold stds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub fingerprint: String,
    pub strategy: Strategy,
    pub kind: Option<SimilarityKind>,
    pub k: usize,
    pub repetitions: usize,
    pub knn: KnnSection,
    pub per_rep: Vec<RepetitionResult>,
    pub mean_train: f64,
    pub std_train: f64,
    pub mean_test: f64,
    pub std_test: f64,
    pub fold_std_train: f64,
    pub fold_std_test: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
}

impl EvaluationReport {
    pub fn from_repetitions(
        ds_name: &str,
        fingerprint: &str,
        cfg: &ExperimentConfig,
        per_rep: Vec<RepetitionResult>,
    ) -> Self {
        let rep_train: Vec<f64> = per_rep.iter().map(|r| r.mean_train).collect();
        let rep_test: Vec<f64> = per_rep.iter().map(|r| r.mean_test).collect();
        let (mean_train, std_train) = mean_std(&rep_train);
        let (mean_test, std_test) = mean_std(&rep_test);
        let fold_std_train = mean_std(&per_rep.iter().map(|r| r.std_train).collect::<Vec<_>>()).0;
        let fold_std_test = mean_std(&per_rep.iter().map(|r| r.std_test).collect::<Vec<_>>()).0;
        EvaluationReport {
            dataset: ds_name.to_string(),
            fingerprint: fingerprint.to_string(),
            strategy: cfg.strategy,
            kind: match cfg.strategy {
                Strategy::Sbss => Some(cfg.kind),
                Strategy::Stratified => None,
            },
            k: cfg.k,
            repetitions: per_rep.len(),
            knn: KnnSection {
                n_neighbors: cfg.knn.n_neighbors,
            },
            per_rep,
            mean_train,
            std_train,
            mean_test,
            std_test,
            fold_std_train,
            fold_std_test,
            manifest: None,
        }
    }

    /// Short name for the compared configuration: the similarity kind for
    /// SBSS runs, the strategy name otherwise.
    pub fn variant(&self) -> String {
        match self.kind {
            Some(kind) => kind.to_string(),
            None => self.strategy.to_string(),
        }
    }
}

/// Population mean and standard deviation; `(0, 0)` for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Run `cfg.repetitions` rounds of split + cross-validate. The distance
/// matrix (SBSS only) is computed once and shared by every repetition.
pub fn run_experiment<T: Scalar>(
    ds: &Dataset<T>,
    cfg: &ExperimentConfig,
) -> Result<EvaluationReport> {
    cfg.validate(ds)?;
    let matrix = match cfg.strategy {
        Strategy::Sbss => Some(pairwise_matrix(cfg.kind, ds)?),
        Strategy::Stratified => None,
    };
    run_experiment_with_matrix(ds, matrix.as_ref(), cfg)
}

pub fn run_experiment_with_matrix<T: Scalar>(
    ds: &Dataset<T>,
    matrix: Option<&DistanceMatrix<T>>,
    cfg: &ExperimentConfig,
) -> Result<EvaluationReport> {
    cfg.validate(ds)?;
    let per_rep = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| {
            let split_cfg = cfg.split_config(r);
            let fa = split(ds, matrix, &split_cfg)?;
            let folds = cross_validate(ds, &fa, cfg.knn)?;
            Ok(RepetitionResult::new(split_cfg.seed, folds))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport::from_repetitions(
        ds.name(),
        ds.fingerprint(),
        cfg,
        per_rep,
    ))
}

/// What each Wilcoxon pair is made of.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Per-repetition mean test accuracy.
    #[default]
    Repetition,
    /// Every (repetition, fold) test accuracy.
    Fold,
}

impl std::str::FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "repetition" => Ok(Pairing::Repetition),
            "fold" => Ok(Pairing::Fold),
            _ => Err(Error::InvalidArgument(format!(
                "unknown pairing {s:?}; expected repetition or fold"
            ))),
        }
    }
}

/// Pair the test accuracies of two reports on the same data and protocol.
pub fn pair_reports(
    a: &EvaluationReport,
    b: &EvaluationReport,
    pairing: Pairing,
) -> Result<PairedSeries> {
    let mismatch = |what: &str| Err(Error::Incomparable(what.to_string()));
    if a.fingerprint != b.fingerprint {
        return mismatch("different dataset fingerprints");
    }
    if a.k != b.k {
        return mismatch("different k");
    }
    if a.repetitions != b.repetitions || a.per_rep.len() != b.per_rep.len() {
        return mismatch("different repetition counts");
    }
    if a.per_rep
        .iter()
        .zip(&b.per_rep)
        .any(|(x, y)| x.seed != y.seed)
    {
        return mismatch("different seed schedules");
    }
    if a.knn != b.knn {
        return mismatch("different classifier settings");
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = match pairing {
        Pairing::Repetition => a
            .per_rep
            .iter()
            .zip(&b.per_rep)
            .map(|(x, y)| (x.mean_test, y.mean_test))
            .unzip(),
        Pairing::Fold => a
            .per_rep
            .iter()
            .zip(&b.per_rep)
            .flat_map(|(x, y)| {
                x.folds
                    .iter()
                    .zip(&y.folds)
                    .map(|(p, q)| (p.test_acc, q.test_acc))
            })
            .unzip(),
    };
    let kind = if a.kind.is_some() || b.kind.is_none() {
        a.variant()
    } else {
        b.variant()
    };
    PairedSeries::new(xs, ys)?.with_context(&a.dataset, "knn", &kind)
}
