//! Similarity-based stratified K-fold splitting.
//!
//! The crate splits a labelled dataset into `k` folds so that samples that
//! are close in feature space and share a label end up in different folds,
//! and ships everything needed to compare that split against ordinary
//! stratified K-fold: min-max normalization, five distance functions, a KNN
//! classifier, a repeated cross-validation harness and the Wilcoxon
//! signed-rank test.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the element type for the common double precision case.
//!
//! ```
//! use sbss::{pairwise_matrix, sbss_split, Dataset64, SimilarityKind, SplitConfig, Strategy};
//!
//! let rows = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
//! let ds = Dataset64::new("line", rows, vec!["a".to_string(); 4]).unwrap();
//! let m = pairwise_matrix(SimilarityKind::Euclidean, &ds).unwrap();
//! let folds = sbss_split(&ds, &m, &SplitConfig::new(2, Strategy::Sbss, SimilarityKind::Euclidean, 7)).unwrap();
//! assert_eq!(folds.k(), 2);
//! ```

pub mod data;
pub mod error;
pub mod eval;
pub mod knn;
pub mod manifest;
pub mod rng;
pub mod scalar;
pub mod similarity;
pub mod splitter;
pub mod stats;

pub use data::{
    imbalance, load_csv, normalize_minmax, Dataset, DatasetSummary, LabelColumn, LabelCounts,
};
pub use error::{Error, ErrorClass, Result};
pub use eval::{
    accuracy, cross_validate, pair_reports, run_experiment, run_experiment_with_matrix,
    EvaluationReport, ExperimentConfig, FoldScore, Pairing,
};
pub use knn::{KnnConfig, KnnModel};
pub use manifest::RunManifest;
pub use scalar::Scalar;
pub use similarity::{distance, pairwise_matrix, DistanceMatrix, SimilarityKind};
pub use splitter::{
    sbss_split, select_group, select_pivot, stratified_kfold_split, FoldAssignment, FoldFile,
    GroupCriterion, SimilarityGroup, SplitConfig, Strategy,
};
pub use stats::{
    score_comparisons, wilcoxon_signed_rank, ComparisonVerdict, Outcome, PairedSeries, ScoreTable,
};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type DistanceMatrix64 = DistanceMatrix<f64>;
pub type DistanceMatrix32 = DistanceMatrix<f32>;
pub type KnnModel64 = KnnModel<f64>;
pub type KnnModel32 = KnnModel<f32>;
