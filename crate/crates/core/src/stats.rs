//! Wilcoxon signed-rank comparisons and win/tie/loss score tables.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of nonzero differences handled by the exact null
/// distribution; above it the normal approximation is used.
pub const EXACT_LIMIT: usize = 20;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Two equally long series of paired measurements, `a` against `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSeries {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub dataset: String,
    pub model: String,
    pub kind: String,
}

impl PairedSeries {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Shape(format!(
                "paired series of lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.is_empty() {
            return Err(Error::InvalidArgument("paired series is empty".into()));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "paired series contains a non-finite value".into(),
            ));
        }
        Ok(PairedSeries {
            a,
            b,
            dataset: String::new(),
            model: String::new(),
            kind: String::new(),
        })
    }

    pub fn with_context(mut self, dataset: &str, model: &str, kind: &str) -> Result<Self> {
        self.dataset = dataset.to_string();
        self.model = model.to_string();
        self.kind = kind.to_string();
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn differences(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }

    pub fn swapped(&self) -> Self {
        PairedSeries {
            a: self.b.clone(),
            b: self.a.clone(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Loss,
    Tie,
    Win,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Win => "WIN",
            Outcome::Tie => "TIE",
            Outcome::Loss => "LOSS",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub dataset: String,
    pub model: String,
    pub kind: String,
    pub n_pairs: usize,
    pub n_effective: usize,
    #[serde(rename = "W")]
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub outcome: Outcome,
    /// Whether `p_value` comes from the exact null distribution.
    pub exact: bool,
}

impl ComparisonVerdict {
    pub fn summary_line(&self) -> String {
        format!("{} (p={:.6})", self.outcome, self.p_value)
    }
}

/// Signed ranks of the nonzero differences.
///
/// Ranks are kept doubled so average ranks of tied magnitudes stay integral:
/// positions `p..=q` (1-based) sharing a magnitude each get `p + q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedRanks {
    pub doubled: Vec<u64>,
    pub positive: Vec<bool>,
    /// Sizes of groups of tied magnitudes.
    pub tie_sizes: Vec<usize>,
}

impl SignedRanks {
    pub fn from_differences(diffs: &[f64]) -> Self {
        let mut nz: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
        nz.sort_by(|x, y| x.abs().partial_cmp(&y.abs()).expect("finite differences"));
        let mut doubled = vec![0u64; nz.len()];
        let mut tie_sizes = Vec::new();
        let mut start = 0;
        while start < nz.len() {
            let mut end = start;
            while end + 1 < nz.len() && nz[end + 1].abs() == nz[start].abs() {
                end += 1;
            }
            let rank2 = (start + 1 + end + 1) as u64;
            doubled[start..=end].fill(rank2);
            tie_sizes.push(end - start + 1);
            start = end + 1;
        }
        let positive = nz.iter().map(|&d| d > 0.0).collect();
        SignedRanks {
            doubled,
            positive,
            tie_sizes,
        }
    }

    pub fn len(&self) -> usize {
        self.doubled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doubled.is_empty()
    }

    /// Doubled `W+`.
    pub fn w_plus2(&self) -> u64 {
        self.doubled
            .iter()
            .zip(&self.positive)
            .filter(|(_, &p)| p)
            .map(|(r, _)| r)
            .sum()
    }

    /// Doubled `W+ + W-`, i.e. `n (n + 1)`.
    pub fn total2(&self) -> u64 {
        self.doubled.iter().sum()
    }
}

/// Number of sign assignments giving each doubled `W+` value.
///
/// Subset-sum counting over the doubled ranks: entry `s` counts the subsets
/// of ranks whose doubled sum is `s`, which is the number of the `2^n` sign
/// vectors with that `W+`. Ties are handled because the actual (averaged)
/// ranks are what get summed.
fn null_counts(doubled: &[u64]) -> Vec<u64> {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Two-sided exact p-value: the share of sign assignments whose
/// `min(W+, W-)` is at most the observed one.
fn exact_p(ranks: &SignedRanks, w2: u64) -> f64 {
    let total2 = ranks.total2();
    let counts = null_counts(&ranks.doubled);
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| (s as u64).min(total2 - s as u64) <= w2)
        .map(|(_, &c)| c)
        .sum();
    (extreme as f64 / (1u64 << ranks.len()) as f64).min(1.0)
}

/// Normal approximation with tie and continuity corrections.
fn normal_p(ranks: &SignedRanks, w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ranks
        .tie_sizes
        .iter()
        .map(|&t| (t * t * t - t) as f64)
        .sum::<f64>()
        / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    statrs::function::erf::erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-sided Wilcoxon signed-rank test of `a` against `b`.
///
/// Zero differences are dropped and tied magnitudes share their average rank.
/// With at most [`EXACT_LIMIT`] nonzero differences the p-value is exact;
/// otherwise it uses the normal approximation. The outcome is a win (loss)
/// when `p < alpha` and the differences sum to a positive (negative) value.
pub fn wilcoxon_signed_rank(s: &PairedSeries, alpha: f64) -> Result<ComparisonVerdict> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} outside [0, 1]"
        )));
    }
    if s.is_empty() || s.a.len() != s.b.len() {
        return Err(Error::InvalidArgument(
            "paired series must be nonempty and equally long".into(),
        ));
    }
    let diffs = s.differences();
    let ranks = SignedRanks::from_differences(&diffs);
    let verdict = |statistic: f64, p_value: f64, outcome: Outcome, exact: bool| ComparisonVerdict {
        dataset: s.dataset.clone(),
        model: s.model.clone(),
        kind: s.kind.clone(),
        n_pairs: s.len(),
        n_effective: ranks.len(),
        statistic,
        p_value,
        alpha,
        outcome,
        exact,
    };
    if ranks.is_empty() {
        return Ok(verdict(0.0, 1.0, Outcome::Tie, true));
    }
    let w_plus2 = ranks.w_plus2();
    let w2 = w_plus2.min(ranks.total2() - w_plus2);
    let statistic = w2 as f64 / 2.0;
    let exact = ranks.len() <= EXACT_LIMIT;
    let p_value = if exact {
        exact_p(&ranks, w2)
    } else {
        normal_p(&ranks, statistic)
    };
    let direction: f64 = diffs.iter().sum();
    let outcome = if p_value < alpha && direction > 0.0 {
        Outcome::Win
    } else if p_value < alpha && direction < 0.0 {
        Outcome::Loss
    } else {
        Outcome::Tie
    };
    Ok(verdict(statistic, p_value, outcome, exact))
}

/// Win/tie/loss counts for one group of comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub model: String,
    pub kind: String,
    pub losses: usize,
    pub ties: usize,
    pub wins: usize,
    pub total: usize,
    pub loss_pct: f64,
    pub tie_pct: f64,
    pub win_pct: f64,
}

impl ScoreRow {
    fn from_counts(model: &str, kind: &str, losses: usize, ties: usize, wins: usize) -> Self {
        let total = losses + ties + wins;
        let pct = |c: usize| {
            if total == 0 {
                0.0
            } else {
                100.0 * c as f64 / total as f64
            }
        };
        ScoreRow {
            model: model.to_string(),
            kind: kind.to_string(),
            losses,
            ties,
            wins,
            total,
            loss_pct: pct(losses),
            tie_pct: pct(ties),
            win_pct: pct(wins),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    /// One row per (model, kind), sorted.
    pub rows: Vec<ScoreRow>,
    pub total: ScoreRow,
}

impl ScoreTable {
    /// Aligned plain-text rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let width_model = self
            .rows
            .iter()
            .map(|r| r.model.len())
            .chain([5])
            .max()
            .unwrap();
        let width_kind = self
            .rows
            .iter()
            .map(|r| r.kind.len())
            .chain([10])
            .max()
            .unwrap();
        let _ = writeln!(
            out,
            "{:<wm$}  {:<wk$}  {:>6} {:>6} {:>6}  {:>7} {:>7} {:>7}",
            "model",
            "similarity",
            "losses",
            "ties",
            "wins",
            "loss%",
            "tie%",
            "win%",
            wm = width_model,
            wk = width_kind
        );
        for r in self.rows.iter().chain(std::iter::once(&self.total)) {
            let _ = writeln!(
                out,
                "{:<wm$}  {:<wk$}  {:>6} {:>6} {:>6}  {:>7.2} {:>7.2} {:>7.2}",
                r.model,
                r.kind,
                r.losses,
                r.ties,
                r.wins,
                r.loss_pct,
                r.tie_pct,
                r.win_pct,
                wm = width_model,
                wk = width_kind
            );
        }
        out
    }
}

/// Count outcomes per (model, kind) plus an overall total row.
pub fn score_comparisons(verdicts: &[ComparisonVerdict]) -> Result<ScoreTable> {
    if verdicts.is_empty() {
        return Err(Error::InvalidArgument("no verdicts to score".into()));
    }
    let mut groups: BTreeMap<(String, String), [usize; 3]> = BTreeMap::new();
    for v in verdicts {
        let slot = groups.entry((v.model.clone(), v.kind.clone())).or_default();
        slot[v.outcome as usize] += 1;
    }
    let mut totals = [0usize; 3];
    let rows = groups
        .into_iter()
        .map(|((model, kind), [l, t, w])| {
            totals[0] += l;
            totals[1] += t;
            totals[2] += w;
            ScoreRow::from_counts(&model, &kind, l, t, w)
        })
        .collect();
    Ok(ScoreTable {
        rows,
        total: ScoreRow::from_counts("all", "all", totals[0], totals[1], totals[2]),
    })
}
