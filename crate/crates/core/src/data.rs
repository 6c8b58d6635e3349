//! Tabular classification datasets: CSV ingestion, min-max normalization and
//! the entropy-based class imbalance measure.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// Zero-based column position.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
    #[default]
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(s) => write!(f, "{s:?}"),
            LabelColumn::Last => f.write_str("<last>"),
        }
    }
}

/// An `n x d` feature matrix with one categorical label per row.
///
/// Labels are opaque strings. They are interned as ids into `label_names`,
/// which is sorted lexicographically; that order is the canonical label order
/// every deterministic loop downstream iterates in.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    name: String,
    n: usize,
    d: usize,
    features: Vec<T>,
    feature_names: Vec<String>,
    label_column: String,
    labels: Vec<usize>,
    label_names: Vec<String>,
    fingerprint: String,
}

impl<T: Scalar> Dataset<T> {
    /// Build a dataset from rows and string labels, validating the shape and
    /// finiteness invariants.
    pub fn new(name: impl Into<String>, rows: Vec<Vec<T>>, labels: Vec<String>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::NoFeatures);
        }
        if labels.len() != n {
            return Err(Error::Shape(format!(
                "{n} feature rows but {} labels",
                labels.len()
            )));
        }
        let mut features = Vec::with_capacity(n * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: d,
                });
            }
            features.extend(row);
        }
        let feature_names = (0..d).map(|j| format!("x{j}")).collect();
        Self::from_parts(
            name.into(),
            n,
            d,
            features,
            feature_names,
            "label".into(),
            labels,
            None,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn from_parts(
        name: String,
        n: usize,
        d: usize,
        features: Vec<T>,
        feature_names: Vec<String>,
        label_column: String,
        labels: Vec<String>,
        fingerprint: Option<String>,
    ) -> Result<Self> {
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                column: pos % d,
            });
        }
        let label_names: Vec<String> = {
            let mut names = labels.clone();
            names.sort();
            names.dedup();
            names
        };
        let ids = labels
            .iter()
            .map(|l| label_names.binary_search(l).expect("label interned above"))
            .collect();
        let mut ds = Dataset {
            name,
            n,
            d,
            features,
            feature_names,
            label_column,
            labels: ids,
            label_names,
            fingerprint: String::new(),
        };
        ds.fingerprint = match fingerprint {
            Some(fp) => fp,
            None => {
                let mut buf = Vec::new();
                ds.write_csv(&mut buf)?;
                fingerprint_bytes(&buf)
            }
        };
        Ok(ds)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    pub fn n_labels(&self) -> usize {
        self.label_names.len()
    }

    /// Row-major feature storage.
    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.features.chunks_exact(self.d)
    }

    /// Label id per sample, indexing into [`Dataset::label_names`].
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Distinct labels in canonical (lexicographic) order.
    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// SHA-256 of the source CSV bytes, or of the canonical CSV rendering for
    /// datasets built in memory. Normalization keeps the source fingerprint.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Sample indices of each label, in canonical label order; indices ascend.
    pub fn indices_by_label(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_labels()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn label_counts(&self) -> LabelCounts {
        let mut counts = vec![0usize; self.n_labels()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        LabelCounts { counts }
    }

    /// Write the dataset as CSV with a header row, label last.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let csv_err = |e: csv::Error| Error::Csv {
            row: 0,
            message: e.to_string(),
        };
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_column);
        w.write_record(&header).map_err(csv_err)?;
        let mut record = Vec::with_capacity(self.d + 1);
        for (i, row) in self.rows().enumerate() {
            record.clear();
            record.extend(row.iter().map(|v| v.to_string()));
            record.push(self.label_names[self.labels[i]].clone());
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Csv {
            row: 0,
            message: e.to_string(),
        })?;
        Ok(())
    }

    pub fn summary(&self) -> Result<DatasetSummary> {
        let counts = self.label_counts();
        Ok(DatasetSummary {
            name: self.name.clone(),
            n: self.n,
            d: self.d,
            labels: self
                .label_names
                .iter()
                .zip(&counts.counts)
                .map(|(label, &count)| LabelEntry {
                    label: label.clone(),
                    count,
                })
                .collect(),
            imbalance: imbalance(&counts)?,
        })
    }
}

/// Content equality: features, per-sample labels and column names.
/// The dataset name and fingerprint are provenance and are not compared.
impl<T: Scalar> PartialEq for Dataset<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.d == other.d
            && self.features == other.features
            && self.feature_names == other.feature_names
            && self.label_column == other.label_column
            && self.label_names == other.label_names
            && self.labels == other.labels
    }
}

pub fn fingerprint_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Load a numeric CSV. Every non-label column must parse as a real number;
/// labels are kept verbatim. Row and column numbers in errors are zero-based
/// sample rows (header excluded) and file columns.
pub fn load_csv<T: Scalar>(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    has_header: bool,
) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(&bytes, name, label_column, has_header)
}

/// Parse CSV bytes already in memory. See [`load_csv`].
pub fn parse_csv<T: Scalar>(
    bytes: &[u8],
    name: String,
    label_column: &LabelColumn,
    has_header: bool,
) -> Result<Dataset<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut records = reader.records();

    let header: Option<Vec<String>> = if has_header {
        match records.next() {
            Some(rec) => {
                let rec = rec.map_err(|e| Error::Csv {
                    row: 0,
                    message: e.to_string(),
                })?;
                Some(rec.iter().map(str::to_string).collect())
            }
            None => return Err(Error::Empty),
        }
    } else {
        None
    };

    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::Csv {
            row: i,
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        rows.push(rec);
    }
    let width = match (&header, rows.first()) {
        (Some(h), _) => h.len(),
        (None, Some(r)) => r.len(),
        (None, None) => return Err(Error::Empty),
    };

    let label_idx = match label_column {
        LabelColumn::Last => width
            .checked_sub(1)
            .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(_) => return Err(Error::MissingLabelColumn(label_column.to_string())),
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?,
    };
    if rows.is_empty() {
        return Err(Error::Empty);
    }
    if width < 2 {
        return Err(Error::NoFeatures);
    }

    let column_name = |j: usize| -> String {
        header
            .as_ref()
            .map(|h| h[j].clone())
            .unwrap_or_else(|| format!("column {j}"))
    };
    let d = width - 1;
    let mut features = Vec::with_capacity(rows.len() * d);
    let mut labels = Vec::with_capacity(rows.len());
    for (i, rec) in rows.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row: i,
                found: rec.len(),
                expected: width,
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::BadCell {
                row: i,
                column: j,
                name: column_name(j),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, column: j });
            }
            features.push(T::from_f64_lossy(v));
        }
    }
    let feature_names = (0..width)
        .filter(|&j| j != label_idx)
        .map(column_name)
        .collect();
    let label_name = header
        .as_ref()
        .map(|h| h[label_idx].clone())
        .unwrap_or_else(|| "label".to_string());
    Dataset::from_parts(
        name,
        rows.len(),
        d,
        features,
        feature_names,
        label_name,
        labels,
        Some(fingerprint_bytes(bytes)),
    )
}

/// Map every feature column affinely onto `[0, 1]` using its global min and
/// max. Constant columns become all zeros.
pub fn normalize_minmax<T: Scalar>(ds: &Dataset<T>) -> Dataset<T> {
    let d = ds.d;
    let mut lo = vec![T::infinity(); d];
    let mut hi = vec![T::neg_infinity(); d];
    for row in ds.rows() {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let mut out = ds.clone();
    for row in out.features.chunks_exact_mut(d) {
        for (j, v) in row.iter_mut().enumerate() {
            let span = hi[j] - lo[j];
            *v = if span > T::zero() {
                (*v - lo[j]) / span
            } else {
                T::zero()
            };
        }
    }
    out
}

/// Per-label sample counts in canonical label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelCounts {
    counts: Vec<usize>,
}

impl LabelCounts {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty);
        }
        if counts.contains(&0) {
            return Err(Error::InvalidArgument(
                "every label count must be positive".into(),
            ));
        }
        Ok(LabelCounts { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn n_labels(&self) -> usize {
        self.counts.len()
    }
}

/// `1 - H / ln(L)` with `H` the Shannon entropy of the class proportions:
/// 0 for a balanced dataset, approaching 1 as one class dominates.
pub fn imbalance(counts: &LabelCounts) -> Result<f64> {
    let k = counts.n_labels();
    if k < 2 {
        return Err(Error::SingleLabel);
    }
    let first = counts.counts[0];
    if counts.counts.iter().all(|&c| c == first) {
        return Ok(0.0);
    }
    let n = counts.total() as f64;
    let entropy: f64 = counts
        .counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    Ok((1.0 - entropy / (k as f64).ln()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub label: String,
    pub count: usize,
}

/// JSON dataset summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub labels: Vec<LabelEntry>,
    pub imbalance: f64,
}

/// Label counts keyed by label name, handy for tests and reports.
pub fn counts_by_name<T: Scalar>(ds: &Dataset<T>) -> BTreeMap<String, usize> {
    let counts = ds.label_counts();
    ds.label_names.iter().cloned().zip(counts.counts).collect()
}
