//! The five distance functions and the dense pairwise distance matrix.
//!
//! Similarity is the negated distance throughout the crate: the "most similar"
//! sample is the one at the smallest distance.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKind {
    Chebyshev,
    Cityblock,
    Euclidean,
    Cosine,
    Correlation,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 5] = [
        SimilarityKind::Chebyshev,
        SimilarityKind::Cityblock,
        SimilarityKind::Euclidean,
        SimilarityKind::Cosine,
        SimilarityKind::Correlation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityKind::Chebyshev => "chebyshev",
            SimilarityKind::Cityblock => "cityblock",
            SimilarityKind::Euclidean => "euclidean",
            SimilarityKind::Cosine => "cosine",
            SimilarityKind::Correlation => "correlation",
        }
    }

    fn code(self) -> u8 {
        self as u8
    }

    fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Whether rows need a norm (and, for correlation, centering) before use.
    fn is_angular(self) -> bool {
        matches!(self, SimilarityKind::Cosine | SimilarityKind::Correlation)
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownSimilarity(s.to_string()))
    }
}

/// Rows in the form each kernel consumes: raw for the Minkowski family,
/// raw plus squared L2 norm for cosine, mean-centered plus squared norm for
/// correlation.
struct PreparedRows<T> {
    kind: SimilarityKind,
    d: usize,
    rows: Vec<T>,
    sq_norms: Vec<T>,
}

impl<T: Scalar> PreparedRows<T> {
    fn new<'a>(
        kind: SimilarityKind,
        d: usize,
        rows: impl Iterator<Item = &'a [T]>,
    ) -> Result<Self> {
        let mut out = PreparedRows {
            kind,
            d,
            rows: Vec::new(),
            sq_norms: Vec::new(),
        };
        for (i, row) in rows.enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: row.len(),
                });
            }
            match kind {
                SimilarityKind::Cosine => {
                    let ss = sum_sq(row);
                    if ss == T::zero() {
                        return Err(Error::ZeroNorm { sample: None }.at_sample(i));
                    }
                    out.rows.extend_from_slice(row);
                    out.sq_norms.push(ss);
                }
                SimilarityKind::Correlation => {
                    if row.iter().all(|&v| v == row[0]) {
                        return Err(Error::ConstantVector { sample: None }.at_sample(i));
                    }
                    let mean = row.iter().copied().sum::<T>() / T::from_usize(d).unwrap();
                    let start = out.rows.len();
                    out.rows.extend(row.iter().map(|&v| v - mean));
                    let ss = sum_sq(&out.rows[start..]);
                    if ss == T::zero() {
                        return Err(Error::ConstantVector { sample: None }.at_sample(i));
                    }
                    out.sq_norms.push(ss);
                }
                _ => out.rows.extend_from_slice(row),
            }
        }
        Ok(out)
    }

    fn row(&self, i: usize) -> &[T] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    fn len(&self) -> usize {
        self.rows.len().checked_div(self.d).unwrap_or(0)
    }

    fn distance(&self, i: usize, j: usize) -> T {
        let (u, v) = (self.row(i), self.row(j));
        match self.kind {
            SimilarityKind::Chebyshev => u
                .iter()
                .zip(v)
                .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())),
            SimilarityKind::Cityblock => u.iter().zip(v).map(|(&a, &b)| (a - b).abs()).sum(),
            SimilarityKind::Euclidean => u
                .iter()
                .zip(v)
                .map(|(&a, &b)| {
                    let t = a - b;
                    t * t
                })
                .sum::<T>()
                .sqrt(),
            SimilarityKind::Cosine | SimilarityKind::Correlation => {
                let dot: T = u.iter().zip(v).map(|(&a, &b)| a * b).sum();
                let two = T::one() + T::one();
                let denom = (self.sq_norms[i] * self.sq_norms[j]).sqrt();
                (T::one() - dot / denom).max(T::zero()).min(two)
            }
        }
    }
}

fn sum_sq<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&a| a * a).sum()
}

/// Distance between two vectors under `kind`.
///
/// Cosine rejects zero-norm inputs and correlation rejects constant vectors;
/// the error's sample index is 0 for `u` and 1 for `v`.
pub fn distance<T: Scalar>(kind: SimilarityKind, u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::NoFeatures);
    }
    let prepared = PreparedRows::new(kind, u.len(), [u, v].into_iter())?;
    Ok(prepared.distance(0, 1))
}

/// Symmetric `n x n` matrix of pairwise distances, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    kind: SimilarityKind,
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Wrap precomputed values; checks shape and symmetry.
    pub fn from_values(kind: SimilarityKind, n: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Shape(format!(
                "{} values for a {n}x{n} matrix",
                values.len()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::Shape(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { kind, n, values })
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn summary(&self) -> MatrixSummary {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let v = self.get(i, j).to_f64_lossy();
                    min = min.min(v);
                    max = max.max(v);
                    sum += v;
                    count += 1;
                }
            }
        }
        let (min, max, mean) = if count == 0 {
            (0.0, 0.0, 0.0)
        } else {
            (min, max, sum / count as f64)
        };
        MatrixSummary {
            kind: self.kind,
            n: self.n,
            min,
            max,
            mean,
        }
    }

    /// Binary dump: 7-byte magic `SBSSDM1`, one byte kind code (position in
    /// [`SimilarityKind::ALL`]), `n` as little-endian u64, then `n * n`
    /// row-major little-endian f64 values.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(MATRIX_MAGIC)?;
        out.write_all(&[self.kind.code()])?;
        out.write_all(&(self.n as u64).to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
        out.flush()
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let fmt_err = |e: std::io::Error| Error::MatrixFormat(e.to_string());
        let mut head = [0u8; 16];
        input.read_exact(&mut head).map_err(fmt_err)?;
        if &head[..7] != MATRIX_MAGIC {
            return Err(Error::MatrixFormat("bad magic".into()));
        }
        let kind = SimilarityKind::from_code(head[7])
            .ok_or_else(|| Error::MatrixFormat(format!("kind code {}", head[7])))?;
        let n = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
        let mut values = Vec::with_capacity(n * n);
        let mut buf = [0u8; 8];
        for _ in 0..n * n {
            input.read_exact(&mut buf).map_err(fmt_err)?;
            values.push(T::from_f64_lossy(f64::from_le_bytes(buf)));
        }
        Self::from_values(kind, n, values)
    }
}

const MATRIX_MAGIC: &[u8; 7] = b"SBSSDM1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub kind: SimilarityKind,
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// All pairwise distances between the rows of `ds`.
///
/// Rows of the output are filled in parallel on the current rayon pool. Each
/// entry is computed by the same sequential kernel regardless of which worker
/// runs it, so the result does not depend on the thread count.
pub fn pairwise_matrix<T: Scalar>(
    kind: SimilarityKind,
    ds: &Dataset<T>,
) -> Result<DistanceMatrix<T>> {
    pairwise_rows(kind, ds.n_features(), ds.rows())
}

pub(crate) fn pairwise_rows<'a, T: Scalar>(
    kind: SimilarityKind,
    d: usize,
    rows: impl Iterator<Item = &'a [T]>,
) -> Result<DistanceMatrix<T>> {
    let prepared = PreparedRows::new(kind, d, rows)?;
    let n = prepared.len();
    let mut values = vec![T::zero(); n * n];
    values
        .par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(i, out)| {
            for (j, slot) in out.iter_mut().enumerate().skip(i + 1) {
                *slot = prepared.distance(i, j);
            }
        });
    for i in 0..n {
        for j in 0..i {
            values[i * n + j] = values[j * n + i];
        }
    }
    debug_assert!(!kind.is_angular() || values.iter().all(|&v| v >= T::zero()));
    Ok(DistanceMatrix { kind, n, values })
}
