//! Dense classical multidimensional scaling on arbitrary finite metric spaces.
//!
//! Squared distances are double-centered into the inner-product kernel
//! `M = -1/2 H (D o D) H` with `H = I - 11^T/n`, the kernel is diagonalized
//! with eigenvalues in descending order, and coordinates are read off as
//! `F |Lambda|^(1/2)` from either the positive eigenvalues alone (classical
//! embedding) or the positive and negative ones together (pseudo-Euclidean).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;

/// Eigenvalues with `|lambda| <= ZERO_THRESHOLD_REL * max|lambda|` count as zero.
pub const ZERO_THRESHOLD_REL: f64 = 1e-9;

/// Relative tolerance for grouping numerically equal eigenvalues.
pub const CLUSTER_TOLERANCE_REL: f64 = 1e-8;

const SYMMETRY_TOLERANCE_REL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MdsKernel {
    matrix: DMatrix<f64>,
    centered: bool,
}

impl MdsKernel {
    pub fn new(matrix: DMatrix<f64>, centered: bool) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDimension(format!(
                "kernel must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, centered })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn max_asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }

    /// `H K H`, marking the result centered.
    pub fn centered(&self) -> Self {
        Self { matrix: center(&self.matrix), centered: true }
    }
}

fn center(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| a.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| a.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] - row_means[i] - col_means[j] + grand)
}

/// `-1/2 H (D o D) H` from exact integer distances.
pub fn double_center(d: &DistanceMatrix) -> MdsKernel {
    let n = d.size();
    let squared = DMatrix::from_fn(n, n, |i, j| {
        let v = d.get(i, j) as f64;
        v * v
    });
    double_center_squared(&squared)
}

/// `-1/2 H A H` for a matrix `A` of squared distances.
pub fn double_center_squared(squared: &DMatrix<f64>) -> MdsKernel {
    MdsKernel { matrix: center(squared) * -0.5, centered: true }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns aligned with `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    eigenvalues: &'a [f64],
    zero_threshold: f64,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn zero_threshold(&self) -> f64 {
        ZERO_THRESHOLD_REL * self.max_abs_eigenvalue()
    }

    pub fn positive_count(&self) -> usize {
        let t = self.zero_threshold();
        self.eigenvalues.iter().filter(|&&v| v > t).count()
    }

    pub fn negative_count(&self) -> usize {
        let t = self.zero_threshold();
        self.eigenvalues.iter().filter(|&&v| v < -t).count()
    }

    /// `sum_{i < k} lambda_i f_i f_i^T` over the descending order.
    pub fn rebuild_top(&self, k: usize) -> DMatrix<f64> {
        let n = self.eigenvectors.nrows();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..k.min(self.len()) {
            let f = self.eigenvectors.column(i);
            out += (f * f.transpose()) * self.eigenvalues[i];
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpectrumJson {
            eigenvalues: &self.eigenvalues,
            zero_threshold: self.zero_threshold(),
        })
        .expect("spectrum serializes")
    }
}

/// Full eigensystem of a symmetric kernel, eigenvalues descending.
///
/// Each eigenvector is signed so that its largest-magnitude entry is positive
/// (ties go to the lowest index).
pub fn eigendecompose(m: &MdsKernel) -> Result<SpectralDecomposition> {
    let scale = m.matrix.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let asym = m.max_asymmetry();
    if asym > SYMMETRY_TOLERANCE_REL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.size();
    let sym = (&m.matrix + m.matrix.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(dst, &(col * sign));
    }
    Ok(SpectralDecomposition {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: vectors,
    })
}

/// Groups descending eigenvalues that agree within `rel_tol * max|lambda|`;
/// returns `(mean value, count)` per cluster.
pub fn cluster_eigenvalues(values: &[f64], rel_tol: f64) -> Vec<(f64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let tol = rel_tol * sorted.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut clusters: Vec<(f64, usize, f64)> = Vec::new();
    for v in sorted {
        match clusters.last_mut() {
            Some((sum, count, last)) if (*last - v).abs() <= tol => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => clusters.push((v, 1, v)),
        }
    }
    clusters.into_iter().map(|(sum, count, _)| (sum / count as f64, count)).collect()
}

/// Point coordinates with a pseudo-Euclidean signature: the first `p`
/// columns carry positive eigenvalues, the remaining `q` negative ones.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingResult {
    /// `n x k`.
    pub coordinates: DMatrix<f64>,
    /// Eigenvalue behind each column.
    pub eigenvalues: Vec<f64>,
    pub signature: (usize, usize),
    /// Set when fewer than the requested number of coordinates were available.
    pub truncated: bool,
}

impl EmbeddingResult {
    pub fn dims(&self) -> usize {
        self.coordinates.ncols()
    }

    pub fn len(&self) -> usize {
        self.coordinates.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.nrows() == 0
    }

    /// Positive-block squared distance minus negative-block squared distance.
    pub fn pseudo_distance_sq(&self, i: usize, j: usize) -> f64 {
        let (p, _) = self.signature;
        let mut total = 0.0;
        for c in 0..self.dims() {
            let diff = self.coordinates[(i, c)] - self.coordinates[(j, c)];
            if c < p {
                total += diff * diff;
            } else {
                total -= diff * diff;
            }
        }
        total
    }

    /// Squared distance within the positive block only.
    pub fn positive_distance_sq(&self, i: usize, j: usize) -> f64 {
        (0..self.signature.0)
            .map(|c| {
                let diff = self.coordinates[(i, c)] - self.coordinates[(j, c)];
                diff * diff
            })
            .sum()
    }

    /// Keeps only the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let coordinates = DMatrix::from_fn(rows.len(), self.dims(), |r, c| self.coordinates[(rows[r], c)]);
        Self { coordinates, ..self.clone() }
    }

    /// `x1(+)`, `x2(-)`, ... recording each column's eigenvalue sign.
    pub fn column_headers(&self) -> Vec<String> {
        (0..self.dims())
            .map(|c| format!("x{}({})", c + 1, if self.eigenvalues[c] >= 0.0 { '+' } else { '-' }))
            .collect()
    }

    /// CSV `id,label,weight,x1..xk`; `rows` supplies the label and weight of each point.
    pub fn to_csv(&self, rows: &[(String, u64)]) -> Result<String> {
        if rows.len() != self.len() {
            return Err(Error::InvalidDimension(format!(
                "{} row labels for {} points",
                rows.len(),
                self.len()
            )));
        }
        let mut out = String::from("id,label,weight");
        for h in self.column_headers() {
            out.push(',');
            out.push_str(&h);
        }
        out.push('\n');
        for (i, (label, weight)) in rows.iter().enumerate() {
            out.push_str(&format!("{},{},{}", i + 1, csv_field(label), weight));
            for c in 0..self.dims() {
                out.push_str(&format!(",{:.12}", clean_zero(self.coordinates[(i, c)])));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

fn clean_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Euclidean coordinates from the top `k` positive eigenvalues.
pub fn classical_embedding(dec: &SpectralDecomposition, k: usize) -> Result<EmbeddingResult> {
    if k < 1 {
        return Err(Error::InvalidDimension("embedding dimension must be at least 1".into()));
    }
    let p = dec.positive_count();
    let used = k.min(p);
    let columns: Vec<usize> = (0..used).collect();
    Ok(build_embedding(dec, &columns, (used, 0), k > p))
}

/// Coordinates from the `k` largest-magnitude nonzero eigenvalues, positive block first.
pub fn pseudo_embedding(dec: &SpectralDecomposition, k: usize) -> EmbeddingResult {
    let t = dec.zero_threshold();
    let mut nonzero: Vec<usize> = (0..dec.len()).filter(|&i| dec.eigenvalues[i].abs() > t).collect();
    nonzero.sort_by(|&a, &b| dec.eigenvalues[b].abs().total_cmp(&dec.eigenvalues[a].abs()).then(a.cmp(&b)));
    let truncated = k > nonzero.len();
    nonzero.truncate(k);
    let mut positive: Vec<usize> = nonzero.iter().copied().filter(|&i| dec.eigenvalues[i] > 0.0).collect();
    let mut negative: Vec<usize> = nonzero.iter().copied().filter(|&i| dec.eigenvalues[i] < 0.0).collect();
    positive.sort_unstable();
    // descending |lambda| within the negative block
    negative.sort_unstable_by(|a, b| b.cmp(a));
    let signature = (positive.len(), negative.len());
    positive.extend(negative);
    build_embedding(dec, &positive, signature, truncated)
}

fn build_embedding(
    dec: &SpectralDecomposition,
    columns: &[usize],
    signature: (usize, usize),
    truncated: bool,
) -> EmbeddingResult {
    let n = dec.eigenvectors.nrows();
    let coordinates = DMatrix::from_fn(n, columns.len(), |r, c| {
        let i = columns[c];
        dec.eigenvectors[(r, i)] * dec.eigenvalues[i].abs().sqrt()
    });
    EmbeddingResult {
        coordinates,
        eigenvalues: columns.iter().map(|&i| dec.eigenvalues[i]).collect(),
        signature,
        truncated,
    }
}

/// Sum of squared discarded eigenvalues when keeping the top `k` (descending order).
pub fn strain(dec: &SpectralDecomposition, k: usize) -> f64 {
    dec.eigenvalues.iter().skip(k).map(|v| v * v).sum()
}

pub fn frobenius_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}
