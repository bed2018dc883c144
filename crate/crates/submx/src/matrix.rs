//! Seeded Gaussian matrices, submatrix arithmetic and the ANOVA
//! decomposition.
//!
//! Row and column indices are 1-based on the public surface and converted
//! internally once.

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Immutable n x n real matrix with seed provenance. Entries are stored
/// row-major; regenerating with the same `(n, seed)` is bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMatrix {
    n: usize,
    seed: u64,
    values: Vec<f64>,
}

impl GaussianMatrix {
    /// n^2 i.i.d. standard normal draws from a deterministic stream,
    /// filled in row-major order.
    pub fn sample(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut stream = Stream::new(seed);
        let values = (0..n * n).map(|_| stream.normal()).collect();
        Ok(GaussianMatrix { n, seed, values })
    }

    /// Wrap explicit row-major values (fixtures, CSV input). Seed is
    /// recorded as provenance only.
    pub fn from_values(n: usize, values: Vec<f64>, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension);
        }
        if values.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {n}x{n} matrix, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(GaussianMatrix { n, seed, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry at 1-based (i, j).
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || j == 0 || i > self.n || j > self.n {
            return Err(Error::IndexOutOfBounds(format!(
                "({i}, {j}) outside [1, {}]^2",
                self.n
            )));
        }
        Ok(self.at(i - 1, j - 1))
    }

    /// 0-based unchecked access for inner loops.
    #[inline]
    pub(crate) fn at(&self, i0: usize, j0: usize) -> f64 {
        self.values[i0 * self.n + j0]
    }
}

/// Pair of sorted k-element row/column index sets (1-based).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubmatrixIndex {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl SubmatrixIndex {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.is_empty() || rows.len() != cols.len() {
            return Err(Error::InvalidArgument(format!(
                "need |rows| = |cols| >= 1, got {} and {}",
                rows.len(),
                cols.len()
            )));
        }
        for seq in [&rows, &cols] {
            if seq[0] == 0 {
                return Err(Error::IndexOutOfBounds("indices are 1-based".into()));
            }
            if seq.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(
                    "index sets must be strictly increasing".into(),
                ));
            }
        }
        Ok(SubmatrixIndex { rows, cols })
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn validate_for(&self, matrix: &GaussianMatrix) -> Result<()> {
        let n = matrix.n();
        if self.rows.last().copied().unwrap_or(0) > n || self.cols.last().copied().unwrap_or(0) > n {
            return Err(Error::IndexOutOfBounds(format!(
                "index set exceeds matrix side {n}"
            )));
        }
        Ok(())
    }
}

/// Grand mean, row/column effects and the doubly centered residual of a
/// square matrix.
#[derive(Debug, Clone)]
pub struct AnovaDecomposition {
    pub grand_mean: f64,
    pub row_effects: Vec<f64>,
    pub col_effects: Vec<f64>,
    /// k x k row-major residual.
    pub residual: Vec<f64>,
}

impl AnovaDecomposition {
    pub fn k(&self) -> usize {
        self.row_effects.len()
    }

    /// grand_mean + row_effect_i + col_effect_j + residual_ij, 0-based.
    pub fn reconstruct(&self, i0: usize, j0: usize) -> f64 {
        self.grand_mean + self.row_effects[i0] + self.col_effects[j0] + self.residual[i0 * self.k() + j0]
    }
}

/// Mean of the entries of the submatrix indexed by `index`.
pub fn submatrix_average(matrix: &GaussianMatrix, index: &SubmatrixIndex) -> Result<f64> {
    index.validate_for(matrix)?;
    let mut sum = 0.0;
    for &i in index.rows() {
        for &j in index.cols() {
            sum += matrix.at(i - 1, j - 1);
        }
    }
    let k = index.k();
    Ok(sum / (k * k) as f64)
}

/// For every row i of the matrix, the sum over the index's columns, and
/// for every column j, the sum over the index's rows.
pub fn cross_sums(matrix: &GaussianMatrix, index: &SubmatrixIndex) -> Result<(Vec<f64>, Vec<f64>)> {
    index.validate_for(matrix)?;
    let n = matrix.n();
    let mut row_sums = vec![0.0; n];
    let mut col_sums = vec![0.0; n];
    for i0 in 0..n {
        let mut s = 0.0;
        for &j in index.cols() {
            s += matrix.at(i0, j - 1);
        }
        row_sums[i0] = s;
    }
    for &i in index.rows() {
        for j0 in 0..n {
            col_sums[j0] += matrix.at(i - 1, j0);
        }
    }
    Ok((row_sums, col_sums))
}

/// Extract the k x k submatrix as rows of values.
pub fn extract_submatrix(matrix: &GaussianMatrix, index: &SubmatrixIndex) -> Result<Vec<Vec<f64>>> {
    index.validate_for(matrix)?;
    Ok(index
        .rows()
        .iter()
        .map(|&i| index.cols().iter().map(|&j| matrix.at(i - 1, j - 1)).collect())
        .collect())
}

/// ANOVA split of a square matrix into grand mean, row effects, column
/// effects and the doubly centered residual.
pub fn anova_decompose(values: &[Vec<f64>]) -> Result<AnovaDecomposition> {
    let k = values.len();
    if k == 0 {
        return Err(Error::NotSquare { rows: 0, cols: 0 });
    }
    for row in values {
        if row.len() != k {
            return Err(Error::NotSquare { rows: k, cols: row.len() });
        }
    }
    let kf = k as f64;
    let grand_mean = values.iter().flatten().sum::<f64>() / (kf * kf);
    let row_means: Vec<f64> = values.iter().map(|r| r.iter().sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| values.iter().map(|r| r[j]).sum::<f64>() / kf)
        .collect();
    let row_effects: Vec<f64> = row_means.iter().map(|m| m - grand_mean).collect();
    let col_effects: Vec<f64> = col_means.iter().map(|m| m - grand_mean).collect();
    let mut residual = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            residual[i * k + j] = values[i][j] - row_means[i] - col_means[j] + grand_mean;
        }
    }
    Ok(AnovaDecomposition { grand_mean, row_effects, col_effects, residual })
}

/// Indices (1-based, sorted ascending) of the k largest values; ties go
/// to the smallest index.
pub fn top_k_indices(v: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > v.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside [1, {}]",
            v.len()
        )));
    }
    let mut out = top_k_zero_based(v, k);
    for i in out.iter_mut() {
        *i += 1;
    }
    Ok(out)
}

/// 0-based top-k selection used by the hot enumeration loops. Scanning in
/// index order means an equal later value never displaces an earlier one,
/// which is exactly the smallest-index tie rule.
pub(crate) fn top_k_zero_based(v: &[f64], k: usize) -> Vec<usize> {
    debug_assert!(k >= 1 && k <= v.len());
    // best[0..len] sorted by descending value; ties keep insertion order.
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (idx, &val) in v.iter().enumerate() {
        if best.len() == k && val <= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|&(bv, _)| bv >= val);
        best.insert(pos, (val, idx));
        if best.len() > k {
            best.pop();
        }
    }
    let mut out: Vec<usize> = best.into_iter().map(|(_, i)| i).collect();
    out.sort_unstable();
    out
}
