//! Compressed sparse row storage for complex matrices.

use super::{DenseComplexMatrix, LinalgError};
use num_complex::Complex64;

/// Sparse complex matrix in CSR form. At most one stored entry per
/// `(row, col)`; duplicate triplets are summed during construction.
///
/// A matrix used as "symmetric" in this crate is complex *symmetric*
/// (`a_ij = a_ji`), not Hermitian; [`SparseComplexMatrix::symmetry_defect`]
/// measures exactly that.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseComplexMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseComplexMatrix {
    /// Builds from triplets, summing duplicates. Entries that sum to an exact
    /// zero are kept; callers that want pruning can use [`Self::pruned`].
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Result<Self, LinalgError> {
        for &(r, c, _) in triplets {
            if r >= rows || c >= cols {
                return Err(LinalgError::IndexOutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
        }
        let mut sorted: Vec<(usize, usize, Complex64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        // Merge consecutive duplicates, then count per row.
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let (col_idx, values) = merged.into_iter().map(|(_, c, v)| (c, v)).unzip();
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect();
        Self::from_triplets(n, n, &triplets).expect("identity triplets are in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Iterates stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// Stored value at `(row, col)`, or zero.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(k) => self.values[lo + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.cols, "matvec input length");
        assert_eq!(y.len(), self.rows, "matvec output length");
        for r in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        self.matvec(x, &mut y);
        y
    }

    /// Sparse-dense product `A B`.
    pub fn mul_dense(&self, b: &DenseComplexMatrix) -> DenseComplexMatrix {
        assert_eq!(b.nrows(), self.cols, "mul_dense inner dimension");
        let mut out = DenseComplexMatrix::zeros(self.rows, b.ncols());
        for j in 0..b.ncols() {
            let col = b.column(j);
            for r in 0..self.rows {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[k] * col[self.col_idx[k]];
                }
                out[(r, j)] = acc;
            }
        }
        out
    }

    /// Main diagonal (length `min(rows, cols)`).
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// `alpha * self + beta * other`, entrywise over the union pattern.
    pub fn linear_combination(
        &self,
        alpha: Complex64,
        other: &Self,
        beta: Complex64,
    ) -> Result<Self, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot combine {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut triplets: Vec<(usize, usize, Complex64)> =
            self.iter().map(|(r, c, v)| (r, c, alpha * v)).collect();
        triplets.extend(other.iter().map(|(r, c, v)| (r, c, beta * v)));
        Self::from_triplets(self.rows, self.cols, &triplets)
    }

    /// Multiplies every stored value by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        out
    }

    /// Drops stored entries with |value| <= cutoff.
    pub fn pruned(&self, cutoff: f64) -> Self {
        let triplets: Vec<_> = self.iter().filter(|(_, _, v)| v.norm() > cutoff).collect();
        Self::from_triplets(self.rows, self.cols, &triplets).expect("pruning keeps indices in range")
    }

    /// Largest `|a_ij - a_ji|` over the stored pattern. Zero for a matrix that
    /// is complex symmetric exactly.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for (r, c, v) in self.iter() {
            if r <= c {
                let mirrored = self.get(c, r);
                defect = defect.max((v - mirrored).norm());
            }
        }
        defect
    }

    /// Largest stored |value|.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when every stored value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn to_dense(&self) -> DenseComplexMatrix {
        let mut out = DenseComplexMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            out[(r, c)] = v;
        }
        out
    }
}

/// Quadratic form `sum_mn xhat_m A_mn y_n`, with `xhat = conj(x)` when
/// `conjugate_left` is set and `xhat = x` otherwise.
pub fn quad_form(
    x: &[Complex64],
    a: &SparseComplexMatrix,
    y: &[Complex64],
    conjugate_left: bool,
) -> Result<Complex64, LinalgError> {
    if x.len() != a.rows() || y.len() != a.cols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "quad_form: x has {}, A is {}x{}, y has {}",
            x.len(),
            a.rows(),
            a.cols(),
            y.len()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..a.rows() {
        let xv = if conjugate_left { x[r].conj() } else { x[r] };
        if xv.norm_sqr() == 0.0 {
            continue;
        }
        let mut row_acc = Complex64::new(0.0, 0.0);
        for k in a.row_ptr[r]..a.row_ptr[r + 1] {
            row_acc += a.values[k] * y[a.col_idx[k]];
        }
        acc += xv * row_acc;
    }
    Ok(acc)
}
