//! Row-major dense matrices and the numerical kernels built on them.

mod kernels;

pub use kernels::{full_svd, qr_thin, singular_values};

use std::fmt;

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef};

use crate::error::{HsvdError, Result};

/// Real dense matrix stored row-major. Dimensions are always nonzero.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(HsvdError::contract(format!(
                "matrix dimensions must be nonzero, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(HsvdError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged or empty input; meant for literals.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        assert!(!rows.is_empty(), "no rows");
        let cols = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        DenseMatrix::new(rows.len(), cols, data).expect("valid literal")
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be nonzero");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be nonzero");
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Single-column matrix.
    pub fn column(values: &[f64]) -> Self {
        DenseMatrix::from_fn(values.len(), 1, |i, _| values[i])
    }

    pub fn diag(values: &[f64]) -> Self {
        DenseMatrix::from_fn(values.len(), values.len(), |i, j| {
            if i == j {
                values[i]
            } else {
                0.0
            }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col_vec(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Zero-copy faer view over the row-major storage.
    pub fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }

    pub(crate) fn as_faer_mut(&mut self) -> MatMut<'_, f64> {
        MatMut::from_row_major_slice_mut(&mut self.data, self.rows, self.cols)
    }

    pub fn from_faer(m: MatRef<'_, f64>) -> Self {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Rejects NaN and infinite entries.
    pub fn validate_finite(&self) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(idx) => Err(HsvdError::Validation(format!(
                "non-finite value {} at ({}, {})",
                self.data[idx],
                idx / self.cols,
                idx % self.cols
            ))),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    pub fn row_block(&self, start: usize, count: usize) -> Self {
        assert!(count > 0 && start + count <= self.rows, "row block out of range");
        DenseMatrix {
            rows: count,
            cols: self.cols,
            data: self.data[start * self.cols..(start + count) * self.cols].to_vec(),
        }
    }

    pub fn col_block(&self, start: usize, count: usize) -> Self {
        assert!(count > 0 && start + count <= self.cols, "column block out of range");
        let mut data = Vec::with_capacity(self.rows * count);
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend_from_slice(&row[start..start + count]);
        }
        DenseMatrix {
            rows: self.rows,
            cols: count,
            data,
        }
    }

    /// Leading `count` columns.
    pub fn leading_cols(&self, count: usize) -> Self {
        if count == self.cols {
            return self.clone();
        }
        self.col_block(0, count)
    }

    /// `[self | other]`
    pub fn hcat(&self, other: &DenseMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(HsvdError::DimensionMismatch(format!(
                "hcat of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// `[self; other]`
    pub fn vcat(&self, other: &DenseMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(HsvdError::DimensionMismatch(format!(
                "vcat of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Multiplies column `j` by `scale[j]`.
    pub fn scale_cols(&self, scale: &[f64]) -> Self {
        assert_eq!(scale.len(), self.cols);
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.cols) {
            for (x, s) in row.iter_mut().zip(scale) {
                *x *= s;
            }
        }
        out
    }

    /// Multiplies row `i` by `scale[i]`.
    pub fn scale_rows(&self, scale: &[f64]) -> Self {
        assert_eq!(scale.len(), self.rows);
        let mut out = self.clone();
        for (row, s) in out.data.chunks_exact_mut(self.cols).zip(scale) {
            row.iter_mut().for_each(|x| *x *= s);
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(HsvdError::DimensionMismatch(format!(
                "subtracting {}x{} from {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(HsvdError::DimensionMismatch(format!(
                "adding {}x{} to {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// `self · other`
    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        product(self.as_faer(), other.as_faer())
    }

    /// `selfᵀ · other`
    pub fn t_matmul(&self, other: &DenseMatrix) -> Result<Self> {
        product(self.as_faer().transpose(), other.as_faer())
    }

    /// `self · otherᵀ`
    pub fn matmul_t(&self, other: &DenseMatrix) -> Result<Self> {
        product(self.as_faer(), other.as_faer().transpose())
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }
}

fn product(lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>) -> Result<DenseMatrix> {
    if lhs.ncols() != rhs.nrows() {
        return Err(HsvdError::DimensionMismatch(format!(
            "product of {}x{} and {}x{}",
            lhs.nrows(),
            lhs.ncols(),
            rhs.nrows(),
            rhs.ncols()
        )));
    }
    let mut out = DenseMatrix::zeros(lhs.nrows(), rhs.ncols());
    matmul(
        out.as_faer_mut(),
        Accum::Replace,
        lhs,
        rhs,
        1.0,
        faer::get_global_parallelism(),
    );
    Ok(out)
}

/// Square root of the sum of squared entries.
pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    // scaled accumulation guards against overflow on huge entries
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = a.data.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * sum.sqrt()
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        let shown = self.rows.min(8);
        for i in 0..shown {
            let row = self.row(i);
            let head: Vec<String> = row.iter().take(8).map(|x| format!("{x:.6e}")).collect();
            let ellipsis = if self.cols > 8 { ", ..." } else { "" };
            writeln!(f, "  [{}{}]", head.join(", "), ellipsis)?;
        }
        if self.rows > shown {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&DenseMatrix::from_rows(&[[3.0, 4.0]])), 5.0);
        assert_eq!(frobenius_norm(&DenseMatrix::zeros(4, 7)), 0.0);
        for n in [1, 2, 5, 9] {
            let got = frobenius_norm(&DenseMatrix::identity(n));
            assert!((got - (n as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn frobenius_zero_only_for_zero_matrix() {
        let mut a = DenseMatrix::zeros(3, 3);
        a.set(2, 1, 1e-300);
        assert!(frobenius_norm(&a) > 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(DenseMatrix::new(0, 3, vec![]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn finite_validation() {
        let a = DenseMatrix::new(1, 3, vec![1.0, f64::NAN, 2.0]).unwrap();
        assert!(matches!(a.validate_finite(), Err(HsvdError::Validation(_))));
        let b = DenseMatrix::new(1, 2, vec![f64::INFINITY, 0.0]).unwrap();
        assert!(b.validate_finite().is_err());
    }

    #[test]
    fn products_and_blocks() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let ab = a.matmul(&b).unwrap();
        assert_eq!(ab, DenseMatrix::from_rows(&[[4.0, 5.0], [10.0, 11.0]]));
        assert_eq!(a.t_matmul(&a).unwrap(), a.transpose().matmul(&a).unwrap());
        assert_eq!(a.matmul_t(&a).unwrap(), a.matmul(&a.transpose()).unwrap());
        assert!(a.matmul(&a).is_err());

        assert_eq!(a.col_block(1, 2), DenseMatrix::from_rows(&[[2.0, 3.0], [5.0, 6.0]]));
        assert_eq!(a.row_block(1, 1), DenseMatrix::from_rows(&[[4.0, 5.0, 6.0]]));
        let h = a.col_block(0, 1).hcat(&a.col_block(1, 2)).unwrap();
        assert_eq!(h, a);
        let v = a.row_block(0, 1).vcat(&a.row_block(1, 1)).unwrap();
        assert_eq!(v, a);
    }
}
