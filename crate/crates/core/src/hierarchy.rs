//! Block-partitioned truncated SVD.
//!
//! The matrix is cut into `⌈m/d⌉` row slices and each row slice into `⌈n/c⌉`
//! column slices. Column slices are merged into `(U_j, Σ_j)` per row slice, the
//! slice's right factor is recovered from `U_jᵀX_j`, and the per-slice
//! `(Σ_j, V_j)` are merged into the final `(Σ̂, V̂)`. Every merge truncates.

use crate::dense::{full_svd, DenseMatrix};
use crate::error::{HsvdError, Result};
use crate::factor::{orthonormality_error, MatConfig, SvdFactor, Truncation};
use crate::merge::{merge_pair_qr, MergeOrientation};

/// Tolerance on `V_rᵀV_r − I` accepted by [`recover_left_vectors`].
const ORTHONORMAL_INPUT_TOL: f64 = 1e-6;

/// Contiguous `(start, count)` slices covering rows and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    pub row_slices: Vec<(usize, usize)>,
    pub col_slices: Vec<(usize, usize)>,
}

impl BlockPlan {
    pub fn new(rows: usize, cols: usize, row_block: usize, col_block: usize) -> Result<Self> {
        Ok(BlockPlan {
            row_slices: slices(rows, row_block)?,
            col_slices: slices(cols, col_block)?,
        })
    }

    pub fn block_count(&self) -> usize {
        self.row_slices.len() * self.col_slices.len()
    }
}

/// Splits `0..total` into `⌈total/size⌉` pieces of `size` (last one shorter).
pub fn slices(total: usize, size: usize) -> Result<Vec<(usize, usize)>> {
    if size == 0 {
        return Err(HsvdError::contract("slice size must be at least 1"));
    }
    if total == 0 {
        return Err(HsvdError::contract("cannot slice an empty range"));
    }
    let size = size.min(total);
    Ok((0..total.div_ceil(size))
        .map(|i| {
            let start = i * size;
            (start, size.min(total - start))
        })
        .collect())
}

/// Pairwise reduction: each level merges `(0,1), (2,3), …` and carries an odd
/// trailing factor up unmerged, until one factor remains.
pub fn tree_merge(
    factors: Vec<SvdFactor>,
    orient: MergeOrientation,
    trunc: impl Into<Truncation>,
) -> Result<SvdFactor> {
    let trunc = trunc.into();
    tree_merge_by(factors, |a, b| merge_pair_qr(a, b, orient, trunc))
}

/// [`tree_merge`] with an arbitrary pairwise merge. Performs exactly
/// `factors.len() − 1` merges.
pub fn tree_merge_by<F>(mut factors: Vec<SvdFactor>, mut merge: F) -> Result<SvdFactor>
where
    F: FnMut(&SvdFactor, &SvdFactor) -> Result<SvdFactor>,
{
    if factors.is_empty() {
        return Err(HsvdError::contract("tree merge of an empty list"));
    }
    while factors.len() > 1 {
        let mut next = Vec::with_capacity(factors.len().div_ceil(2));
        let mut level = factors.into_iter();
        while let Some(left) = level.next() {
            match level.next() {
                Some(right) => next.push(merge(&left, &right)?),
                None => next.push(left),
            }
        }
        factors = next;
    }
    Ok(factors.pop().expect("one factor left"))
}

/// `(U, Σ)` of one row slice, from truncated SVDs of its column slices of
/// width `col_block` merged side by side.
pub fn svd_of_col_slices(
    x_slice: &DenseMatrix,
    col_block: usize,
    trunc: impl Into<Truncation>,
) -> Result<SvdFactor> {
    let trunc = trunc.into();
    let leaves = slices(x_slice.cols(), col_block)?
        .into_iter()
        .map(|(start, count)| {
            let block = x_slice.col_block(start, count);
            Ok(trunc.apply(&full_svd(&block)?)?.without_v())
        })
        .collect::<Result<Vec<_>>>()?;
    tree_merge(leaves, MergeOrientation::ColumnConcat, trunc)
}

/// Approximate truncated `(Σ̂, V̂)` of `x`; the result carries no `u`.
/// Use [`recover_left_vectors`] (or [`hierarchical_svd_full`]) for `U`.
pub fn hierarchical_svd(x: &DenseMatrix, cfg: &MatConfig) -> Result<SvdFactor> {
    cfg.validate()?;
    let trunc = Truncation::from(cfg);
    let row_slices = slices(x.rows(), cfg.row_block)?;
    let per_slice = row_slices
        .iter()
        .enumerate()
        .map(|(index, &(start, count))| {
            row_slice_factor(&x.row_block(start, count), cfg.col_block, trunc).map_err(|e| {
                HsvdError::Slice {
                    index,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    tree_merge(per_slice, MergeOrientation::RowConcat, trunc)
}

/// `(Σ_j, V_j)` of one row slice. Σ_j is recomputed from `U_jᵀX_j` together
/// with `V_j`, replacing the column-merge estimate.
fn row_slice_factor(x_slice: &DenseMatrix, col_block: usize, trunc: Truncation) -> Result<SvdFactor> {
    let left = svd_of_col_slices(x_slice, col_block, trunc)?;
    let u = left.u().expect("column merge carries u");
    let projected = u.t_matmul(x_slice)?;
    let f = trunc.apply(&full_svd(&projected)?)?;
    Ok(f.without_u())
}

/// Exact SVD of the projection `X·V_r·V_rᵀ`: with `X·V_r = U_y Σ_y V_yᵀ`,
/// returns `(U_y, Σ_y, V_r·V_y)`.
pub fn recover_left_vectors(x: &DenseMatrix, v_r: &DenseMatrix) -> Result<SvdFactor> {
    if v_r.rows() != x.cols() {
        return Err(HsvdError::DimensionMismatch(format!(
            "right basis has {} rows for a matrix with {} columns",
            v_r.rows(),
            x.cols()
        )));
    }
    let defect = orthonormality_error(v_r);
    if defect > ORTHONORMAL_INPUT_TOL {
        return Err(HsvdError::contract(format!(
            "right basis is not orthonormal (max |VᵀV − I| = {defect:e})"
        )));
    }
    let y = x.matmul(v_r)?;
    let svd = full_svd(&y)?;
    let (u_y, sigma, v_y) = svd.into_parts();
    let v = v_r.matmul(&v_y.expect("full svd carries v"))?;
    Ok(SvdFactor::from_parts(u_y, sigma, Some(v)))
}

/// [`hierarchical_svd`] completed into a full `(U, Σ, V)` factor.
pub fn hierarchical_svd_full(x: &DenseMatrix, cfg: &MatConfig) -> Result<SvdFactor> {
    let partial = hierarchical_svd(x, cfg)?;
    let degenerate = partial.is_degenerate();
    let full = recover_left_vectors(x, partial.v().expect("row merge carries v"))?;
    Ok(if degenerate {
        crate::factor::mark_degenerate(full)
    } else {
        full
    })
}
