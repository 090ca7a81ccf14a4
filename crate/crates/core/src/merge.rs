//! Pairwise merge-and-truncate of two block factors.
//!
//! `[X₁ X₂]` (column concatenation) is merged through the left bases `U₁, U₂`;
//! `[X₁; X₂]` (row concatenation) is its transpose and is merged through the
//! right bases `V₁, V₂`. Both reduce to the same operation on a pair of
//! orthonormal bases `B₁, B₂` scaled by their singular values, which is what
//! the helpers below work on.

use serde::{Deserialize, Serialize};

use crate::dense::{full_svd, qr_thin, DenseMatrix};
use crate::error::{HsvdError, Result};
use crate::factor::{SvdFactor, Truncation};

/// Loss of orthogonality between `B₁` and the complement basis that triggers
/// a re-projection pass.
const REORTH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MergeOrientation {
    /// Side-by-side blocks `[X₁ X₂]`; factors must carry `u`, result carries `u`.
    ColumnConcat,
    /// Stacked blocks `[X₁; X₂]`; factors must carry `v`, result carries `v`.
    RowConcat,
}

impl MergeOrientation {
    fn basis<'a>(&self, f: &'a SvdFactor) -> Result<&'a DenseMatrix> {
        let (basis, side) = match self {
            MergeOrientation::ColumnConcat => (f.u(), "u"),
            MergeOrientation::RowConcat => (f.v(), "v"),
        };
        basis.ok_or_else(|| HsvdError::contract(format!("{self:?} merge needs factors carrying {side}")))
    }

    fn wrap(&self, basis: DenseMatrix, sigma: Vec<f64>) -> SvdFactor {
        match self {
            MergeOrientation::ColumnConcat => SvdFactor::from_parts(Some(basis), sigma, None),
            MergeOrientation::RowConcat => SvdFactor::from_parts(None, sigma, Some(basis)),
        }
    }
}

fn bases<'a>(
    f1: &'a SvdFactor,
    f2: &'a SvdFactor,
    orient: MergeOrientation,
) -> Result<(&'a DenseMatrix, &'a DenseMatrix)> {
    let b1 = orient.basis(f1)?;
    let b2 = orient.basis(f2)?;
    if b1.rows() != b2.rows() {
        return Err(HsvdError::DimensionMismatch(format!(
            "{orient:?} merge of factors with {} and {} {}",
            b1.rows(),
            b2.rows(),
            match orient {
                MergeOrientation::ColumnConcat => "rows",
                MergeOrientation::RowConcat => "columns",
            }
        )));
    }
    Ok((b1, b2))
}

/// Merge by a dense SVD of `[B₁Σ₁ | B₂Σ₂]`. Reference path and fallback.
pub fn merge_pair_naive(
    f1: &SvdFactor,
    f2: &SvdFactor,
    orient: MergeOrientation,
    trunc: impl Into<Truncation>,
) -> Result<SvdFactor> {
    let trunc = trunc.into();
    let (b1, b2) = bases(f1, f2, orient)?;
    let stacked = b1.scale_cols(f1.sigma()).hcat(&b2.scale_cols(f2.sigma()))?;
    let svd = trunc.apply(&full_svd(&stacked)?)?;
    let degenerate = svd.is_degenerate();
    let (u, sigma, _) = svd.into_parts();
    let out = orient.wrap(u.expect("full svd carries u"), sigma);
    Ok(mark(out, degenerate))
}

/// Merge through the orthogonal complement of `B₂` against `B₁`:
///
/// ```text
/// W = B₁ᵀB₂,  B₂ − B₁W = B_o R,
/// [B₁Σ₁ | B₂Σ₂] = [B₁ B_o] · E,   E = [Σ₁  WΣ₂; 0  RΣ₂]
/// ```
///
/// and only the small `(k+l)×(k+l)` matrix `E` is decomposed. Falls back to
/// [`merge_pair_naive`] when `k + l` exceeds the basis dimension.
pub fn merge_pair_qr(
    f1: &SvdFactor,
    f2: &SvdFactor,
    orient: MergeOrientation,
    trunc: impl Into<Truncation>,
) -> Result<SvdFactor> {
    let trunc = trunc.into();
    let (b1, b2) = bases(f1, f2, orient)?;
    let (k, l) = (f1.rank(), f2.rank());
    if k + l > b1.rows() {
        return merge_pair_naive(f1, f2, orient, trunc);
    }

    let (w, b_o, r) = orthogonal_complement(b1, b2)?;

    let size = k + l;
    let mut e = DenseMatrix::zeros(size, size);
    for (i, &s) in f1.sigma().iter().enumerate() {
        e.set(i, i, s);
    }
    for (j, &s2) in f2.sigma().iter().enumerate() {
        for i in 0..k {
            e.set(i, k + j, w.get(i, j) * s2);
        }
        for i in 0..l {
            e.set(k + i, k + j, r.get(i, j) * s2);
        }
    }

    let e_svd = trunc.apply(&full_svd(&e)?)?;
    let degenerate = e_svd.is_degenerate();
    let (u_e, sigma, _) = e_svd.into_parts();
    let u_e = u_e.expect("full svd carries u");
    let rank = sigma.len();

    // [B₁ B_o]·U_E, only for the retained columns
    let top = u_e.row_block(0, k);
    let bottom = u_e.row_block(k, l);
    let mut basis = b1.matmul(&top)?;
    basis.add_assign(&b_o.matmul(&bottom)?)?;
    debug_assert_eq!(basis.cols(), rank);
    Ok(mark(orient.wrap(basis, sigma), degenerate))
}

fn mark(f: SvdFactor, degenerate: bool) -> SvdFactor {
    if degenerate {
        crate::factor::mark_degenerate(f)
    } else {
        f
    }
}

/// Returns `(W, B_o, R)` with `B₂ ≈ B₁W + B_oR` and `[B₁ B_o]` orthonormal.
/// Requires `B₁.cols() + B₂.cols() ≤ B₁.rows()`.
fn orthogonal_complement(
    b1: &DenseMatrix,
    b2: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    let mut w = b1.t_matmul(b2)?;
    let mut q = b2.sub(&b1.matmul(&w)?)?;
    let (mut b_o, mut r) = qr_thin(&q)?;

    if cross_coherence(b1, &b_o) > REORTH_TOL {
        // second block Gram-Schmidt pass
        let w2 = b1.t_matmul(&q)?;
        q = q.sub(&b1.matmul(&w2)?)?;
        w.add_assign(&w2)?;
        (b_o, r) = qr_thin(&q)?;
    }
    if cross_coherence(b1, &b_o) > REORTH_TOL {
        // B₂ is (numerically) inside span(B₁): the complement directions carry
        // no weight, but they still have to be orthogonal to B₁.
        b_o = complete_basis(b1, &b_o);
        r = b_o.t_matmul(&q)?;
    }
    Ok((w, b_o, r))
}

fn cross_coherence(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.t_matmul(b).map(|m| m.max_abs()).unwrap_or(f64::INFINITY)
}

/// Modified Gram-Schmidt of the columns of `cand` against `fixed` (and each
/// other), replacing collapsed columns by the coordinate vector least covered
/// by the basis built so far.
fn complete_basis(fixed: &DenseMatrix, cand: &DenseMatrix) -> DenseMatrix {
    let dim = fixed.rows();
    let mut basis: Vec<Vec<f64>> = (0..fixed.cols()).map(|j| fixed.col_vec(j)).collect();
    let mut coverage: Vec<f64> = (0..dim)
        .map(|i| fixed.row(i).iter().map(|x| x * x).sum())
        .collect();
    let mut out = Vec::with_capacity(cand.cols());
    for j in 0..cand.cols() {
        let mut x = cand.col_vec(j);
        if !orthonormalize_against(&mut x, &basis, 0.5) {
            let t = (0..dim)
                .min_by(|&a, &b| coverage[a].total_cmp(&coverage[b]))
                .expect("nonempty dimension");
            x = vec![0.0; dim];
            x[t] = 1.0;
            // residual norm is at least 1/sqrt(dim) for the least covered coordinate
            let ok = orthonormalize_against(&mut x, &basis, 1e-6);
            debug_assert!(ok, "coordinate completion failed");
        }
        for (c, xi) in coverage.iter_mut().zip(&x) {
            *c += xi * xi;
        }
        basis.push(x.clone());
        out.push(x);
    }
    DenseMatrix::from_fn(dim, out.len(), |i, j| out[j][i])
}

/// Two projection passes followed by normalization. Returns false when the
/// residual falls below `min_ratio` of the original norm.
fn orthonormalize_against(x: &mut [f64], basis: &[Vec<f64>], min_ratio: f64) -> bool {
    let start = norm(x);
    if start == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let dot: f64 = x.iter().zip(b).map(|(a, b)| a * b).sum();
            x.iter_mut().zip(b).for_each(|(a, b)| *a -= dot * b);
        }
    }
    let n = norm(x);
    if n < min_ratio * start {
        return false;
    }
    x.iter_mut().for_each(|a| *a /= n);
    true
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}
