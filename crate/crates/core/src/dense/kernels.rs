use faer::MatRef;

use super::DenseMatrix;
use crate::error::{HsvdError, Result};
use crate::factor::SvdFactor;

/// Thin SVD `A = U·diag(Σ)·Vᵀ` with `p = min(rows, cols)` singular triplets,
/// Σ nonincreasing.
pub fn full_svd(a: &DenseMatrix) -> Result<SvdFactor> {
    let (rows, cols) = a.shape();
    let svd = a
        .as_faer()
        .thin_svd()
        .map_err(|_| HsvdError::Decomposition { rows, cols })?;
    let mut sigma: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let mut u = DenseMatrix::from_faer(svd.U());
    let mut v = DenseMatrix::from_faer(svd.V());
    if !sigma.iter().all(|s| s.is_finite()) {
        return Err(HsvdError::Decomposition { rows, cols });
    }
    if sigma.windows(2).any(|w| w[0] < w[1]) {
        let order = descending_order(&sigma);
        sigma = order.iter().map(|&i| sigma[i]).collect();
        u = permute_cols(&u, &order);
        v = permute_cols(&v, &order);
    }
    for s in sigma.iter_mut() {
        // roundoff can leave a tiny negative zero-singular-value
        *s = s.max(0.0);
    }
    Ok(SvdFactor::from_parts(Some(u), sigma, Some(v)))
}

/// Singular values only, nonincreasing. Cheaper than [`full_svd`].
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let (rows, cols) = a.shape();
    let mut s = a
        .as_faer()
        .singular_values()
        .map_err(|_| HsvdError::Decomposition { rows, cols })?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s.into_iter().map(|x| x.max(0.0)).collect())
}

/// Thin Householder QR: `Q` is `rows×p` with orthonormal columns and `R` is
/// `p×cols` upper triangular (trapezoidal when `rows < cols`), `p = min(rows, cols)`.
pub fn qr_thin(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (q, r) = qr_thin_ref(a.as_faer());
    if !q.data().iter().chain(r.data()).all(|x| x.is_finite()) {
        return Err(HsvdError::Decomposition {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok((q, r))
}

fn qr_thin_ref(a: MatRef<'_, f64>) -> (DenseMatrix, DenseMatrix) {
    let qr = a.qr();
    let q = DenseMatrix::from_faer(qr.compute_thin_Q().as_ref());
    let r = DenseMatrix::from_faer(qr.thin_R());
    (q, r)
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

fn permute_cols(m: &DenseMatrix, order: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(m.rows(), order.len(), |i, j| m.get(i, order[j]))
}
