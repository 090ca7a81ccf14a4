//! Alternating-SVD refinement of an approximate right singular subspace.

use crate::dense::{full_svd, DenseMatrix};
use crate::error::{HsvdError, Result};
use crate::factor::{orthonormality_error, MatConfig, SvdFactor};

const ORTHONORMAL_INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RefineResult {
    /// Full `(Û, Σ̂, V̂)` after the last iteration.
    pub factor: SvdFactor,
    pub iterations: usize,
    /// Relative Σ change of the last iteration.
    pub final_error: f64,
    /// False when `max_iters` was hit with the change still above tolerance.
    pub converged: bool,
}

/// Repeats
///
/// ```text
/// Ũᵢ = left vectors of SVD(X·V̂)
/// Ũ, Σ̃, Ṽ = SVD(Ũᵢᵀ·X)
/// change = ‖Σ̂ − Σ̃‖₂ / ‖Σ̂‖₂,  Σ̂ ← Σ̃,  V̂ ← Ṽ
/// ```
///
/// while the change exceeds `epsilon` and fewer than `max_iters` passes ran,
/// then returns `Û = Ũᵢ·Ũ`. Σ vectors of different length are compared with
/// the shorter one zero-padded.
pub fn refine_factors(
    x: &DenseMatrix,
    v_hat: &DenseMatrix,
    sigma_hat: &[f64],
    epsilon: f64,
    max_iters: usize,
) -> Result<RefineResult> {
    if !(epsilon > 0.0) {
        return Err(HsvdError::contract(format!("epsilon {epsilon} must be positive")));
    }
    if max_iters == 0 {
        return Err(HsvdError::contract("max_iters must be at least 1"));
    }
    if v_hat.rows() != x.cols() {
        return Err(HsvdError::DimensionMismatch(format!(
            "right basis has {} rows for a matrix with {} columns",
            v_hat.rows(),
            x.cols()
        )));
    }
    if sigma_hat.len() != v_hat.cols() {
        return Err(HsvdError::DimensionMismatch(format!(
            "{} singular values for {} basis vectors",
            sigma_hat.len(),
            v_hat.cols()
        )));
    }
    let defect = orthonormality_error(v_hat);
    if defect > ORTHONORMAL_INPUT_TOL {
        return Err(HsvdError::contract(format!(
            "right basis is not orthonormal (max |VᵀV − I| = {defect:e})"
        )));
    }

    let mut sigma = sigma_hat.to_vec();
    let mut v = v_hat.clone();
    let mut iterations = 0;
    loop {
        let left = full_svd(&x.matmul(&v)?)?;
        let u_i = left.u().expect("full svd carries u");
        let inner = full_svd(&u_i.t_matmul(x)?)?;
        let change = relative_change(&sigma, inner.sigma());
        iterations += 1;

        let (u_small, new_sigma, new_v) = inner.into_parts();
        sigma = new_sigma;
        v = new_v.expect("full svd carries v");
        if change <= epsilon || iterations >= max_iters {
            let u = u_i.matmul(&u_small.expect("full svd carries u"))?;
            return Ok(RefineResult {
                factor: SvdFactor::from_parts(Some(u), sigma, Some(v)),
                iterations,
                final_error: change,
                converged: change <= epsilon,
            });
        }
    }
}

/// Refines the `(Σ̂, V̂)` of `approx` with the tolerances from `cfg`.
pub fn refine(x: &DenseMatrix, approx: &SvdFactor, cfg: &MatConfig) -> Result<RefineResult> {
    let v = approx
        .v()
        .ok_or_else(|| HsvdError::contract("refinement needs a factor carrying v"))?;
    refine_factors(x, v, approx.sigma(), cfg.epsilon, cfg.max_iters)
}

/// `‖old − new‖₂ / ‖old‖₂` over zero-padded singular value vectors.
pub fn relative_change(old: &[f64], new: &[f64]) -> f64 {
    let len = old.len().max(new.len());
    let at = |s: &[f64], i: usize| s.get(i).copied().unwrap_or(0.0);
    let diff = (0..len)
        .map(|i| (at(old, i) - at(new, i)).powi(2))
        .sum::<f64>()
        .sqrt();
    let base = old.iter().map(|s| s * s).sum::<f64>().sqrt();
    if base == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / base
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::singular_values;
    use crate::testutil::{gaussian, low_rank, random_orthonormal};

    #[test]
    fn padded_change() {
        assert_eq!(relative_change(&[3.0, 4.0], &[3.0, 4.0]), 0.0);
        assert!((relative_change(&[3.0, 4.0], &[3.0]) - 0.8).abs() < 1e-15);
        assert!((relative_change(&[3.0], &[3.0, 4.0]) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(relative_change(&[0.0], &[0.0]), 0.0);
        assert!(relative_change(&[0.0], &[1.0]).is_infinite());
    }

    #[test]
    fn exact_subspace_is_a_fixed_point() {
        let x = gaussian(40, 15, 2);
        let top = full_svd(&x).unwrap().leading(5).unwrap();
        let r = refine_factors(&x, top.v().unwrap(), top.sigma(), 1e-3, 10).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.final_error <= 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn rotated_subspace_converges_to_true_sigma() {
        let sigma: Vec<f64> = vec![1.0, 0.6, 0.3, 0.1];
        let (x, truth) = low_rank(60, 20, &sigma, 3);
        let top = full_svd(&x).unwrap().leading(4).unwrap();
        // same subspace, mixed basis, perturbed Σ estimate
        let mixing = random_orthonormal(4, 4, 17);
        let v_mixed = top.v().unwrap().matmul(&mixing).unwrap();
        let guess = [0.9, 0.5, 0.2, 0.05];
        let r = refine_factors(&x, &v_mixed, &guess, 1e-12, 10).unwrap();
        for (a, b) in r.factor.sigma().iter().zip(&truth) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(r.factor.orthonormality_defect() < 1e-8);
    }

    #[test]
    fn sigma_never_exceeds_true_values() {
        let x = gaussian(30, 12, 5);
        let truth = singular_values(&x).unwrap();
        let v0 = random_orthonormal(12, 4, 6);
        let r = refine_factors(&x, &v0, &[1.0; 4], 1e-14, 3).unwrap();
        for (a, b) in r.factor.sigma().iter().zip(&truth) {
            assert!(*a <= b + 1e-10 * truth[0]);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let x = gaussian(30, 12, 5);
        let v0 = random_orthonormal(12, 3, 1);
        let r = refine_factors(&x, &v0, &[1.0; 3], 1e-300, 2).unwrap();
        assert_eq!(r.iterations, 2);
        assert!(!r.converged);
    }

    #[test]
    fn contract_checks() {
        let x = gaussian(10, 4, 1);
        let v = random_orthonormal(4, 2, 2);
        assert!(refine_factors(&x, &v, &[1.0, 0.5], 0.0, 5).is_err());
        assert!(refine_factors(&x, &v, &[1.0, 0.5], 1e-3, 0).is_err());
        assert!(refine_factors(&x, &v, &[1.0], 1e-3, 5).is_err());
        let skew = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]]);
        assert!(refine_factors(&x, &skew, &[1.0, 0.5], 1e-3, 5).is_err());
        let bad_rows = random_orthonormal(5, 2, 2);
        assert!(refine_factors(&x, &bad_rows, &[1.0, 0.5], 1e-3, 5).is_err());
    }
}
