#![allow(dead_code)]

use hsvd::datagen::{gaussian_matrix, random_orthonormal};
use hsvd::{DenseMatrix, SvdFactor};

/// Singular values by one-sided Jacobi rotations, sorted descending.
/// Kept independent of the library kernels.
pub fn jacobi_sigma(a: &DenseMatrix) -> Vec<f64> {
    let a = if a.rows() < a.cols() { a.transpose() } else { a.clone() };
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col_vec(j)).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (cols[p][i], cols[q][i]);
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Textbook triple loop.
pub fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|l| a.get(i, l) * b.get(l, j)).sum())
}

pub fn fro(a: &DenseMatrix) -> f64 {
    a.data().iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `max |QᵀQ − I|`, computed with the naive product.
pub fn gram_defect(q: &DenseMatrix) -> f64 {
    let g = naive_matmul(&q.transpose(), q);
    max_abs_diff(&g, &DenseMatrix::identity(q.cols()))
}

/// Largest entrywise gap over the common prefix, relative to `scale`.
pub fn prefix_gap(a: &[f64], b: &[f64], scale: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// `U·diag(σ)·Vᵀ` with random orthonormal `U`, `V`.
pub fn with_spectrum(rows: usize, cols: usize, sigma: &[f64], seed: u64) -> DenseMatrix {
    let u = random_orthonormal(rows, sigma.len(), seed);
    let v = random_orthonormal(cols, sigma.len(), seed.wrapping_add(1));
    let us = DenseMatrix::from_fn(rows, sigma.len(), |i, j| u.get(i, j) * sigma[j]);
    naive_matmul(&us, &v.transpose())
}

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    gaussian_matrix(rows, cols, seed)
}

pub fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn u_factor(u: DenseMatrix, sigma: Vec<f64>) -> SvdFactor {
    SvdFactor::new(Some(u), sigma, None).unwrap()
}

pub fn v_factor(v: DenseMatrix, sigma: Vec<f64>) -> SvdFactor {
    SvdFactor::new(None, sigma, Some(v)).unwrap()
}
