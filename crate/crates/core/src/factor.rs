//! Truncated SVD factors, the relative-threshold truncation rule and the
//! rank-k error metric.

use serde::{Deserialize, Serialize};

use crate::dense::{full_svd, DenseMatrix};
use crate::error::{HsvdError, Result};

/// `U·diag(Σ)·Vᵀ`, possibly with one side dropped.
///
/// Merges only propagate the side they need, so a factor may carry just
/// `(U, Σ)` or just `(Σ, V)`. Σ is nonincreasing and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactor {
    u: Option<DenseMatrix>,
    sigma: Vec<f64>,
    v: Option<DenseMatrix>,
    degenerate: bool,
}

impl SvdFactor {
    /// Validating constructor. Orthonormality of `u`/`v` is the caller's
    /// responsibility; see [`SvdFactor::orthonormality_defect`].
    pub fn new(u: Option<DenseMatrix>, sigma: Vec<f64>, v: Option<DenseMatrix>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(HsvdError::contract("factor needs at least one singular value"));
        }
        if u.is_none() && v.is_none() {
            return Err(HsvdError::contract("factor needs u or v"));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(HsvdError::contract("singular values must be finite and nonnegative"));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(HsvdError::contract("singular values must be nonincreasing"));
        }
        for (side, m) in [("u", &u), ("v", &v)] {
            if let Some(m) = m {
                if m.cols() != sigma.len() {
                    return Err(HsvdError::DimensionMismatch(format!(
                        "{side} has {} columns for rank {}",
                        m.cols(),
                        sigma.len()
                    )));
                }
            }
        }
        Ok(SvdFactor {
            u,
            sigma,
            v,
            degenerate: false,
        })
    }

    pub(crate) fn from_parts(u: Option<DenseMatrix>, sigma: Vec<f64>, v: Option<DenseMatrix>) -> Self {
        debug_assert!(u.is_some() || v.is_some());
        debug_assert!(u.as_ref().is_none_or(|m| m.cols() == sigma.len()));
        debug_assert!(v.as_ref().is_none_or(|m| m.cols() == sigma.len()));
        SvdFactor {
            u,
            sigma,
            v,
            degenerate: false,
        }
    }

    pub fn u(&self) -> Option<&DenseMatrix> {
        self.u.as_ref()
    }

    pub fn v(&self) -> Option<&DenseMatrix> {
        self.v.as_ref()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Set when the factor came from an all-zero input.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn into_parts(self) -> (Option<DenseMatrix>, Vec<f64>, Option<DenseMatrix>) {
        (self.u, self.sigma, self.v)
    }

    pub fn without_u(mut self) -> Self {
        assert!(self.v.is_some(), "cannot drop u from a factor without v");
        self.u = None;
        self
    }

    pub fn without_v(mut self) -> Self {
        assert!(self.u.is_some(), "cannot drop v from a factor without u");
        self.v = None;
        self
    }

    /// Leading `k` triplets.
    pub fn leading(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.rank() {
            return Err(HsvdError::contract(format!(
                "cannot take {k} leading triplets of a rank-{} factor",
                self.rank()
            )));
        }
        if k == self.rank() {
            return Ok(self.clone());
        }
        Ok(SvdFactor {
            u: self.u.as_ref().map(|m| m.leading_cols(k)),
            sigma: self.sigma[..k].to_vec(),
            v: self.v.as_ref().map(|m| m.leading_cols(k)),
            degenerate: self.degenerate,
        })
    }

    /// Largest deviation of `uᵀu` and `vᵀv` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        [&self.u, &self.v]
            .into_iter()
            .flatten()
            .map(orthonormality_error)
            .fold(0.0, f64::max)
    }

    /// Flips each triplet so the largest-magnitude entry of its left vector
    /// (right vector when `u` is absent) is positive. Used to compare factors.
    pub fn normalize_signs(&self) -> Self {
        let reference = self.u.as_ref().or(self.v.as_ref()).expect("u or v present");
        let signs: Vec<f64> = (0..self.rank())
            .map(|j| {
                let col = reference.col_vec(j);
                let pivot = col
                    .iter()
                    .copied()
                    .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                    .unwrap_or(0.0);
                if pivot < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        SvdFactor {
            u: self.u.as_ref().map(|m| m.scale_cols(&signs)),
            sigma: self.sigma.clone(),
            v: self.v.as_ref().map(|m| m.scale_cols(&signs)),
            degenerate: self.degenerate,
        }
    }
}

pub(crate) fn mark_degenerate(mut f: SvdFactor) -> SvdFactor {
    f.degenerate = true;
    f
}

/// `max |QᵀQ − I|`
pub fn orthonormality_error(q: &DenseMatrix) -> f64 {
    let gram = q.t_matmul(q).expect("gram of conformable matrix");
    let mut worst = 0.0_f64;
    for i in 0..gram.rows() {
        for j in 0..gram.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram.get(i, j) - target).abs());
        }
    }
    worst
}

/// Parameters of the merge-and-truncate pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatConfig {
    /// Relative truncation threshold: triplets with `σ < gamma·σ₁` are dropped.
    pub gamma: f64,
    /// Rows per row slice (`d`).
    pub row_block: usize,
    /// Columns per column slice (`c`).
    pub col_block: usize,
    /// Refinement stopping tolerance on the relative Σ change.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Optional hard cap applied after every truncation.
    pub max_rank: Option<usize>,
}

impl Default for MatConfig {
    fn default() -> Self {
        MatConfig {
            gamma: 1e-2,
            row_block: usize::MAX,
            col_block: usize::MAX,
            epsilon: 1e-3,
            max_iters: 10,
            max_rank: None,
        }
    }
}

impl MatConfig {
    pub fn new(gamma: f64, row_block: usize, col_block: usize) -> Self {
        MatConfig {
            gamma,
            row_block,
            col_block,
            ..MatConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(HsvdError::contract(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if !(self.epsilon > 0.0) {
            return Err(HsvdError::contract(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.max_iters == 0 {
            return Err(HsvdError::contract("max_iters must be at least 1"));
        }
        if self.row_block == 0 || self.col_block == 0 {
            return Err(HsvdError::contract("block sizes must be at least 1"));
        }
        if self.max_rank == Some(0) {
            return Err(HsvdError::contract("max_rank must be at least 1"));
        }
        Ok(())
    }
}

/// Truncation settings shared by every merge: relative threshold plus an
/// optional rank cap. A bare `f64` converts to a threshold with no cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub gamma: f64,
    pub max_rank: Option<usize>,
}

impl Truncation {
    pub fn apply(&self, f: &SvdFactor) -> Result<SvdFactor> {
        truncate_factor(f, self.gamma, self.max_rank)
    }
}

impl From<f64> for Truncation {
    fn from(gamma: f64) -> Self {
        Truncation {
            gamma,
            max_rank: None,
        }
    }
}

impl From<&MatConfig> for Truncation {
    fn from(cfg: &MatConfig) -> Self {
        Truncation {
            gamma: cfg.gamma,
            max_rank: cfg.max_rank,
        }
    }
}

/// Keeps the leading triplets with `σᵢ ≥ gamma·σ₁` (σ₁ is this factor's own
/// largest value), then applies `max_rank`.
///
/// An all-zero Σ yields a rank-1 zero factor flagged as degenerate.
pub fn truncate_factor(f: &SvdFactor, gamma: f64, max_rank: Option<usize>) -> Result<SvdFactor> {
    if f.sigma.is_empty() {
        return Err(HsvdError::contract("cannot truncate an empty factor"));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(HsvdError::contract(format!("gamma {gamma} outside [0, 1]")));
    }
    if max_rank == Some(0) {
        return Err(HsvdError::contract("max_rank must be at least 1"));
    }
    let sigma1 = f.sigma[0];
    if sigma1 == 0.0 {
        let mut out = f.leading(1)?;
        out.sigma[0] = 0.0;
        out.degenerate = true;
        return Ok(out);
    }
    let threshold = gamma * sigma1;
    let mut keep = f.sigma.iter().take_while(|&&s| s >= threshold).count();
    if let Some(cap) = max_rank {
        keep = keep.min(cap);
    }
    f.leading(keep.max(1))
}

/// `U·diag(Σ)·Vᵀ`
pub fn reconstruct(f: &SvdFactor) -> Result<DenseMatrix> {
    let (u, v) = match (&f.u, &f.v) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(HsvdError::contract("reconstruction needs both u and v")),
    };
    u.scale_cols(&f.sigma).matmul_t(v)
}

/// `‖X_k − X̂_k‖_F / ‖X_k‖_F` where `X_k` is the rank-k truncation of the
/// exact SVD of `x` and `X̂_k` the rank-k truncation of `approx`.
pub fn rank_k_error(x: &DenseMatrix, approx: &SvdFactor, k: usize) -> Result<f64> {
    let reference = full_svd(x)?;
    rank_k_error_against(&reference, approx, k)
}

/// [`rank_k_error`] with a precomputed exact SVD, for repeated comparisons.
pub fn rank_k_error_against(reference: &SvdFactor, approx: &SvdFactor, k: usize) -> Result<f64> {
    if approx.u.is_none() || approx.v.is_none() {
        return Err(HsvdError::contract("error metric needs a factor with u and v"));
    }
    if k == 0 || k > approx.rank() || k > reference.rank() {
        return Err(HsvdError::contract(format!(
            "k = {k} out of range (approx rank {}, reference rank {})",
            approx.rank(),
            reference.rank()
        )));
    }
    let exact = reconstruct(&reference.leading(k)?)?;
    let denom = exact.frobenius_norm();
    if denom == 0.0 {
        return Err(HsvdError::UndefinedMetric { k });
    }
    let approx_k = reconstruct(&approx.leading(k)?)?;
    Ok(exact.sub(&approx_k)?.frobenius_norm() / denom)
}
