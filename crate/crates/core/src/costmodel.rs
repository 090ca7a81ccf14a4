//! Flop-count model for a single-level column partition.
//!
//! A tall `m×n` matrix cut into `P` column blocks of `s = n/P` columns costs
//! `P(6ms² + 16s³)` for the block SVDs plus `(P−1)(14mk² + 176k³)` for the
//! merges when every merge keeps rank `k`. Since `k ≤ s` this is bounded by
//! `20mn²/P + 192n³/P²`, against `6mn² + 16n³` for the full SVD.

use serde::{Deserialize, Serialize};

use crate::error::{HsvdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub flops_full: f64,
    pub flops_mat: f64,
    pub bound: f64,
    /// Column partitions.
    #[serde(rename = "P")]
    pub partitions: usize,
    /// Columns per block, `n/P`.
    pub s: f64,
    /// Rank kept by every merge.
    pub k: usize,
}

impl CostEstimate {
    /// Model for an `rows×cols` matrix with `partitions` column blocks and
    /// merge rank `k`. The matrix is put in tall orientation first.
    pub fn new(rows: usize, cols: usize, partitions: usize, k: usize) -> Result<Self> {
        let (m, n) = tall(rows, cols);
        if partitions == 0 || partitions > n {
            return Err(HsvdError::contract(format!(
                "{partitions} partitions for {n} columns"
            )));
        }
        let s = n as f64 / partitions as f64;
        Ok(CostEstimate {
            flops_full: flops_full_svd(m, n)?,
            flops_mat: flops_mat_partition(m, n, partitions, k)?,
            bound: speedup_bound(m, n, partitions)?,
            partitions,
            s,
            k,
        })
    }

    /// Predicted speedup of the partitioned pipeline over the full SVD.
    pub fn predicted_speedup(&self) -> f64 {
        self.flops_full / self.flops_mat
    }
}

fn tall(rows: usize, cols: usize) -> (usize, usize) {
    if rows >= cols {
        (rows, cols)
    } else {
        (cols, rows)
    }
}

/// `6mn² + 16n³`, for `m ≥ n ≥ 1`.
pub fn flops_full_svd(m: usize, n: usize) -> Result<f64> {
    if n == 0 || m < n {
        return Err(HsvdError::contract(format!(
            "full SVD model needs m >= n >= 1, got {m}x{n}"
        )));
    }
    let (m, n) = (m as f64, n as f64);
    Ok(6.0 * m * n * n + 16.0 * n.powi(3))
}

/// `P(6ms² + 16s³) + (P−1)(14mk² + 176k³)` with real-valued `s = n/P`.
pub fn flops_mat_partition(m: usize, n: usize, partitions: usize, k: usize) -> Result<f64> {
    if partitions == 0 {
        return Err(HsvdError::contract("at least one partition required"));
    }
    let p = partitions as f64;
    let s = n as f64 / p;
    if s < 1.0 {
        return Err(HsvdError::contract(format!(
            "{partitions} partitions leave fewer than one column each"
        )));
    }
    let kf = k as f64;
    if kf > s {
        return Err(HsvdError::contract(format!(
            "merge rank {k} exceeds block width {s}"
        )));
    }
    let m = m as f64;
    Ok(p * (6.0 * m * s * s + 16.0 * s.powi(3)) + (p - 1.0) * (14.0 * m * kf * kf + 176.0 * kf.powi(3)))
}

/// `20mn²/P + 192n³/P²`
pub fn speedup_bound(m: usize, n: usize, partitions: usize) -> Result<f64> {
    if partitions == 0 {
        return Err(HsvdError::contract("at least one partition required"));
    }
    let (m, n, p) = (m as f64, n as f64, partitions as f64);
    Ok(20.0 * m * n * n / p + 192.0 * n.powi(3) / (p * p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_svd_flops() {
        assert_eq!(flops_full_svd(4, 2).unwrap(), 224.0);
        assert_eq!(flops_full_svd(1, 1).unwrap(), 22.0);
        assert_eq!(flops_full_svd(132098, 1024).unwrap(), 848_268_623_872.0);
        assert!(flops_full_svd(2, 4).is_err());
        assert!(flops_full_svd(3, 0).is_err());
    }

    #[test]
    fn partition_flops() {
        assert_eq!(flops_mat_partition(100, 8, 2, 2).unwrap(), 28_256.0);
        for k in [0, 1, 5, 9] {
            assert_eq!(
                flops_mat_partition(37, 9, 1, k).unwrap(),
                flops_full_svd(37, 9).unwrap()
            );
        }
        let mat = flops_mat_partition(100_000, 1024, 64, 16).unwrap();
        assert!(mat < flops_full_svd(100_000, 1024).unwrap());
        assert!(flops_mat_partition(100, 8, 2, 5).is_err());
        assert!(flops_mat_partition(100, 8, 0, 1).is_err());
        assert!(flops_mat_partition(100, 8, 9, 0).is_err());
    }

    #[test]
    fn non_integer_block_width() {
        // s = 10/3
        let got = flops_mat_partition(50, 10, 3, 2).unwrap();
        let s: f64 = 10.0 / 3.0;
        let want = 3.0 * (6.0 * 50.0 * s * s + 16.0 * s.powi(3)) + 2.0 * (14.0 * 50.0 * 4.0 + 176.0 * 8.0);
        assert!((got - want).abs() < 1e-9 * want);
    }

    #[test]
    fn bound_values() {
        assert_eq!(speedup_bound(4, 2, 1).unwrap(), 1856.0);
        let mut last = f64::INFINITY;
        for p in 1..200 {
            let b = speedup_bound(1000, 64, p).unwrap();
            assert!(b < last);
            last = b;
        }
        assert!(speedup_bound(1000, 64, 1_000_000).unwrap() < 1e-2 * speedup_bound(1000, 64, 1).unwrap());
    }

    #[test]
    fn estimate_swaps_to_tall_orientation() {
        let a = CostEstimate::new(16, 1000, 4, 3).unwrap();
        let b = CostEstimate::new(1000, 16, 4, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.s, 4.0);
        assert!(a.predicted_speedup() > 0.0);
        assert!(CostEstimate::new(1000, 16, 17, 1).is_err());
    }
}
