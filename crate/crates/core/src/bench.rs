//! Timing and accuracy harness: block-grid sweeps against the full SVD.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::costmodel::CostEstimate;
use crate::dense::{full_svd, DenseMatrix};
use crate::error::{HsvdError, Result};
use crate::factor::{rank_k_error_against, MatConfig, SvdFactor};
use crate::hierarchy::{hierarchical_svd, recover_left_vectors, slices};
use crate::refine::refine_factors;

/// JSON schema every serialized [`BenchReport`] satisfies.
pub const BENCH_REPORT_SCHEMA: &str = include_str!("../schema/bench_report.schema.json");

/// Singular values kept per grid entry.
pub const SIGMA_HEAD_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchReport {
    pub matrix_dims: (usize, usize),
    pub gamma: f64,
    pub epsilon: f64,
    pub repeats: usize,
    /// Threads the dense kernels were allowed, same for both sides.
    pub kernel_threads: usize,
    pub grid: Vec<GridEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub block_rows: usize,
    pub block_cols: usize,
    #[serde(flatten)]
    pub outcome: EntryOutcome,
}

/// Either every metric or an error message, never a mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryOutcome {
    Metrics(EntryMetrics),
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryMetrics {
    pub recovered_rank: usize,
    pub wall_time_mat_s: f64,
    pub wall_time_mat_refined_s: f64,
    pub wall_time_full_svd_s: f64,
    pub speedup: f64,
    pub speedup_refined: f64,
    pub rel_error: f64,
    pub rel_error_refined: f64,
    pub sigma_head: Vec<f64>,
    pub predicted: CostEstimate,
}

impl GridEntry {
    pub fn metrics(&self) -> Option<&EntryMetrics> {
        match &self.outcome {
            EntryOutcome::Metrics(m) => Some(m),
            EntryOutcome::Failed { .. } => None,
        }
    }
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn best_speedup(&self) -> Option<&GridEntry> {
        self.grid
            .iter()
            .filter(|e| e.metrics().is_some())
            .max_by(|a, b| {
                let sa = a.metrics().map_or(0.0, |m| m.speedup);
                let sb = b.metrics().map_or(0.0, |m| m.speedup);
                sa.total_cmp(&sb)
            })
    }
}

/// Runs the pipeline for every `(d, c)` in `grid`, `repeats` times each.
///
/// Every repeat times one full SVD of `x` (the baseline), the block pipeline
/// with left-vector recovery, and refinement of the same block output. Times
/// are means over repeats; errors are rank-k errors at the recovered rank.
/// Failures are recorded in their entry and the sweep continues.
pub fn run_benchmark(
    x: &DenseMatrix,
    cfg: &MatConfig,
    grid: &[(usize, usize)],
    repeats: usize,
) -> Result<BenchReport> {
    if grid.is_empty() {
        return Err(HsvdError::contract("benchmark grid is empty"));
    }
    if repeats == 0 {
        return Err(HsvdError::contract("repeats must be at least 1"));
    }
    cfg.validate()?;

    let entries = grid
        .iter()
        .map(|&(d, c)| {
            let outcome = match run_entry(x, cfg, d, c, repeats) {
                Ok(m) => EntryOutcome::Metrics(m),
                Err(e) => EntryOutcome::Failed {
                    error: e.to_string(),
                },
            };
            GridEntry {
                block_rows: d,
                block_cols: c,
                outcome,
            }
        })
        .collect();

    Ok(BenchReport {
        matrix_dims: x.shape(),
        gamma: cfg.gamma,
        epsilon: cfg.epsilon,
        repeats,
        kernel_threads: crate::kernel_threads(),
        grid: entries,
    })
}

fn run_entry(x: &DenseMatrix, base: &MatConfig, d: usize, c: usize, repeats: usize) -> Result<EntryMetrics> {
    let cfg = MatConfig {
        row_block: d,
        col_block: c,
        ..*base
    };
    cfg.validate()?;

    let mut t_full = 0.0;
    let mut t_mat = 0.0;
    let mut t_refined = 0.0;
    let mut last: Option<(SvdFactor, SvdFactor, SvdFactor)> = None;
    for _ in 0..repeats {
        let (reference, dt) = timed(|| full_svd(x))?;
        t_full += dt;

        let (partial, dt_hier) = timed(|| hierarchical_svd(x, &cfg))?;
        let v_hat = partial.v().expect("row merge carries v");
        let (approx, dt_recover) = timed(|| recover_left_vectors(x, v_hat))?;
        let (refined, dt_refine) =
            timed(|| refine_factors(x, v_hat, partial.sigma(), cfg.epsilon, cfg.max_iters))?;
        t_mat += dt_hier + dt_recover;
        t_refined += dt_hier + dt_refine;
        last = Some((reference, approx, refined.factor));
    }
    let n = repeats as f64;
    let (t_full, t_mat, t_refined) = (t_full / n, t_mat / n, t_refined / n);
    let (reference, approx, refined) = last.expect("at least one repeat");

    let rank = approx.rank();
    let rel_error = rank_k_error_against(&reference, &approx, rank)?;
    let rel_error_refined = rank_k_error_against(&reference, &refined, rank.min(refined.rank()))?;

    let col_slices = slices(x.cols(), c)?.len();
    let tall_cols = x.rows().min(x.cols());
    let partitions = col_slices.min(tall_cols);
    let width = (tall_cols as f64 / partitions as f64).floor() as usize;
    let predicted = CostEstimate::new(x.rows(), x.cols(), partitions, rank.min(width).max(1))?;

    Ok(EntryMetrics {
        recovered_rank: rank,
        wall_time_mat_s: t_mat,
        wall_time_mat_refined_s: t_refined,
        wall_time_full_svd_s: t_full,
        speedup: t_full / t_mat,
        speedup_refined: t_full / t_refined,
        rel_error,
        rel_error_refined,
        sigma_head: approx.sigma().iter().take(SIGMA_HEAD_LEN).copied().collect(),
        predicted,
    })
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Parses `"d1xc1,d2xc2,..."`.
pub fn parse_grid(spec: &str) -> Result<Vec<(usize, usize)>> {
    let grid = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (d, c) = item
                .split_once(['x', 'X'])
                .ok_or_else(|| HsvdError::Format(format!("grid entry '{item}' is not DxC")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|v| *v > 0)
                    .ok_or_else(|| HsvdError::Format(format!("bad block size '{s}' in '{item}'")))
            };
            Ok((parse(d)?, parse(c)?))
        })
        .collect::<Result<Vec<_>>>()?;
    if grid.is_empty() {
        return Err(HsvdError::Format("block grid is empty".into()));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_low_rank, SpectrumSpec};

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("64x8, 32X4").unwrap(), vec![(64, 8), (32, 4)]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid(" , ").is_err());
        assert!(parse_grid("64").is_err());
        assert!(parse_grid("0x4").is_err());
        assert!(parse_grid("ax4").is_err());
    }

    #[test]
    fn contract_errors() {
        let x = crate::datagen::gaussian_matrix(8, 4, 1);
        let cfg = MatConfig::default();
        assert!(run_benchmark(&x, &cfg, &[], 1).is_err());
        assert!(run_benchmark(&x, &cfg, &[(8, 4)], 0).is_err());
    }

    #[test]
    fn failed_entries_do_not_stop_the_sweep() {
        let x = crate::datagen::gaussian_matrix(16, 8, 1);
        let cfg = MatConfig::new(0.1, 16, 8);
        let report = run_benchmark(&x, &cfg, &[(0, 4), (16, 8)], 1).unwrap();
        assert!(matches!(report.grid[0].outcome, EntryOutcome::Failed { .. }));
        assert!(report.grid[1].metrics().is_some());
    }

    #[test]
    fn single_block_is_exact() {
        let spec = SpectrumSpec::exponential(0.6, 6, 0.0, 4);
        let (x, _) = gen_low_rank(64, 24, &spec).unwrap();
        let cfg = MatConfig::new(1e-3, 64, 24);
        let report = run_benchmark(&x, &cfg, &[(64, 24)], 2).unwrap();
        let m = report.grid[0].metrics().unwrap();
        assert!(m.rel_error <= 1e-10);
        assert!(m.rel_error_refined <= 1e-10);
        assert!(m.speedup > 0.0);
        assert_eq!(report.repeats, 2);
        assert_eq!(m.sigma_head.len(), m.recovered_rank);
    }

    #[test]
    fn json_roundtrip() {
        let x = crate::datagen::gaussian_matrix(20, 10, 3);
        let cfg = MatConfig::new(0.2, 10, 5);
        let report = run_benchmark(&x, &cfg, &[(10, 5), (0, 1)], 1).unwrap();
        let json = report.to_json();
        let back: BenchReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value["grid"][0]["predicted"]["P"].is_u64());
        assert!(value["grid"][1]["error"].is_string());
        assert!(value["grid"][1].get("rel_error").is_none());
    }
}
