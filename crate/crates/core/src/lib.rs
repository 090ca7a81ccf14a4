//! Approximate truncated SVD of dense low-rank matrices by hierarchical
//! merge-and-truncate.
//!
//! The matrix is split into a grid of blocks, each block gets a truncated SVD,
//! and the block factors are merged pairwise along a binary tree, truncating
//! after every merge. See [`hierarchy::hierarchical_svd`] for the pipeline,
//! [`refine::refine_factors`] for the optional accuracy pass and
//! [`bench::run_benchmark`] for the timing harness.

pub mod bench;
pub mod cli;
pub mod costmodel;
pub mod datagen;
pub mod dense;
pub mod error;
pub mod factor;
pub mod hierarchy;
pub mod io;
pub mod merge;
pub mod refine;

pub use dense::{frobenius_norm, full_svd, qr_thin, singular_values, DenseMatrix};
pub use error::{HsvdError, Result};
pub use factor::{rank_k_error, reconstruct, truncate_factor, MatConfig, SvdFactor, Truncation};
pub use hierarchy::{hierarchical_svd, hierarchical_svd_full, recover_left_vectors, tree_merge};
pub use merge::{merge_pair_naive, merge_pair_qr, MergeOrientation};
pub use refine::{refine_factors, RefineResult};

/// Pins the thread count used by the dense kernels (`1` = sequential).
pub fn set_kernel_threads(threads: usize) {
    let par = if threads <= 1 {
        faer::Par::Seq
    } else {
        faer::Par::rayon(threads)
    };
    faer::set_global_parallelism(par);
}

/// Thread count the dense kernels currently use.
pub fn kernel_threads() -> usize {
    match faer::get_global_parallelism() {
        faer::Par::Seq => 1,
        faer::Par::Rayon(n) => n.get(),
    }
}
