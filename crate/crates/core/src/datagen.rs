//! Seeded synthetic matrices with prescribed singular spectra.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dense::{qr_thin, DenseMatrix};
use crate::error::{HsvdError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpectrumKind {
    /// `σᵢ = ratioⁱ⁻¹`
    Exponential { ratio: f64 },
    /// `σᵢ = i^(−exponent)`
    PowerLaw { exponent: f64 },
    /// Leading values given verbatim.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    /// Number of leading singular values following `kind`.
    pub rank: usize,
    /// Value of every singular value past `rank`.
    pub noise_floor: f64,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn exponential(ratio: f64, rank: usize, noise_floor: f64, seed: u64) -> Self {
        SpectrumSpec {
            kind: SpectrumKind::Exponential { ratio },
            rank,
            noise_floor,
            seed,
        }
    }

    pub fn power_law(exponent: f64, rank: usize, noise_floor: f64, seed: u64) -> Self {
        SpectrumSpec {
            kind: SpectrumKind::PowerLaw { exponent },
            rank,
            noise_floor,
            seed,
        }
    }

    pub fn explicit(values: Vec<f64>, noise_floor: f64, seed: u64) -> Self {
        SpectrumSpec {
            rank: values.len(),
            kind: SpectrumKind::Explicit(values),
            noise_floor,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(HsvdError::contract("spectrum rank must be at least 1"));
        }
        if !(self.noise_floor >= 0.0 && self.noise_floor.is_finite()) {
            return Err(HsvdError::contract(format!(
                "noise floor {} must be finite and nonnegative",
                self.noise_floor
            )));
        }
        match &self.kind {
            SpectrumKind::Exponential { ratio } if !(*ratio > 0.0 && *ratio < 1.0) => Err(
                HsvdError::contract(format!("exponential ratio {ratio} outside (0, 1)")),
            ),
            SpectrumKind::PowerLaw { exponent } if !(*exponent > 0.0 && exponent.is_finite()) => {
                Err(HsvdError::contract(format!("power-law exponent {exponent} must be positive")))
            }
            SpectrumKind::Explicit(values) => {
                if values.len() != self.rank {
                    return Err(HsvdError::contract(format!(
                        "{} explicit values for rank {}",
                        values.len(),
                        self.rank
                    )));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(HsvdError::contract("explicit values must be finite and nonnegative"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The first `len` singular values in index order (not necessarily sorted).
    pub fn values(&self, len: usize) -> Vec<f64> {
        (0..len)
            .map(|i| {
                if i >= self.rank {
                    return self.noise_floor;
                }
                match &self.kind {
                    SpectrumKind::Exponential { ratio } => ratio.powi(i as i32),
                    SpectrumKind::PowerLaw { exponent } => ((i + 1) as f64).powf(-exponent),
                    SpectrumKind::Explicit(values) => values[i],
                }
            })
            .collect()
    }
}

/// `X = U·diag(σ)·Vᵀ` with Haar-like random orthonormal `U` (`m×p`) and `V`
/// (`n×p`), `p = min(m, n)`. Returns `X` and its singular values in
/// nonincreasing order. Same seed, same bytes.
pub fn gen_low_rank(m: usize, n: usize, spec: &SpectrumSpec) -> Result<(DenseMatrix, Vec<f64>)> {
    spec.validate()?;
    if m == 0 || n == 0 {
        return Err(HsvdError::contract("matrix dimensions must be nonzero"));
    }
    let p = m.min(n);
    if spec.rank > p {
        return Err(HsvdError::contract(format!(
            "rank {} exceeds min({m}, {n})",
            spec.rank
        )));
    }
    let sigma = spec.values(p);
    // only columns with nonzero σ contribute
    let used = sigma.iter().rposition(|&s| s != 0.0).map_or(1, |i| i + 1);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let left = draw_gaussian(m, p, &mut rng);
    let right = draw_gaussian(n, p, &mut rng);
    let (u, _) = qr_thin(&left.leading_cols(used))?;
    drop(left);
    let (v, _) = qr_thin(&right.leading_cols(used))?;
    let x = u.scale_cols(&sigma[..used]).matmul_t(&v)?;
    x.validate_finite()?;

    let mut truth = sigma;
    truth.sort_by(|a, b| b.total_cmp(a));
    Ok((x, truth))
}

fn draw_gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// i.i.d. standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_gaussian(rows, cols, &mut rng)
}

/// Random `rows×cols` matrix with orthonormal columns (`cols ≤ rows`).
pub fn random_orthonormal(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    assert!(cols <= rows, "need cols <= rows");
    let (q, _) = qr_thin(&gaussian_matrix(rows, cols, seed)).expect("QR of a Gaussian matrix");
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::singular_values;
    use crate::factor::{orthonormality_error, truncate_factor, SvdFactor};

    #[test]
    fn explicit_spectrum_is_exact() {
        let spec = SpectrumSpec::explicit(vec![1.0, 0.5], 0.0, 3);
        let (x, truth) = gen_low_rank(10, 6, &spec).unwrap();
        assert_eq!(truth, vec![1.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
        let s = singular_values(&x).unwrap();
        for (a, b) in s.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SpectrumSpec::exponential(0.5, 4, 1e-3, 99);
        let (a, _) = gen_low_rank(20, 8, &spec).unwrap();
        let (b, _) = gen_low_rank(20, 8, &spec).unwrap();
        let bits = |m: &DenseMatrix| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let other = SpectrumSpec { seed: 100, ..spec };
        let (c, _) = gen_low_rank(20, 8, &other).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn energy_matches_spectrum() {
        for spec in [
            SpectrumSpec::exponential(0.7, 6, 1e-4, 1),
            SpectrumSpec::power_law(1.5, 9, 0.0, 2),
            SpectrumSpec::explicit(vec![2.0, 2.0, 1.0], 0.1, 3),
        ] {
            let (x, truth) = gen_low_rank(30, 12, &spec).unwrap();
            let energy: f64 = truth.iter().map(|s| s * s).sum();
            let fro = x.frobenius_norm().powi(2);
            assert!((fro - energy).abs() <= 1e-10 * energy, "{spec:?}");
        }
    }

    #[test]
    fn closed_form_truncation_rank() {
        // smaller matrix than the m=4096, n=512 case; the rank only depends on σ
        let spec = SpectrumSpec::exponential(0.7, 25, 1e-6, 5);
        let (x, truth) = gen_low_rank(256, 64, &spec).unwrap();
        assert!((truth[24] - 0.7f64.powi(24)).abs() < 1e-18);
        let sigma = singular_values(&x).unwrap();
        let f = SvdFactor::new(Some(DenseMatrix::identity(64)), sigma, None).unwrap();
        assert_eq!(truncate_factor(&f, 1e-2, None).unwrap().rank(), 13);
    }

    #[test]
    fn spectra_by_kind() {
        let e = SpectrumSpec::exponential(0.5, 3, 0.01, 0).values(5);
        assert_eq!(e, vec![1.0, 0.5, 0.25, 0.01, 0.01]);
        let p = SpectrumSpec::power_law(2.0, 2, 0.0, 0).values(3);
        assert_eq!(p, vec![1.0, 0.25, 0.0]);
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            SpectrumSpec::exponential(1.0, 3, 0.0, 0),
            SpectrumSpec::exponential(0.0, 3, 0.0, 0),
            SpectrumSpec::power_law(0.0, 3, 0.0, 0),
            SpectrumSpec::exponential(0.5, 0, 0.0, 0),
            SpectrumSpec::exponential(0.5, 2, -1.0, 0),
            SpectrumSpec::explicit(vec![1.0, -1.0], 0.0, 0),
        ];
        for spec in bad {
            assert!(gen_low_rank(8, 4, &spec).is_err(), "{spec:?}");
        }
        assert!(gen_low_rank(8, 4, &SpectrumSpec::exponential(0.5, 5, 0.0, 0)).is_err());
    }

    #[test]
    fn helpers() {
        let q = random_orthonormal(9, 4, 1);
        assert!(orthonormality_error(&q) < 1e-14);
        assert_eq!(gaussian_matrix(3, 2, 7), gaussian_matrix(3, 2, 7));
    }
}
