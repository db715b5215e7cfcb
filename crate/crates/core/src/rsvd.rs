//! Randomized SVD with a Gaussian range finder, plus the quantized
//! truncated SVD of a single matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    gaussian, gemm, oracle_svd, orthonormalize_columns, DenseMatrix, SvdFactors, TAG_SKETCH,
};
use crate::quant::{check_bits, dequantize, quantize, QuantizedMatrix};

pub const DEFAULT_OVERSAMPLE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsvdParams {
    pub rank: usize,
    pub power_iters: u32,
    pub oversample: usize,
    pub seed: u64,
}

impl RsvdParams {
    /// Rank `rank`, no power iterations, oversampling 10, seed 0.
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            power_iters: 0,
            oversample: DEFAULT_OVERSAMPLE,
            seed: 0,
        }
    }

    pub fn power_iters(mut self, q: u32) -> Self {
        self.power_iters = q;
        self
    }

    pub fn oversample(mut self, rho: usize) -> Self {
        self.oversample = rho;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of sketch columns, `rank + oversample`.
    pub fn sketch_width(&self) -> usize {
        self.rank + self.oversample
    }

    fn validate(&self, a: &DenseMatrix) -> Result<()> {
        let p = a.rows().min(a.cols());
        if self.rank == 0 {
            return Err(Error::param("rsvd rank must be at least 1"));
        }
        if self.sketch_width() > p {
            return Err(Error::param(format!(
                "rank {} + oversample {} exceeds min dimension {p}",
                self.rank, self.oversample
            )));
        }
        Ok(())
    }
}

/// Orthonormal `Q` (m × (r+ρ)) with `A ≈ Q Qᵀ A`, built from
/// `(A Aᵀ)^q A Ω` with re-orthonormalization after every product.
pub fn range_finder(a: &DenseMatrix, params: &RsvdParams) -> Result<DenseMatrix> {
    params.validate(a)?;
    let omega = gaussian(a.cols(), params.sketch_width(), params.seed, TAG_SKETCH);
    let mut q = orthonormalize_columns(&gemm(a, &omega, 1.0, 0.0, None)?);
    if params.power_iters > 0 {
        let at = a.transpose();
        for _ in 0..params.power_iters {
            let z = orthonormalize_columns(&gemm(&at, &q, 1.0, 0.0, None)?);
            q = orthonormalize_columns(&gemm(a, &z, 1.0, 0.0, None)?);
        }
    }
    Ok(q)
}

/// Rank-`r` randomized SVD.
///
/// Projects onto the range-finder basis, takes the exact SVD of the small
/// `(r+ρ) × n` matrix `QᵀA`, lifts the left factor back with `Q` and keeps
/// the top `r` triplets.
pub fn rsvd(a: &DenseMatrix, params: &RsvdParams) -> Result<SvdFactors> {
    let q = range_finder(a, params)?;
    let small = gemm(&q.transpose(), a, 1.0, 0.0, None)?;
    let inner = oracle_svd(&small)?;
    let u = gemm(&q, &inner.u, 1.0, 0.0, None)?;
    SvdFactors {
        u,
        sigma: inner.sigma,
        v: inner.v,
    }
    .truncate(params.rank)
}

/// Keeps the leading `r` singular triplets.
pub fn truncate_svd(f: &SvdFactors, r: usize) -> Result<SvdFactors> {
    f.truncate(r)
}

/// Output of [`quantized_svd_approx`].
#[derive(Debug, Clone)]
pub struct QuantizedSvd {
    /// Exact rank-`r` factors the quantizers were applied to.
    pub factors: SvdFactors,
    /// `Q(U_r Σ_r)`, `m × r`.
    pub u_scaled: QuantizedMatrix,
    /// `Q(V_r)`, `n × r`.
    pub v: QuantizedMatrix,
    /// `deq(Q(U_r Σ_r)) · deq(Q(V_r))ᵀ`.
    pub reconstruction: DenseMatrix,
}

/// Quantized rank-`r` SVD approximation of a single matrix.
///
/// Uses the exact (Jacobi) SVD, folds the singular values into the left
/// factor, then quantizes `U_r Σ_r` with `bits_u` and `V_r` with `bits_v`.
pub fn quantized_svd_approx(
    a: &DenseMatrix,
    r: usize,
    bits_u: u32,
    bits_v: u32,
) -> Result<QuantizedSvd> {
    check_bits(bits_u)?;
    check_bits(bits_v)?;
    let p = a.rows().min(a.cols());
    if r == 0 || r > p {
        return Err(Error::param(format!("rank {r} must be in 1..={p}")));
    }
    let factors = oracle_svd(a)?.truncate(r)?;
    let u_scaled = quantize(&factors.u.scale_columns(&factors.sigma), bits_u)?;
    let v = quantize(&factors.v, bits_v)?;
    let reconstruction = gemm(
        &dequantize(&u_scaled),
        &dequantize(&v).transpose(),
        1.0,
        0.0,
        None,
    )?;
    Ok(QuantizedSvd {
        factors,
        u_scaled,
        v,
        reconstruction,
    })
}
