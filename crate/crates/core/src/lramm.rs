//! Low-rank approximate matrix multiplication with mixed-bit quantized GEMMs.
//!
//! ```text
//! A ≈ U Σ Vᵀ,  B ≈ W Γ Zᵀ                      (randomized SVD, rank r)
//! Ũ = U Σ,  Z̃ = Γ Zᵀ                           (diagonal scaling, f64)
//! E1 = QM(Vᵀ W, d1)      r×k · k×r
//! E2 = QM(E1 Z̃, d2)      r×r · r×n
//! E3 = QM(Ũ E2, d3)      m×r · r×n
//! D  = α E3 + β C
//! ```
//!
//! Each `QM` quantizes both real operands afresh at its own bit budget,
//! multiplies in integers and dequantizes.
//!
//! Note the bit-budget attribution differs between the two halves of this
//! module: the weighted-MAC cost model charges `d2²·k r²`, `d3²·n r²` and
//! `d1²·m n r`, while the pipeline quantizes the first product at `d1` and
//! the `m × n` product at `d3`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;
use crate::quant::{check_bits, qgemm};
use crate::rsvd::{rsvd, RsvdParams, DEFAULT_OVERSAMPLE};

/// Bit width of the unquantized carrier in the cost model.
pub const DEFAULT_D0: u32 = 64;

/// Seed offset separating the sketch of `B` from the sketch of `A`.
const B_SKETCH_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrammParams {
    pub rank: usize,
    /// `(d1, d2, d3)`.
    pub bits: [u32; 3],
    pub power_iters: u32,
    pub oversample: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl LrammParams {
    /// Rank `rank` with the default ("balanced") preset.
    pub fn new(rank: usize) -> Self {
        Preset::default().params(rank)
    }

    pub fn bits(mut self, d1: u32, d2: u32, d3: u32) -> Self {
        self.bits = [d1, d2, d3];
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn power_iters(mut self, q: u32) -> Self {
        self.power_iters = q;
        self
    }

    pub fn oversample(mut self, rho: usize) -> Self {
        self.oversample = rho;
        self
    }

    pub fn scalars(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    /// Checks the parameters against `A: m×k`, `B: k×n`.
    pub fn validate(&self, m: usize, k: usize, n: usize) -> Result<()> {
        for &b in &self.bits {
            check_bits(b)?;
        }
        if self.rank < 2 {
            return Err(Error::param(format!(
                "rank must be >= 2, got {}",
                self.rank
            )));
        }
        let limit = m.min(k).min(n);
        if self.rank > limit {
            return Err(Error::param(format!(
                "rank {} exceeds min(m, k, n) = {limit}",
                self.rank
            )));
        }
        Ok(())
    }

    /// Oversampling after clipping so that `rank + oversample` fits every
    /// operand.
    pub fn effective_oversample(&self, m: usize, k: usize, n: usize) -> usize {
        self.oversample.min(m.min(k).min(n) - self.rank)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// (8, 4, 8): low middle budget.
    PaperTuned,
    /// (8, 8, 4): low budget on the largest product.
    #[default]
    Balanced,
    /// (4, 4, 4).
    MaxSpeed,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::PaperTuned, Preset::Balanced, Preset::MaxSpeed];

    pub fn bits(self) -> [u32; 3] {
        match self {
            Preset::PaperTuned => [8, 4, 8],
            Preset::Balanced => [8, 8, 4],
            Preset::MaxSpeed => [4, 4, 4],
        }
    }

    /// Full parameter set for `rank`: q = 0, oversample 10, α = 1, β = 0.
    pub fn params(self, rank: usize) -> LrammParams {
        LrammParams {
            rank,
            bits: self.bits(),
            power_iters: 0,
            oversample: DEFAULT_OVERSAMPLE,
            seed: 0,
            alpha: 1.0,
            beta: 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperTuned => "paper-tuned",
            Preset::Balanced => "balanced",
            Preset::MaxSpeed => "max-speed",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::param(format!("unknown preset '{s}'")))
    }
}

/// Parameter fragment for a named preset; the rank is left to the caller.
pub fn preset(name: &str) -> Result<LrammParams> {
    Ok(name.parse::<Preset>()?.params(0))
}

/// One value per pipeline stage plus their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stages<T> {
    pub rsvd: T,
    pub scaling: T,
    pub gemm1: T,
    pub gemm2: T,
    pub gemm3: T,
    pub total: T,
}

impl<T: Copy + std::ops::Add<Output = T>> Stages<T> {
    pub fn from_parts(rsvd: T, scaling: T, gemm1: T, gemm2: T, gemm3: T) -> Self {
        Self {
            rsvd,
            scaling,
            gemm1,
            gemm2,
            gemm3,
            total: rsvd + scaling + gemm1 + gemm2 + gemm3,
        }
    }

    pub fn parts(&self) -> [(&'static str, T); 5] {
        [
            ("rsvd", self.rsvd),
            ("scaling", self.scaling),
            ("gemm1", self.gemm1),
            ("gemm2", self.gemm2),
            ("gemm3", self.gemm3),
        ]
    }
}

/// Bit-width-weighted MAC counts (`d²` per multiply-accumulate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub d0: u32,
    pub bits: [u32; 3],
    pub stages: Stages<f64>,
    /// Full quantized GEMM at `d1`: `d1² m n k`.
    pub qgemm_baseline: f64,
    /// Unquantized GEMM: `d0² m n k`.
    pub exact_gemm: f64,
}

impl CostModel {
    pub fn total(&self) -> f64 {
        self.stages.total
    }

    /// `qgemm_baseline / total`.
    pub fn speedup_vs_qgemm(&self) -> f64 {
        self.qgemm_baseline / self.stages.total
    }

    pub fn speedup_vs_exact(&self) -> f64 {
        self.exact_gemm / self.stages.total
    }

    /// Each stage's fraction of the total.
    pub fn shares(&self) -> Stages<f64> {
        let t = self.stages.total;
        let s = &self.stages;
        Stages::from_parts(
            s.rsvd / t,
            s.scaling / t,
            s.gemm1 / t,
            s.gemm2 / t,
            s.gemm3 / t,
        )
    }
}

/// Stage costs with `log ≡ log₂`:
///
/// ```text
/// rsvd    d0²((m+n) k log r + (m+n+2k) r²)
/// scaling d0²(m r + n r)
/// gemm1   d0²·2kr        + d2²·k r²
/// gemm2   d0²(r² + n r)  + d3²·n r²
/// gemm3   d0²(n r + m r) + d1²·m n r
/// ```
#[allow(clippy::too_many_arguments)]
pub fn cost_model(
    m: usize,
    n: usize,
    k: usize,
    r: usize,
    d0: u32,
    d1: u32,
    d2: u32,
    d3: u32,
) -> Result<CostModel> {
    if [m, n, k].contains(&0) || [d0, d1, d2, d3].contains(&0) {
        return Err(Error::param("cost model inputs must be positive"));
    }
    if r < 2 {
        return Err(Error::param(format!("cost model needs r >= 2, got {r}")));
    }
    let (mf, nf, kf, rf) = (m as f64, n as f64, k as f64, r as f64);
    let sq = |d: u32| f64::from(d) * f64::from(d);
    let (w0, w1, w2, w3) = (sq(d0), sq(d1), sq(d2), sq(d3));
    let rsvd = w0 * ((mf + nf) * kf * rf.log2() + (mf + nf + 2.0 * kf) * rf * rf);
    let scaling = w0 * (mf * rf + nf * rf);
    let gemm1 = w0 * 2.0 * kf * rf + w2 * kf * rf * rf;
    let gemm2 = w0 * (rf * rf + nf * rf) + w3 * nf * rf * rf;
    let gemm3 = w0 * (nf * rf + mf * rf) + w1 * mf * nf * rf;
    Ok(CostModel {
        m,
        n,
        k,
        r,
        d0,
        bits: [d1, d2, d3],
        stages: Stages::from_parts(rsvd, scaling, gemm1, gemm2, gemm3),
        qgemm_baseline: w1 * mf * nf * kf,
        exact_gemm: w0 * mf * nf * kf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub macs: Stages<f64>,
    pub wall_ns: Stages<u64>,
}

#[derive(Debug, Clone)]
pub struct LrammOutput {
    pub d: DenseMatrix,
    pub timings: StageTimings,
}

/// Runs the low-rank mixed-bit multiply `α·A·B + β·C`.
pub fn lramm(
    a: &DenseMatrix,
    b: &DenseMatrix,
    params: &LrammParams,
    c: Option<&DenseMatrix>,
) -> Result<LrammOutput> {
    let (m, k) = a.shape();
    let n = b.cols();
    if b.rows() != k {
        return Err(Error::shape(format!(
            "lramm inner dimensions differ: {m}x{k} * {}x{n}",
            b.rows()
        )));
    }
    if let Some(c) = c {
        if c.shape() != (m, n) {
            return Err(Error::shape(format!(
                "lramm addend is {}x{}, expected {m}x{n}",
                c.rows(),
                c.cols()
            )));
        }
    }
    params.validate(m, k, n)?;
    let [d1, d2, d3] = params.bits;
    let rho = params.effective_oversample(m, k, n);
    let sketch = |seed| RsvdParams {
        rank: params.rank,
        power_iters: params.power_iters,
        oversample: rho,
        seed,
    };

    let clock = Instant::now();
    let fa = rsvd(a, &sketch(params.seed))?;
    let fb = rsvd(b, &sketch(params.seed.wrapping_add(B_SKETCH_SALT)))?;
    let t_rsvd = elapsed(clock);

    let clock = Instant::now();
    let u_scaled = fa.u.scale_columns(&fa.sigma);
    let z_scaled = fb.v.transpose().scale_rows(&fb.sigma);
    let vt = fa.v.transpose();
    let t_scaling = elapsed(clock);

    let clock = Instant::now();
    let e1 = qgemm(&vt, &fb.u, d1, d1, 1.0, 0.0, None)?;
    let t_g1 = elapsed(clock);

    let clock = Instant::now();
    let e2 = qgemm(&e1, &z_scaled, d2, d2, 1.0, 0.0, None)?;
    let t_g2 = elapsed(clock);

    let clock = Instant::now();
    let d = qgemm(&u_scaled, &e2, d3, d3, params.alpha, params.beta, c)?;
    let t_g3 = elapsed(clock);

    let model = cost_model(m, n, k, params.rank, DEFAULT_D0, d1, d2, d3)?;
    Ok(LrammOutput {
        d,
        timings: StageTimings {
            macs: model.stages,
            wall_ns: Stages::from_parts(t_rsvd, t_scaling, t_g1, t_g2, t_g3),
        },
    })
}

fn elapsed(start: Instant) -> u64 {
    u64::try_from(start.elapsed().as_nanos()).unwrap_or(u64::MAX)
}
