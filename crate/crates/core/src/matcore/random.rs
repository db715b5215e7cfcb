//! Seeded matrix generators.
//!
//! Every row draws from its own ChaCha8 stream keyed by `(seed, tag, row)`,
//! so a matrix is identical no matter how rows are scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gemm, orthonormalize_columns, DenseMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Distribution {
    Uniform01,
    Normal01,
    Exponential1,
    Binary01,
    /// `Σ (1/i) u_i v_iᵀ` over `rank` random orthonormal pairs plus
    /// `noise_sigma · N(0, 1)` per entry.
    LowRankPlusNoise {
        rank: usize,
        noise_sigma: f64,
    },
}

impl Distribution {
    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform01 => f.pad("uniform"),
            Distribution::Normal01 => f.pad("normal"),
            Distribution::Exponential1 => f.pad("exponential"),
            Distribution::Binary01 => f.pad("binary"),
            Distribution::LowRankPlusNoise { rank, noise_sigma } => {
                f.pad(&format!("lowrank:{rank}:{noise_sigma}"))
            }
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// Accepts `uniform`, `normal`, `exponential`, `binary` and
    /// `lowrank:<rank>[:<noise>]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let dist = match head.as_str() {
            "uniform" | "uniform01" => Distribution::Uniform01,
            "normal" | "normal01" | "gaussian" => Distribution::Normal01,
            "exponential" | "exp" | "exponential1" => Distribution::Exponential1,
            "binary" | "binary01" => Distribution::Binary01,
            "lowrank" => {
                let rank = parts
                    .next()
                    .ok_or_else(|| Error::param("lowrank needs a rank, e.g. lowrank:5:0.001"))?
                    .parse::<usize>()
                    .map_err(|e| Error::param(format!("lowrank rank: {e}")))?;
                let noise_sigma = match parts.next() {
                    Some(n) => n
                        .parse::<f64>()
                        .map_err(|e| Error::param(format!("lowrank noise: {e}")))?,
                    None => 0.0,
                };
                Distribution::LowRankPlusNoise { rank, noise_sigma }
            }
            other => return Err(Error::param(format!("unknown distribution '{other}'"))),
        };
        if parts.next().is_some() {
            return Err(Error::param(format!(
                "trailing fields in distribution '{s}'"
            )));
        }
        Ok(dist)
    }
}

impl TryFrom<String> for Distribution {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Distribution> for String {
    fn from(d: Distribution) -> String {
        d.to_string()
    }
}

#[derive(Clone, Copy)]
enum Sampler {
    Uniform,
    Normal,
    Exponential,
    Binary,
}

const TAG_ENTRIES: u64 = 0;
const TAG_LEFT: u64 = 1;
const TAG_RIGHT: u64 = 2;
const TAG_NOISE: u64 = 3;
pub(crate) const TAG_SKETCH: u64 = 4;

fn row_rng(seed: u64, tag: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) | row as u64);
    rng
}

fn fill(rows: usize, cols: usize, seed: u64, tag: u64, sampler: Sampler) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    m.data_mut()
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, row)| {
            let mut rng = row_rng(seed, tag, i);
            for v in row {
                *v = match sampler {
                    Sampler::Uniform => rng.random::<f64>(),
                    Sampler::Normal => rng.sample(StandardNormal),
                    Sampler::Exponential => rng.sample(Exp1),
                    Sampler::Binary => f64::from(u8::from(rng.random::<bool>())),
                };
            }
        });
    m
}

/// Standard Gaussian matrix drawn from the stream family `tag`.
pub(crate) fn gaussian(rows: usize, cols: usize, seed: u64, tag: u64) -> DenseMatrix {
    fill(rows, cols, seed, tag, Sampler::Normal)
}

/// Generates a `rows × cols` matrix. Deterministic in `(rows, cols, dist, seed)`.
pub fn generate(rows: usize, cols: usize, dist: Distribution, seed: u64) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::shape(format!("invalid dimensions {rows}x{cols}")));
    }
    let m = match dist {
        Distribution::Uniform01 => fill(rows, cols, seed, TAG_ENTRIES, Sampler::Uniform),
        Distribution::Normal01 => fill(rows, cols, seed, TAG_ENTRIES, Sampler::Normal),
        Distribution::Exponential1 => fill(rows, cols, seed, TAG_ENTRIES, Sampler::Exponential),
        Distribution::Binary01 => fill(rows, cols, seed, TAG_ENTRIES, Sampler::Binary),
        Distribution::LowRankPlusNoise { rank, noise_sigma } => {
            if rank == 0 || rank > rows.min(cols) {
                return Err(Error::param(format!(
                    "low-rank generator rank {rank} must be in 1..={}",
                    rows.min(cols)
                )));
            }
            if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
                return Err(Error::param(format!(
                    "noise sigma must be finite and non-negative, got {noise_sigma}"
                )));
            }
            let u = orthonormalize_columns(&gaussian(rows, rank, seed, TAG_LEFT));
            let v = orthonormalize_columns(&gaussian(cols, rank, seed, TAG_RIGHT));
            let profile: Vec<f64> = (1..=rank).map(|i| 1.0 / i as f64).collect();
            let us = u.scale_columns(&profile);
            let signal = gemm(&us, &v.transpose(), 1.0, 0.0, None)?;
            if noise_sigma == 0.0 {
                signal
            } else {
                let noise = gaussian(rows, cols, seed, TAG_NOISE);
                signal.add(&noise.scale(noise_sigma))?
            }
        }
    };
    Ok(m)
}
