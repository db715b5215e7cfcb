use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{general_l_terms, qgemm_bound, svd_trunc_bound, BoundInputs, LTerms};
use crate::error::{Error, Result};
use crate::lramm::{cost_model, lramm, LrammParams, Preset, Stages, DEFAULT_D0};
use crate::matcore::{
    frobenius_norm, gemm, oracle_svd, relative_error, spectral_norm, DenseMatrix, SvdFactors,
    ORACLE_MAX_MIN_DIM,
};
use crate::quant::{check_bits, qgemm, quantize};

/// How `A·B` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    Exact,
    /// Direct quantization of both operands at `d` bits.
    Qgemm {
        bits: u32,
    },
    /// Exact rank-`r` truncations of both operands, multiplied in floating point.
    TruncSvd {
        rank: usize,
    },
    Lramm {
        rank: usize,
        bits: [u32; 3],
        power_iters: u32,
    },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Exact => "exact",
            Strategy::Qgemm { .. } => "qgemm",
            Strategy::TruncSvd { .. } => "trunc-svd",
            Strategy::Lramm { .. } => "lramm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Strategy::Exact => Ok(()),
            Strategy::Qgemm { bits } => check_bits(bits),
            Strategy::TruncSvd { rank: 0 } => Err(Error::param("trunc-svd rank must be positive")),
            Strategy::TruncSvd { .. } => Ok(()),
            Strategy::Lramm { rank, bits, .. } => {
                bits.iter().try_for_each(|&b| check_bits(b))?;
                if rank < 2 {
                    return Err(Error::param(format!("lramm rank must be >= 2, got {rank}")));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Exact => f.write_str("exact"),
            Strategy::Qgemm { bits } => write!(f, "qgemm:{bits}"),
            Strategy::TruncSvd { rank } => write!(f, "trunc-svd:{rank}"),
            Strategy::Lramm {
                rank,
                bits: [d1, d2, d3],
                power_iters,
            } => write!(f, "lramm:{rank}:{d1}:{d2}:{d3}:{power_iters}"),
        }
    }
}

fn num<T: FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::param(format!("invalid {what} '{field}'")))
}

impl FromStr for Strategy {
    type Err = Error;

    /// `exact`, `qgemm:D`, `trunc-svd:R`, `lramm:R:D1:D2:D3[:Q]` or
    /// `lramm:R:<preset>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let strategy = match parts.as_slice() {
            ["exact"] => Strategy::Exact,
            ["qgemm", d] => Strategy::Qgemm {
                bits: num(d, "bit budget")?,
            },
            ["trunc-svd", r] => Strategy::TruncSvd {
                rank: num(r, "rank")?,
            },
            ["lramm", r, name] => Strategy::Lramm {
                rank: num(r, "rank")?,
                bits: name.parse::<Preset>()?.bits(),
                power_iters: 0,
            },
            ["lramm", r, d1, d2, d3, rest @ ..] if rest.len() <= 1 => Strategy::Lramm {
                rank: num(r, "rank")?,
                bits: [num(d1, "d1")?, num(d2, "d2")?, num(d3, "d3")?],
                power_iters: rest.first().map_or(Ok(0), |q| num(q, "power iterations"))?,
            },
            _ => return Err(Error::param(format!("unknown strategy '{s}'"))),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

impl TryFrom<String> for Strategy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> Self {
        s.to_string()
    }
}

/// Accuracy, bound and cost of one multiply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub strategy: String,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub r: Option<usize>,
    pub d1: Option<u32>,
    pub d2: Option<u32>,
    pub d3: Option<u32>,
    pub q: Option<u32>,
    pub seed: u64,
    pub fro_error: f64,
    pub rel_error: f64,
    /// Bound on `fro_error` for this strategy; `None` when its inputs exceed
    /// the oracle SVD size cap.
    pub bound_combined: Option<f64>,
    /// Inputs the bound was evaluated from.
    pub bound_inputs: Option<BoundInputs>,
    pub macs_total: f64,
    pub wall_ns_total: u64,
    pub macs: Option<Stages<f64>>,
    pub wall_ns: Option<Stages<u64>>,
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str =
        "strategy,m,n,k,r,d1,d2,d3,q,seed,fro_error,rel_error,bound_combined,macs_total,wall_ns";

    pub fn csv_row(&self) -> String {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.strategy,
            self.m,
            self.n,
            self.k,
            opt(self.r),
            opt(self.d1),
            opt(self.d2),
            opt(self.d3),
            opt(self.q),
            self.seed,
            self.fro_error,
            self.rel_error,
            opt(self.bound_combined),
            self.macs_total,
            self.wall_ns_total
        )
    }
}

/// Result of [`run_mm`].
#[derive(Debug, Clone)]
pub struct MmOutcome {
    pub d: DenseMatrix,
    pub report: ErrorReport,
}

/// Options shared by every strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmOptions {
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub oversample: usize,
    pub d0: u32,
}

impl Default for MmOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            alpha: 1.0,
            beta: 0.0,
            oversample: crate::rsvd::DEFAULT_OVERSAMPLE,
            d0: DEFAULT_D0,
        }
    }
}

fn oracle_if_small(a: &DenseMatrix) -> Result<Option<SvdFactors>> {
    if a.rows().min(a.cols()) > ORACLE_MAX_MIN_DIM {
        return Ok(None);
    }
    oracle_svd(a).map(Some)
}

fn sigma_at(s: &[f64], i: usize) -> f64 {
    s.get(i).copied().unwrap_or(0.0)
}

/// Computes `α·A·B + β·C` with `strategy` and reports its error against the
/// exact product together with the strategy's bound.
pub fn run_mm(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: Option<&DenseMatrix>,
    strategy: Strategy,
    opts: &MmOptions,
) -> Result<MmOutcome> {
    strategy.validate()?;
    let (m, k) = a.shape();
    let n = b.cols();
    let exact = gemm(a, b, opts.alpha, opts.beta, c)?;
    let w0 = f64::from(opts.d0).powi(2);
    let dense_macs = (m * n * k) as f64;

    let clock = Instant::now();
    let (d, macs_total, macs, wall, bound_inputs, bound) = match strategy {
        Strategy::Exact => {
            let d = exact.clone();
            (d, w0 * dense_macs, None, None, None, Some(0.0))
        }
        Strategy::Qgemm { bits } => {
            let d = qgemm(a, b, bits, bits, opts.alpha, opts.beta, c)?;
            let inp = BoundInputs {
                m,
                n,
                k,
                sigma1: spectral_norm(a),
                gamma1: spectral_norm(b),
                lambdas: [quantize(a, bits)?.scale(), quantize(b, bits)?.scale(), 1.0],
                ..BoundInputs::default()
            }
            .with_bits([bits; 3]);
            let bound = qgemm_bound(&inp) * opts.alpha.abs();
            let macs = f64::from(bits).powi(2) * dense_macs;
            (d, macs, None, None, Some(inp), Some(bound))
        }
        Strategy::TruncSvd { rank } => {
            let fa = oracle_svd(a)?;
            let fb = oracle_svd(b)?;
            let p = m.min(k).min(n);
            if rank > p {
                return Err(Error::param(format!(
                    "rank {rank} exceeds min(m, k, n) = {p}"
                )));
            }
            let ar = fa.truncate(rank)?.reconstruct();
            let br = fb.truncate(rank)?.reconstruct();
            let d = gemm(&ar, &br, opts.alpha, opts.beta, c)?;
            let tail = |f: &SvdFactors, p: usize| {
                if rank < p {
                    svd_trunc_bound(sigma_at(&f.sigma, rank), p, rank)
                } else {
                    Ok(0.0)
                }
            };
            let terms = LTerms {
                l1: tail(&fa, m.min(k))?.powi(2),
                l2: tail(&fb, k.min(n))?.powi(2),
                l3: frobenius_norm(a).powi(2),
                l4: frobenius_norm(b).powi(2),
            };
            let inp = BoundInputs {
                m,
                n,
                k,
                r: rank,
                p,
                sigma1: fa.sigma[0],
                sigma_r1: sigma_at(&fa.sigma, rank),
                gamma1: fb.sigma[0],
                gamma_r1: sigma_at(&fb.sigma, rank),
                ..BoundInputs::default()
            };
            let macs = w0 * (rank * (m * k + k * n + m * n)) as f64;
            (
                d,
                macs,
                None,
                None,
                Some(inp),
                Some(terms.combine() * opts.alpha.abs()),
            )
        }
        Strategy::Lramm {
            rank,
            bits,
            power_iters,
        } => {
            let params = LrammParams {
                rank,
                bits,
                power_iters,
                oversample: opts.oversample,
                seed: opts.seed,
                alpha: opts.alpha,
                beta: opts.beta,
            };
            let out = lramm(a, b, &params, c)?;
            let model = cost_model(m, n, k, rank, opts.d0, bits[0], bits[1], bits[2])?;
            let (inp, bound) = match (oracle_if_small(a)?, oracle_if_small(b)?) {
                (Some(fa), Some(fb)) => {
                    let inp = BoundInputs {
                        m,
                        n,
                        k,
                        r: rank,
                        p: m.min(k).min(n),
                        sigma1: fa.sigma[0],
                        sigma_r1: sigma_at(&fa.sigma, rank),
                        gamma1: fb.sigma[0],
                        gamma_r1: sigma_at(&fb.sigma, rank),
                        q: power_iters,
                        ..BoundInputs::default()
                    }
                    .with_bits(bits);
                    let bound = general_l_terms(&inp).combine() * opts.alpha.abs();
                    (Some(inp), Some(bound))
                }
                _ => (None, None),
            };
            (
                out.d,
                model.total(),
                Some(model.stages),
                Some(out.timings.wall_ns),
                inp,
                bound,
            )
        }
    };
    let wall_ns_total = wall
        .map(|w: Stages<u64>| w.total)
        .unwrap_or_else(|| u64::try_from(clock.elapsed().as_nanos()).unwrap_or(u64::MAX));

    let fro_error = frobenius_norm(&d.sub(&exact)?);
    let rel_error = match relative_error(&d, &exact) {
        Ok(e) => e,
        Err(Error::DegenerateDenominator) if fro_error == 0.0 => 0.0,
        Err(Error::DegenerateDenominator) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let (r, bits, q) = match strategy {
        Strategy::Exact => (None, None, None),
        Strategy::Qgemm { bits } => (None, Some([bits; 3]), None),
        Strategy::TruncSvd { rank } => (Some(rank), None, None),
        Strategy::Lramm {
            rank,
            bits,
            power_iters,
        } => (Some(rank), Some(bits), Some(power_iters)),
    };
    let report = ErrorReport {
        strategy: strategy.to_string(),
        m,
        n,
        k,
        r,
        d1: bits.map(|b| b[0]),
        d2: bits.map(|b| b[1]),
        d3: bits.map(|b| b[2]),
        q,
        seed: opts.seed,
        fro_error,
        rel_error,
        bound_combined: bound,
        bound_inputs,
        macs_total,
        wall_ns_total,
        macs,
        wall_ns: wall,
    };
    Ok(MmOutcome { d, report })
}
