use serde::{Deserialize, Serialize};

use crate::bounds::{
    general_l_terms, qgemm_bound, qsvd_bound, rsvd_error_bound, svd_trunc_bound, BoundInputs,
};
use crate::error::Result;
use crate::lramm::{lramm, Preset};
use crate::matcore::{frobenius_norm, gemm, generate, oracle_svd, spectral_norm, Distribution};
use crate::quant::{dequantize, qgemm, quantize};
use crate::rsvd::{quantized_svd_approx, rsvd, RsvdParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seeds: u64,
    pub base_seed: u64,
    /// Multiplier applied to λ when evaluating the quantizer bound; anything
    /// but 1 is a deliberate fault.
    pub lambda_fault: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seeds: 5,
            base_seed: 0,
            lambda_fault: 1.0,
        }
    }
}

/// Largest empirical/bound ratio seen by one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub cases: usize,
    pub max_ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<BoundCheck>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("check,cases,max_ratio,passed\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{}\n",
                c.name, c.cases, c.max_ratio, c.passed
            ));
        }
        out
    }
}

struct Tally {
    name: &'static str,
    cases: usize,
    max_ratio: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            max_ratio: 0.0,
        }
    }

    fn record(&mut self, empirical: f64, bound: f64) {
        self.cases += 1;
        let ratio = if bound > 0.0 {
            empirical / bound
        } else if empirical > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        self.max_ratio = self.max_ratio.max(ratio);
    }

    fn finish(self) -> BoundCheck {
        BoundCheck {
            name: self.name.to_string(),
            cases: self.cases,
            passed: self.max_ratio <= 1.0,
            max_ratio: self.max_ratio,
        }
    }
}

/// Relative slack for bounds that are attained exactly in real arithmetic.
const ROUNDING_SLACK: f64 = 1e-12;

const DISTS: [Distribution; 4] = [
    Distribution::Uniform01,
    Distribution::Normal01,
    Distribution::Exponential1,
    Distribution::Binary01,
];

fn seeds(cfg: &VerifyConfig) -> impl Iterator<Item = u64> + '_ {
    (0..cfg.seeds.max(1)).map(move |i| cfg.base_seed.wrapping_add(i))
}

fn mean(xs: &[f64]) -> f64 {
    crate::stats::mean(xs)
}

/// Matrix quantizer at the round-to-nearest constant: every element within
/// `0.5/λ` and `‖A − Ã‖_F ≤ 0.5 √(mn) / λ`.
fn check_quantizer(cfg: &VerifyConfig) -> Result<BoundCheck> {
    let mut t = Tally::new("quantizer");
    for seed in seeds(cfg) {
        for (i, &dist) in DISTS.iter().enumerate() {
            for bits in [4, 8, 16] {
                let a = generate(24 + 8 * i, 20, dist, seed)?;
                let q = quantize(&a, bits)?;
                let lambda = q.scale() * cfg.lambda_fault;
                let diff = a.sub(&dequantize(&q))?;
                let (m, n) = a.shape();
                t.record(diff.max_abs(), 0.5 / lambda * (1.0 + ROUNDING_SLACK));
                t.record(
                    frobenius_norm(&diff),
                    0.5 * ((m * n) as f64).sqrt() / lambda,
                );
            }
        }
    }
    Ok(t.finish())
}

fn check_qgemm(cfg: &VerifyConfig) -> Result<BoundCheck> {
    let mut t = Tally::new("qgemm");
    for seed in seeds(cfg) {
        for bits in [4, 8] {
            let a = generate(48, 40, Distribution::Uniform01, 2 * seed)?;
            let b = generate(40, 32, Distribution::Normal01, 2 * seed + 1)?;
            let exact = gemm(&a, &b, 1.0, 0.0, None)?;
            let err = frobenius_norm(&qgemm(&a, &b, bits, bits, 1.0, 0.0, None)?.sub(&exact)?);
            let inp = BoundInputs {
                m: 48,
                n: 32,
                k: 40,
                sigma1: spectral_norm(&a),
                gamma1: spectral_norm(&b),
                lambdas: [
                    quantize(&a, bits)?.scale(),
                    quantize(&b, bits)?.scale(),
                    1.0,
                ],
                ..BoundInputs::default()
            };
            t.record(err, qgemm_bound(&inp));
        }
    }
    Ok(t.finish())
}

fn check_svd_trunc(cfg: &VerifyConfig) -> Result<BoundCheck> {
    let mut t = Tally::new("svd-truncation");
    for seed in seeds(cfg) {
        let a = generate(50, 40, Distribution::Normal01, seed)?;
        let f = oracle_svd(&a)?;
        for r in [1, 5, 10, 20] {
            let err = frobenius_norm(&a.sub(&f.truncate(r)?.reconstruct())?);
            t.record(err, svd_trunc_bound(f.sigma[r], 40, r)?);
        }
    }
    Ok(t.finish())
}

fn check_rsvd(cfg: &VerifyConfig) -> Result<BoundCheck> {
    let mut t = Tally::new("rsvd");
    for dist in [Distribution::Uniform01, Distribution::Normal01] {
        let a = generate(64, 64, dist, cfg.base_seed)?;
        let sigma = oracle_svd(&a)?.sigma;
        for r in [5, 10] {
            for q in [0, 1] {
                let errs = seeds(cfg)
                    .map(|seed| {
                        let f = rsvd(&a, &RsvdParams::new(r).power_iters(q).seed(seed))?;
                        Ok(spectral_norm(&a.sub(&f.reconstruct())?))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                t.record(mean(&errs), rsvd_error_bound(sigma[r], 64, r, q)?);
            }
        }
    }
    Ok(t.finish())
}

fn check_qsvd(cfg: &VerifyConfig) -> Result<BoundCheck> {
    let mut t = Tally::new("quantized-svd");
    let dist = Distribution::LowRankPlusNoise {
        rank: 8,
        noise_sigma: 0.0,
    };
    for (d1, d2) in [(8, 8), (8, 4)] {
        let mut sq = Vec::new();
        let mut bounds = Vec::new();
        for seed in seeds(cfg) {
            let a = generate(48, 48, dist, seed)?;
            let q = quantized_svd_approx(&a, 8, d1, d2)?;
            sq.push(frobenius_norm(&a.sub(&q.reconstruction)?).powi(2));
            let sigma = oracle_svd(&a)?.sigma;
            let inp = BoundInputs {
                m: 48,
                n: 48,
                k: 8,
                r: 8,
                p: 48,
                sigma1: sigma[0],
                sigma_r1: sigma[8],
                ..BoundInputs::default()
            }
            .with_bits([d1, d2, 8]);
            bounds.push(qsvd_bound(&inp));
        }
        t.record(mean(&sq), mean(&bounds));
    }
    Ok(t.finish())
}

fn check_lramm(cfg: &VerifyConfig) -> Result<BoundCheck> {
    let mut t = Tally::new("lramm");
    for seed in seeds(cfg) {
        let a = generate(64, 64, Distribution::Uniform01, 2 * seed)?;
        let b = generate(64, 64, Distribution::Uniform01, 2 * seed + 1)?;
        let exact = gemm(&a, &b, 1.0, 0.0, None)?;
        let (sa, sb) = (oracle_svd(&a)?.sigma, oracle_svd(&b)?.sigma);
        for preset in [Preset::Balanced, Preset::PaperTuned] {
            for r in [6, 13] {
                let params = preset.params(r).seed(seed);
                let err = frobenius_norm(&lramm(&a, &b, &params, None)?.d.sub(&exact)?);
                let inp = BoundInputs {
                    m: 64,
                    n: 64,
                    k: 64,
                    r,
                    p: 64,
                    sigma1: sa[0],
                    sigma_r1: sa[r],
                    gamma1: sb[0],
                    gamma_r1: sb[r],
                    ..BoundInputs::default()
                }
                .with_bits(params.bits);
                t.record(err, general_l_terms(&inp).combine());
            }
        }
    }
    Ok(t.finish())
}

/// Runs every seeded bound check.
pub fn verify_bounds(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let checks = vec![
        check_quantizer(cfg)?,
        check_qgemm(cfg)?,
        check_svd_trunc(cfg)?,
        check_rsvd(cfg)?,
        check_qsvd(cfg)?,
        check_lramm(cfg)?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, passed })
}
