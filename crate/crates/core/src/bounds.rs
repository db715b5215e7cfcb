//! Closed-form error bounds for quantization, truncated/randomized SVD and
//! the low-rank quantized multiply.
//!
//! Notation: `σ` are singular values of `A` (`m×k`), `γ` those of `B`
//! (`k×n`), `λ_i` quantizer scales, `D_i = 2^{d_i−1} − 1` the integer range of
//! bit budget `d_i`, and `f(r) = σ_{r+1}²/σ₁² · (k − r)`.
//!
//! The general low-rank bound combines four squared-norm terms:
//!
//! ```text
//! L1 ≥ E‖R_A‖²   L2 ≥ E‖R_B‖²   L3 ≥ ‖A‖²   L4 ≥ ‖B‖²
//! E‖C' − C‖ ≤ √(L1·L4) + √(L2·L3) + √(L1·L2)
//! ```
//!
//! from `‖R_A B + A R_B + R_A R_B‖ ≤ ‖R_A‖‖B‖ + ‖A‖‖R_B‖ + ‖R_A‖‖R_B‖`.
//! [`general_l_terms`] builds L1/L2 from the per-factor quantized SVD bound
//! (D² denominators, tail term without `f`). The symmetric closed form
//! [`lramm_specific_bound`] uses `L1 = k r σ₁² X₁`, `L2 = k r σ₁² X₂` with
//! `X = f(r) + 1/D + 1/D' + k/(D D')`. The two sets of L-terms are not
//! algebraically equal; they share only the combination rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Everything the closed forms consume. Unused fields may stay at default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub p: usize,
    /// σ₁ of `A`.
    pub sigma1: f64,
    /// σ_{r+1} of `A`.
    pub sigma_r1: f64,
    /// γ₁ of `B`.
    pub gamma1: f64,
    /// γ_{r+1} of `B`.
    pub gamma_r1: f64,
    /// Quantizer scales λ₁, λ₂, λ₃.
    pub lambdas: [f64; 3],
    /// Integer ranges D₁, D₂, D₃.
    pub levels: [f64; 3],
    pub q: u32,
    /// Largest absolute entry (M).
    pub max_abs: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            m: 1,
            n: 1,
            k: 1,
            r: 1,
            p: 1,
            sigma1: 0.0,
            sigma_r1: 0.0,
            gamma1: 0.0,
            gamma_r1: 0.0,
            lambdas: [1.0; 3],
            levels: [1.0; 3],
            q: 0,
            max_abs: 0.0,
        }
    }
}

impl BoundInputs {
    /// Sets `levels` to `2^{d_i−1} − 1` for the given bit budgets.
    pub fn with_bits(mut self, bits: [u32; 3]) -> Self {
        self.levels = bits.map(level_of);
        self
    }

    /// `f(r) = σ_{r+1}²/σ₁² · (k − r)`; zero when σ₁ = 0.
    pub fn f_r(&self) -> f64 {
        if self.sigma1 == 0.0 {
            return 0.0;
        }
        (self.sigma_r1 / self.sigma1).powi(2) * self.k.saturating_sub(self.r) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if [self.m, self.n, self.k, self.p].contains(&0) {
            return Err(Error::param("bound dimensions must be positive"));
        }
        if !(self.sigma1 >= self.sigma_r1 && self.sigma_r1 >= 0.0)
            || !(self.gamma1 >= self.gamma_r1 && self.gamma_r1 >= 0.0)
        {
            return Err(Error::param("need σ₁ ≥ σ_{r+1} ≥ 0 and γ₁ ≥ γ_{r+1} ≥ 0"));
        }
        if self.levels.iter().any(|&d| d < 1.0) {
            return Err(Error::param("integer ranges D_i must be ≥ 1"));
        }
        Ok(())
    }
}

/// `D = 2^{d−1} − 1` as a real.
pub fn level_of(bits: u32) -> f64 {
    2f64.powi(bits as i32 - 1) - 1.0
}

/// Variance bound of the scalar quantization error on `[−M, M]`:
/// `M² / (2^{d−1} − 1)²`.
pub fn quant_scalar_var_bound(max_abs: f64, bits: u32) -> f64 {
    (max_abs / level_of(bits)).powi(2)
}

/// `‖A − Ã‖_F ≤ √(mn) / λ`.
pub fn quant_matrix_bound(m: usize, n: usize, lambda: f64) -> f64 {
    ((m * n) as f64).sqrt() / lambda
}

/// Quantized GEMM error: `k (σ₁ √n / λ₂ + γ₁ √m / λ₁ + √(mn) / (λ₁ λ₂))`.
pub fn qgemm_bound(inp: &BoundInputs) -> f64 {
    let (m, n, k) = (inp.m as f64, inp.n as f64, inp.k as f64);
    let [l1, l2, _] = inp.lambdas;
    k * (inp.sigma1 * n.sqrt() / l2 + inp.gamma1 * m.sqrt() / l1 + (m * n).sqrt() / (l1 * l2))
}

/// Truncated SVD: `‖A − A_r‖_F ≤ σ_{r+1} √(p − r)`.
pub fn svd_trunc_bound(sigma_r1: f64, p: usize, r: usize) -> Result<f64> {
    if r >= p {
        return Err(Error::param(format!(
            "truncation rank {r} must be below p={p}"
        )));
    }
    Ok(sigma_r1 * ((p - r) as f64).sqrt())
}

/// Randomized SVD spectral error in expectation:
/// `[1 + 4 √(2p/(r−1))]^{1/(2q+1)} σ_{r+1}`.
pub fn rsvd_error_bound(sigma_r1: f64, p: usize, r: usize, q: u32) -> Result<f64> {
    if r < 2 {
        return Err(Error::param(format!("rsvd bound needs r >= 2, got {r}")));
    }
    let base = 1.0 + 4.0 * (2.0 * p as f64 / (r - 1) as f64).sqrt();
    Ok(base.powf(1.0 / (2 * q + 1) as f64) * sigma_r1)
}

/// Squared-error bound for the quantized truncated SVD of a single matrix:
/// `σ_{r+1}²(n−r) + m k σ₁²/D₁² + n k σ₁²/D₂² + m n k σ₁²/(D₁² D₂²)`.
pub fn qsvd_bound(inp: &BoundInputs) -> f64 {
    let (m, n, k) = (inp.m as f64, inp.n as f64, inp.k as f64);
    let s1 = inp.sigma1 * inp.sigma1;
    let d1 = inp.levels[0] * inp.levels[0];
    let d2 = inp.levels[1] * inp.levels[1];
    inp.sigma_r1 * inp.sigma_r1 * inp.n.saturating_sub(inp.r) as f64
        + m * k * s1 / d1
        + n * k * s1 / d2
        + m * n * k * s1 / (d1 * d2)
}

/// Squared-norm terms of the combined low-rank quantized multiply bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LTerms {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

impl LTerms {
    /// `√(L1 L4) + √(L2 L3) + √(L1 L2)`.
    pub fn combine(&self) -> f64 {
        (self.l1 * self.l4).sqrt() + (self.l2 * self.l3).sqrt() + (self.l1 * self.l2).sqrt()
    }
}

/// L-terms for `A: m×k`, `B: k×n` with shared rank `r` and ranges D₁..D₃.
pub fn general_l_terms(inp: &BoundInputs) -> LTerms {
    let (m, n, k, r) = (inp.m as f64, inp.n as f64, inp.k as f64, inp.r as f64);
    let tail = inp.k.saturating_sub(inp.r) as f64;
    let [d1, d2, d3] = inp.levels.map(|d| d * d);
    let s1 = inp.sigma1 * inp.sigma1;
    let g1 = inp.gamma1 * inp.gamma1;
    let l1 = inp.sigma_r1 * inp.sigma_r1 * tail
        + m * r * s1 / d1
        + k * r * s1 / d2
        + m * k * r * s1 / (d1 * d2);
    let l2 = inp.gamma_r1 * inp.gamma_r1 * tail
        + k * r * g1 / d3
        + n * r * g1 / d2
        + k * n * r * g1 / (d3 * d2);
    LTerms {
        l1,
        l2,
        l3: s1 * k,
        l4: g1 * k,
    }
}

/// General combined bound on `E‖C'_r − C‖_F`.
pub fn lramm_general_bound(inp: &BoundInputs) -> f64 {
    general_l_terms(inp).combine()
}

fn radicals(k: f64, f_r: f64, levels: [f64; 3]) -> (f64, f64) {
    let [d1, d2, d3] = levels;
    let x1 = f_r + 1.0 / d1 + 1.0 / d2 + k / (d1 * d2);
    let x2 = f_r + 1.0 / d2 + 1.0 / d3 + k / (d2 * d3);
    (x1, x2)
}

/// L-terms of the symmetric case (`m = n = k`, `σ = γ`).
pub fn specific_l_terms(k: usize, r: usize, sigma1: f64, f_r: f64, levels: [f64; 3]) -> LTerms {
    let (kf, rf) = (k as f64, r as f64);
    let (x1, x2) = radicals(kf, f_r, levels);
    let s1 = sigma1 * sigma1;
    LTerms {
        l1: kf * rf * s1 * x1,
        l2: kf * rf * s1 * x2,
        l3: kf * s1,
        l4: kf * s1,
    }
}

/// Symmetric closed form:
/// `k σ₁² √r (√X₁ + √X₂) + k r σ₁² √X₁ √X₂`.
pub fn lramm_specific_bound(
    k: usize,
    r: usize,
    sigma1: f64,
    f_r: f64,
    d1: f64,
    d2: f64,
    d3: f64,
) -> f64 {
    let (kf, rf) = (k as f64, r as f64);
    let (x1, x2) = radicals(kf, f_r, [d1, d2, d3]);
    let s1 = sigma1 * sigma1;
    kf * s1 * rf.sqrt() * (x1.sqrt() + x2.sqrt()) + kf * rf * s1 * x1.sqrt() * x2.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BIG: f64 = 1e200;

    #[test]
    fn scalar_variance() {
        assert!((quant_scalar_var_bound(1.0, 8) - 1.0 / 127f64.powi(2)).abs() < 1e-18);
        assert_eq!(quant_scalar_var_bound(0.0, 8), 0.0);
        assert!((quant_scalar_var_bound(2.0, 4) - 4.0 / 49.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_bound() {
        assert_eq!(quant_matrix_bound(1, 1, 1.0), 1.0);
        assert_eq!(quant_matrix_bound(4, 9, 2.0), 3.0);
    }

    #[test]
    fn qgemm_closed_form() {
        let inp = BoundInputs {
            sigma1: 1.0,
            gamma1: 1.0,
            lambdas: [127.0, 127.0, 1.0],
            ..BoundInputs::default()
        };
        let want = (2.0 * 127.0 + 1.0) / 127f64.powi(2);
        assert!((qgemm_bound(&inp) - want).abs() < 1e-15);
        assert!((qgemm_bound(&inp) - 0.015_810_031_620_063_24).abs() < 1e-15);
        let inf = BoundInputs {
            lambdas: [BIG, BIG, 1.0],
            ..inp
        };
        assert!(qgemm_bound(&inf) < 1e-150);
    }

    #[test]
    fn trunc_bound() {
        assert_eq!(svd_trunc_bound(1.0, 3, 2).unwrap(), 1.0);
        assert_eq!(svd_trunc_bound(0.0, 10, 4).unwrap(), 0.0);
        assert!(svd_trunc_bound(1.0, 3, 3).is_err());
    }

    #[test]
    fn rsvd_bound_values() {
        let b0 = rsvd_error_bound(1.0, 100, 10, 0).unwrap();
        assert!((b0 - 19.856_180_831_641_268).abs() < 1e-12);
        let b1 = rsvd_error_bound(1.0, 100, 10, 1).unwrap();
        assert!((b1 - 2.707_895_536_784_563).abs() < 1e-12);
        let far = rsvd_error_bound(1.0, 100, 10, 200).unwrap();
        assert!((far - 1.0).abs() < 0.01);
        assert!(rsvd_error_bound(1.0, 100, 1, 0).is_err());
    }

    #[test]
    fn qsvd_bound_values() {
        let exact = BoundInputs {
            m: 10,
            n: 10,
            k: 3,
            r: 3,
            sigma1: 2.0,
            sigma_r1: 0.0,
            levels: [BIG; 3],
            ..BoundInputs::default()
        };
        assert!(qsvd_bound(&exact) < 1e-150);
        let inp = BoundInputs {
            m: 2,
            n: 2,
            k: 2,
            r: 1,
            sigma1: 1.0,
            sigma_r1: 1.0,
            ..BoundInputs::default()
        }
        .with_bits([8, 8, 8]);
        let d2 = 127f64.powi(2);
        let want = 1.0 + 4.0 / d2 + 4.0 / d2 + 8.0 / (d2 * d2);
        assert!((qsvd_bound(&inp) - want).abs() < 1e-15);
    }

    #[test]
    fn lossless_limits() {
        let inp = BoundInputs {
            m: 8,
            n: 8,
            k: 8,
            r: 2,
            sigma1: 3.0,
            gamma1: 2.0,
            levels: [BIG; 3],
            ..BoundInputs::default()
        };
        assert!(lramm_general_bound(&inp) < 1e-90);
        assert!(lramm_specific_bound(8, 2, 3.0, 0.0, BIG, BIG, BIG) < 1e-90);
    }

    #[test]
    fn specific_equals_combined_symmetric_terms() {
        for &(k, r, s, f, bits) in &[
            (256usize, 26usize, 1.0, 0.05, [8u32, 8, 4]),
            (128, 13, 2.5, 0.3, [8, 4, 8]),
            (64, 4, 0.7, 0.0, [4, 4, 4]),
            (512, 50, 10.0, 1e-4, [16, 16, 16]),
        ] {
            let lv = bits.map(level_of);
            let direct = lramm_specific_bound(k, r, s, f, lv[0], lv[1], lv[2]);
            let combined = specific_l_terms(k, r, s, f, lv).combine();
            assert!(
                ((direct - combined) / direct).abs() <= 1e-9,
                "{direct} vs {combined}"
            );
        }
    }

    #[test]
    fn specific_bound_regression() {
        let b = lramm_specific_bound(256, 26, 1.0, 0.05, 127.0, 127.0, 7.0);
        assert!((b - 2_614.778_812_264_536).abs() < 1e-9);
    }

    #[test]
    fn middle_budget_dominates() {
        let b848 = lramm_specific_bound(256, 26, 1.0, 0.01, 127.0, 7.0, 127.0);
        let b884 = lramm_specific_bound(256, 26, 1.0, 0.01, 127.0, 127.0, 7.0);
        assert!(b848 > b884, "{b848} <= {b884}");
    }

    fn inputs_strategy() -> impl Strategy<Value = BoundInputs> {
        (
            (1usize..300, 1usize..300, 2usize..300),
            1usize..40,
            (0.1f64..50.0, 0.0f64..1.0, 0.1f64..50.0, 0.0f64..1.0),
            (1.0f64..1e6, 1.0f64..1e6, 1.0f64..1e6),
        )
            .prop_map(
                |((m, n, k), r, (s1, sr, g1, gr), (d1, d2, d3))| BoundInputs {
                    m,
                    n,
                    k,
                    r: r.min(k - 1).max(1),
                    p: m.min(n),
                    sigma1: s1,
                    sigma_r1: s1 * sr,
                    gamma1: g1,
                    gamma_r1: g1 * gr,
                    lambdas: [d1, d2, d3],
                    levels: [d1, d2, d3],
                    q: 0,
                    max_abs: s1,
                },
            )
    }

    proptest! {
        #[test]
        fn bounds_non_negative_and_monotone(inp in inputs_strategy(), which in 0usize..3, bump in 1.0f64..10.0) {
            let evals = |i: &BoundInputs| {
                vec![
                    qgemm_bound(i),
                    qsvd_bound(i),
                    lramm_general_bound(i),
                    lramm_specific_bound(i.k, i.r, i.sigma1, i.f_r(), i.levels[0], i.levels[1], i.levels[2]),
                ]
            };
            let base = evals(&inp);
            prop_assert!(base.iter().all(|&v| v >= 0.0 && v.is_finite()));

            // larger D / λ never raises a bound
            let mut more = inp.clone();
            more.levels[which] *= bump;
            more.lambdas[which] *= bump;
            for (a, b) in base.iter().zip(evals(&more)) {
                prop_assert!(b <= a * (1.0 + 1e-12));
            }

            // larger tail singular value never lowers a bound
            let mut tail = inp.clone();
            tail.sigma_r1 = (tail.sigma_r1 * bump).min(tail.sigma1);
            tail.gamma_r1 = (tail.gamma_r1 * bump).min(tail.gamma1);
            for (a, b) in base.iter().zip(evals(&tail)) {
                prop_assert!(b >= a * (1.0 - 1e-12));
            }
            let p = inp.p.max(inp.r + 1);
            prop_assert!(svd_trunc_bound(tail.sigma_r1, p, inp.r).unwrap() >= svd_trunc_bound(inp.sigma_r1, p, inp.r).unwrap());
            if inp.r >= 2 {
                prop_assert!(rsvd_error_bound(tail.sigma_r1, p, inp.r, 1).unwrap() >= rsvd_error_bound(inp.sigma_r1, p, inp.r, 1).unwrap());
            }
        }
    }
}
