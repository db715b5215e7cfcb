use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lramm::{cost_model, lramm, LrammParams, Stages};
use crate::matcore::{oracle_svd, DenseMatrix};

/// Descending singular values of `a` from the exact SVD.
pub fn spectrum(a: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(oracle_svd(a)?.sigma)
}

/// `index,sigma` CSV with 1-based indices.
pub fn spectrum_csv(sigma: &[f64]) -> String {
    let mut out = String::from("index,sigma\n");
    for (i, s) in sigma.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, s));
    }
    out
}

/// Per-stage cost of one LRAMM run, absolute and as fractions of the total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub d0: u32,
    pub bits: [u32; 3],
    pub macs: Stages<f64>,
    pub mac_shares: Stages<f64>,
    pub wall_ns: Stages<u64>,
    pub wall_shares: Stages<f64>,
}

fn shares(parts: [f64; 5]) -> Stages<f64> {
    let total: f64 = parts.iter().sum();
    let f = |x: f64| if total > 0.0 { x / total } else { 0.2 };
    Stages::from_parts(
        f(parts[0]),
        f(parts[1]),
        f(parts[2]),
        f(parts[3]),
        f(parts[4]),
    )
}

fn values<T: Copy + std::ops::Add<Output = T>>(
    s: &Stages<T>,
    to_f64: impl Fn(T) -> f64,
) -> [f64; 5] {
    s.parts().map(|(_, v)| to_f64(v))
}

/// Model-only profile: MAC counts and shares, no execution.
pub fn profile_model(
    (m, n, k): (usize, usize, usize),
    r: usize,
    d0: u32,
    bits: [u32; 3],
) -> Result<ProfileReport> {
    let model = cost_model(m, n, k, r, d0, bits[0], bits[1], bits[2])?;
    Ok(ProfileReport {
        m,
        n,
        k,
        r,
        d0,
        bits,
        mac_shares: shares(values(&model.stages, |x| x)),
        macs: model.stages,
        wall_ns: Stages::default(),
        wall_shares: Stages::default(),
    })
}

/// Runs LRAMM once and reports the per-stage MAC model and wall clock.
pub fn profile(
    a: &DenseMatrix,
    b: &DenseMatrix,
    params: &LrammParams,
    d0: u32,
) -> Result<ProfileReport> {
    let out = lramm(a, b, params, None)?;
    let mut report = profile_model((a.rows(), b.cols(), a.cols()), params.rank, d0, params.bits)?;
    report.wall_shares = shares(values(&out.timings.wall_ns, |x| x as f64));
    report.wall_ns = out.timings.wall_ns;
    Ok(report)
}
