use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::strategy::{run_mm, ErrorReport, MmOptions, Strategy};
use crate::bounds::{general_l_terms, BoundInputs};
use crate::error::{Error, Result};
use crate::lramm::{cost_model, lramm, LrammParams, DEFAULT_D0};
use crate::matcore::{
    gemm, generate, oracle_svd, relative_error, DenseMatrix, Distribution, ORACLE_MAX_MIN_DIM,
};
use crate::quant::{check_bits, qgemm};
use crate::rsvd::DEFAULT_OVERSAMPLE;

/// Seeds of the `A` and `B` operands generated for trial `seed`.
pub fn operand_seeds(seed: u64) -> (u64, u64) {
    let base = seed.wrapping_mul(2);
    (base, base.wrapping_add(1))
}

/// Generates the `m×k` and `k×n` operands of one trial.
pub fn trial_operands(
    dist: Distribution,
    (m, n, k): (usize, usize, usize),
    seed: u64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let (sa, sb) = operand_seeds(seed);
    Ok((generate(m, k, dist, sa)?, generate(k, n, dist, sb)?))
}

/// Parses a JSON document, reporting failures with their line number.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

fn default_repeat() -> usize {
    1
}

/// One strategy applied to seeded operands of one shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub strategy: Strategy,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub dist: Distribution,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Runs per seed; the report keeps the fastest wall clock.
    #[serde(default = "default_repeat")]
    pub repeat: usize,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = parse_json(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::param("experiment needs at least one seed"));
        }
        if [self.m, self.n, self.k].contains(&0) {
            return Err(Error::param("experiment dimensions must be positive"));
        }
        if self.repeat == 0 {
            return Err(Error::param("repeat must be at least 1"));
        }
        self.strategy.validate()
    }
}

/// Runs an experiment, one report per seed in seed-list order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ErrorReport>> {
    spec.validate()?;
    spec.seeds
        .iter()
        .map(|&seed| {
            let (a, b) = trial_operands(spec.dist, (spec.m, spec.n, spec.k), seed)?;
            let opts = MmOptions {
                seed,
                ..MmOptions::default()
            };
            let mut best: Option<ErrorReport> = None;
            for _ in 0..spec.repeat {
                let r = run_mm(&a, &b, None, spec.strategy, &opts)?.report;
                if best
                    .as_ref()
                    .is_none_or(|b| r.wall_ns_total < b.wall_ns_total)
                {
                    best = Some(r);
                }
            }
            Ok(best.expect("repeat >= 1"))
        })
        .collect()
}

fn default_bits() -> Vec<[u32; 3]> {
    vec![[8, 8, 4]]
}

fn default_oversample() -> usize {
    DEFAULT_OVERSAMPLE
}

fn default_d0() -> u32 {
    DEFAULT_D0
}

/// Grid of LRAMM runs: every combination of distribution, shape `[m, n, k]`,
/// rank, bit triple and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dists: Vec<Distribution>,
    pub dims: Vec<[usize; 3]>,
    pub ranks: Vec<usize>,
    #[serde(default = "default_bits")]
    pub bits: Vec<[u32; 3]>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub power_iters: u32,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_d0")]
    pub d0: u32,
    /// Evaluate only the cost model; error columns are left empty.
    #[serde(default)]
    pub model_only: bool,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = parse_json(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("dists", self.dists.is_empty()),
            ("dims", self.dims.is_empty()),
            ("ranks", self.ranks.is_empty()),
            ("bits", self.bits.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::param(format!(
                "sweep field '{name}' must not be empty"
            )));
        }
        if self.dims.iter().any(|d| d.contains(&0)) {
            return Err(Error::param("sweep dimensions must be positive"));
        }
        for &[m, n, k] in &self.dims {
            for &r in &self.ranks {
                if r < 2 || r > m.min(n).min(k) {
                    return Err(Error::param(format!(
                        "rank {r} must be in 2..=min(m, n, k) for dims [{m}, {n}, {k}]"
                    )));
                }
            }
        }
        self.bits
            .iter()
            .flatten()
            .try_for_each(|&b| check_bits(b))?;
        if self.d0 == 0 {
            return Err(Error::param("d0 must be positive"));
        }
        Ok(())
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dist: String,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub d1: u32,
    pub d2: u32,
    pub d3: u32,
    pub seed: u64,
    pub rel_error: Option<f64>,
    pub rel_error_dq4: Option<f64>,
    pub rel_error_dq8: Option<f64>,
    pub bound: Option<f64>,
    pub macs_total: f64,
    pub macs_baseline: f64,
    pub speedup_model: f64,
    pub wall_ns: u64,
    #[serde(skip)]
    key: [usize; 5],
}

pub const SWEEP_CSV_HEADER: &str = "dist,m,n,k,r,d1,d2,d3,seed,rel_error,rel_error_dq4,\
rel_error_dq8,bound,macs_total,macs_baseline,speedup_model,wall_ns";

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRow {
    /// CSV line without a trailing newline.
    pub fn csv_line(&self, with_wall: bool) -> String {
        let mut s = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.dist,
            self.m,
            self.n,
            self.k,
            self.r,
            self.d1,
            self.d2,
            self.d3,
            self.seed,
            cell(self.rel_error),
            cell(self.rel_error_dq4),
            cell(self.rel_error_dq8),
            cell(self.bound),
            self.macs_total,
            self.macs_baseline,
            self.speedup_model
        );
        if with_wall {
            let _ = write!(s, ",{}", self.wall_ns);
        }
        s
    }
}

/// Renders rows as CSV. With `with_wall = false` the `wall_ns` column is
/// dropped, leaving output that is byte-stable for a fixed spec.
pub fn sweep_csv(rows: &[SweepRow], with_wall: bool) -> String {
    let mut out = String::new();
    let header = if with_wall {
        SWEEP_CSV_HEADER
    } else {
        SWEEP_CSV_HEADER.trim_end_matches(",wall_ns")
    };
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line(with_wall));
        out.push('\n');
    }
    out
}

fn rel(approx: &DenseMatrix, exact: &DenseMatrix) -> Result<f64> {
    relative_error(approx, exact)
}

struct Trial {
    exact: DenseMatrix,
    a: DenseMatrix,
    b: DenseMatrix,
    dq4: f64,
    dq8: f64,
    sigma: Option<(Vec<f64>, Vec<f64>)>,
}

fn prepare(dist: Distribution, dims: [usize; 3], seed: u64) -> Result<Trial> {
    let [m, n, k] = dims;
    let (a, b) = trial_operands(dist, (m, n, k), seed)?;
    let exact = gemm(&a, &b, 1.0, 0.0, None)?;
    let dq4 = rel(&qgemm(&a, &b, 4, 4, 1.0, 0.0, None)?, &exact)?;
    let dq8 = rel(&qgemm(&a, &b, 8, 8, 1.0, 0.0, None)?, &exact)?;
    let sigma = if m.min(n).min(k) <= ORACLE_MAX_MIN_DIM {
        Some((oracle_svd(&a)?.sigma, oracle_svd(&b)?.sigma))
    } else {
        None
    };
    Ok(Trial {
        exact,
        a,
        b,
        dq4,
        dq8,
        sigma,
    })
}

/// Runs a sweep on the current rayon pool. Rows come back sorted by
/// (dist, dims, rank, bits, seed) in spec order regardless of scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut groups = Vec::new();
    for (di, &dist) in spec.dists.iter().enumerate() {
        for (mi, &dims) in spec.dims.iter().enumerate() {
            for &seed in &spec.seeds {
                groups.push((di, dist, mi, dims, seed));
            }
        }
    }
    let nested: Vec<Vec<SweepRow>> = groups
        .into_par_iter()
        .map(|(di, dist, mi, dims, seed)| sweep_group(spec, (di, dist), (mi, dims), seed))
        .collect::<Result<_>>()?;
    let mut rows: Vec<SweepRow> = nested.into_iter().flatten().collect();
    rows.sort_by_key(|r| r.key);
    Ok(rows)
}

fn sweep_group(
    spec: &SweepSpec,
    (di, dist): (usize, Distribution),
    (mi, dims): (usize, [usize; 3]),
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let [m, n, k] = dims;
    let trial = if spec.model_only {
        None
    } else {
        Some(prepare(dist, dims, seed)?)
    };
    let seed_pos = spec.seeds.iter().position(|&s| s == seed).unwrap_or(0);
    let mut rows = Vec::new();
    for &r in &spec.ranks {
        for (bi, &bits) in spec.bits.iter().enumerate() {
            let [d1, d2, d3] = bits;
            let model = cost_model(m, n, k, r, spec.d0, d1, d2, d3)?;
            let mut row = SweepRow {
                dist: dist.label(),
                m,
                n,
                k,
                r,
                d1,
                d2,
                d3,
                seed,
                rel_error: None,
                rel_error_dq4: None,
                rel_error_dq8: None,
                bound: None,
                macs_total: model.total(),
                macs_baseline: model.qgemm_baseline,
                speedup_model: model.speedup_vs_qgemm(),
                wall_ns: 0,
                key: [di, mi, r, bi, seed_pos],
            };
            if let Some(t) = &trial {
                let params = LrammParams {
                    rank: r,
                    bits,
                    power_iters: spec.power_iters,
                    oversample: spec.oversample,
                    seed,
                    alpha: 1.0,
                    beta: 0.0,
                };
                let out = lramm(&t.a, &t.b, &params, None)?;
                row.rel_error = Some(rel(&out.d, &t.exact)?);
                row.rel_error_dq4 = Some(t.dq4);
                row.rel_error_dq8 = Some(t.dq8);
                row.wall_ns = out.timings.wall_ns.total;
                row.bound = t.sigma.as_ref().map(|(sa, sb)| {
                    let at = |s: &[f64], i: usize| s.get(i).copied().unwrap_or(0.0);
                    let inp = BoundInputs {
                        m,
                        n,
                        k,
                        r,
                        p: m.min(n).min(k),
                        sigma1: sa[0],
                        sigma_r1: at(sa, r),
                        gamma1: sb[0],
                        gamma_r1: at(sb, r),
                        q: spec.power_iters,
                        ..BoundInputs::default()
                    }
                    .with_bits(bits);
                    general_l_terms(&inp).combine()
                });
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec::from_json(
            r#"{
                "dists": ["uniform", "lowrank:6:0"],
                "dims": [[32, 24, 28]],
                "ranks": [2, 4, 6],
                "bits": [[8, 8, 4], [8, 8, 8]],
                "seeds": [3, 1]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn parse_error_has_line() {
        let err = SweepSpec::from_json("{\n  \"dists\": [\"uniform\"],\n  \"dims\": [[4, 4,]]\n}")
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            SweepSpec::from_json(r#"{"dists": [], "dims": [[4,4,4]], "ranks": [2], "seeds": [0]}"#),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            SweepSpec::from_json(
                r#"{"dists": ["uniform"], "dims": [[4,4,4]], "ranks": [5], "seeds": [0]}"#
            ),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn rows_sorted_and_complete() {
        let spec = small_spec();
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2 * 2);
        assert_eq!(rows[0].dist, "uniform");
        assert_eq!((rows[0].r, rows[0].d3, rows[0].seed), (2, 4, 3));
        assert_eq!(rows[1].seed, 1);
        let csv = sweep_csv(&rows, true);
        assert!(csv.starts_with(SWEEP_CSV_HEADER));
        assert_eq!(csv.lines().count(), rows.len() + 1);
        assert!(csv.lines().all(|l| l.split(',').count() == 17));
    }

    #[test]
    fn direct_quantization_columns_ignore_rank() {
        let rows = run_sweep(&small_spec()).unwrap();
        for a in &rows {
            for b in &rows {
                if a.dist == b.dist && a.seed == b.seed {
                    assert_eq!(a.rel_error_dq4, b.rel_error_dq4);
                    assert_eq!(a.rel_error_dq8, b.rel_error_dq8);
                }
            }
        }
    }

    #[test]
    fn lowrank_error_falls_with_rank() {
        let spec = SweepSpec::from_json(
            r#"{"dists": ["lowrank:8:0"], "dims": [[48, 48, 48]], "ranks": [2, 4, 8],
                "bits": [[16, 16, 16]], "seeds": [0, 1, 2]}"#,
        )
        .unwrap();
        let rows = run_sweep(&spec).unwrap();
        let med = |r: usize| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|x| x.r == r)
                .map(|x| x.rel_error.unwrap())
                .collect();
            crate::stats::median(&v)
        };
        assert!(med(2) > med(4) && med(4) > med(8));
        assert!(med(8) < 1e-3);
    }

    #[test]
    fn model_only_large_grid() {
        let spec = SweepSpec::from_json(
            r#"{"dists": ["binary"], "dims": [[8192, 8192, 1024]], "ranks": [50],
                "bits": [[16, 16, 16]], "seeds": [0], "d0": 32, "model_only": true}"#,
        )
        .unwrap();
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].rel_error.is_none());
        assert!(rows[0].speedup_model >= 3.0);
    }

    #[test]
    fn experiment_spec() {
        let spec = ExperimentSpec::from_json(
            r#"{"strategy": "qgemm:8", "m": 16, "n": 12, "k": 10, "dist": "uniform", "seeds": [1, 2]}"#,
        )
        .unwrap();
        let reports = run_experiment(&spec).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[1].seed, 2);
        assert!(ExperimentSpec::from_json(
            r#"{"strategy": "qgemm:8", "m": 16, "n": 12, "k": 10, "dist": "uniform", "seeds": []}"#
        )
        .is_err());
        assert!(matches!(
            ExperimentSpec::from_json(r#"{"strategy": "warp", "m": 1}"#),
            Err(Error::Parse { .. })
        ));
    }
}
