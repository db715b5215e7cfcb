use serde::{Deserialize, Serialize};

use super::{dense::dot, frobenius_norm, gemm, DenseMatrix};
use crate::error::{Error, Result};

/// Largest `min(rows, cols)` the Jacobi oracle accepts.
pub const ORACLE_MAX_MIN_DIM: usize = 512;

const MAX_SWEEPS: usize = 80;

/// Thin SVD factors `A ≈ U diag(sigma) Vᵀ` with `U: m×t`, `V: n×t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

/// Sizes recorded next to a serialized factorization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdManifest {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub paths: SvdPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdPaths {
    pub u: String,
    pub sigma: String,
    pub v: String,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `Σ σ_i u_i v_iᵀ`, an `m × n` matrix.
    pub fn reconstruct(&self) -> DenseMatrix {
        let us = self.u.scale_columns(&self.sigma);
        gemm(&us, &self.v.transpose(), 1.0, 0.0, None).expect("factor shapes agree")
    }

    /// `max(‖UᵀU − I‖_F, ‖VᵀV − I‖_F)`.
    pub fn orthonormality_defect(&self) -> f64 {
        let defect = |q: &DenseMatrix| {
            let g = gemm(&q.transpose(), q, 1.0, 0.0, None).expect("square gram");
            frobenius_norm(&g.sub(&DenseMatrix::identity(q.cols())).expect("same shape"))
        };
        defect(&self.u).max(defect(&self.v))
    }

    /// Keeps the leading `r` triplets.
    pub fn truncate(&self, r: usize) -> Result<SvdFactors> {
        if r == 0 || r > self.rank() {
            return Err(Error::param(format!(
                "truncation rank {r} must be in 1..={}",
                self.rank()
            )));
        }
        Ok(SvdFactors {
            u: self.u.leading_columns(r),
            sigma: self.sigma[..r].to_vec(),
            v: self.v.leading_columns(r),
        })
    }

    /// Saves `u`, `sigma` (as a 1×t matrix) and `v` next to a JSON manifest.
    /// The manifest records file names relative to its own directory.
    pub fn save(&self, manifest_path: &std::path::Path) -> Result<SvdManifest> {
        let stem = manifest_path
            .file_stem()
            .ok_or_else(|| Error::param("manifest path has no file name"))?
            .to_string_lossy()
            .into_owned();
        let name = |part: &str| format!("{stem}.{part}.lrmm");
        let paths = SvdPaths {
            u: name("u"),
            sigma: name("sigma"),
            v: name("v"),
        };
        let dir = manifest_dir(manifest_path);
        super::save_matrix(&self.u, dir.join(&paths.u))?;
        super::save_matrix(
            &DenseMatrix::from_vec(1, self.rank(), self.sigma.clone())?,
            dir.join(&paths.sigma),
        )?;
        super::save_matrix(&self.v, dir.join(&paths.v))?;
        let manifest = SvdManifest {
            m: self.u.rows(),
            n: self.v.rows(),
            r: self.rank(),
            paths,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(manifest_path, json)?;
        Ok(manifest)
    }

    pub fn load(manifest_path: &std::path::Path) -> Result<SvdFactors> {
        let text = std::fs::read_to_string(manifest_path)?;
        let manifest: SvdManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let dir = manifest_dir(manifest_path);
        let u = super::load_matrix(dir.join(&manifest.paths.u))?;
        let sigma = super::load_matrix(dir.join(&manifest.paths.sigma))?.into_vec();
        let v = super::load_matrix(dir.join(&manifest.paths.v))?;
        if u.shape() != (manifest.m, manifest.r)
            || v.shape() != (manifest.n, manifest.r)
            || sigma.len() != manifest.r
        {
            return Err(Error::shape("factor files disagree with manifest"));
        }
        Ok(SvdFactors { u, sigma, v })
    }
}

fn manifest_dir(manifest_path: &std::path::Path) -> &std::path::Path {
    manifest_path.parent().unwrap_or(std::path::Path::new(""))
}

/// Full thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Accurate to roughly machine precision relative to `‖A‖_F`; cost grows
/// cubically, so inputs are capped at `min(m, n) <= 512`.
pub fn oracle_svd(a: &DenseMatrix) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    let p = m.min(n);
    if p > ORACLE_MAX_MIN_DIM {
        return Err(Error::OracleLimit {
            limit: ORACLE_MAX_MIN_DIM,
            actual: p,
        });
    }
    if m >= n {
        Ok(jacobi_tall(a))
    } else {
        let t = jacobi_tall(&a.transpose());
        Ok(SvdFactors {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

/// One-sided Jacobi for `m >= n`: orthogonalizes the columns of `A V`.
fn jacobi_tall(a: &DenseMatrix) -> SvdFactors {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * m as f64;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u_cols: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut v_mat = DenseMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        u_cols.push((s > f64::MIN_POSITIVE).then(|| w[j].iter().map(|x| x / s).collect()));
        for i in 0..n {
            v_mat[(i, k)] = v[j][i];
        }
    }
    let u_cols = complete_basis(m, u_cols);
    let u = DenseMatrix::from_fn(m, n, |i, k| u_cols[k][i]);
    SvdFactors { u, sigma, v: v_mat }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Replaces missing (zero singular value) columns with unit vectors
/// orthogonalized against the rest.
fn complete_basis(m: usize, cols: Vec<Option<Vec<f64>>>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = cols.iter().flatten().cloned().collect();
    let mut candidate = 0;
    let mut out = Vec::with_capacity(cols.len());
    for col in cols {
        match col {
            Some(c) => out.push(c),
            None => loop {
                assert!(candidate < m, "basis completion ran out of candidates");
                let mut e = vec![0.0; m];
                e[candidate] = 1.0;
                candidate += 1;
                for _ in 0..2 {
                    for b in &basis {
                        let d = dot(&e, b);
                        e.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                    }
                }
                let nrm = dot(&e, &e).sqrt();
                if nrm > 1e-8 {
                    e.iter_mut().for_each(|x| *x /= nrm);
                    basis.push(e.clone());
                    out.push(e);
                    break;
                }
            },
        }
    }
    out
}
