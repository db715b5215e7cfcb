use super::DenseMatrix;

/// Orthonormal basis for the column span of `a` via Householder QR.
///
/// Returns the thin `Q` (rows × cols). Requires `rows >= cols`. Columns of
/// `Q` are orthonormal even when `a` is rank deficient.
pub fn orthonormalize_columns(a: &DenseMatrix) -> DenseMatrix {
    let (m, c) = a.shape();
    assert!(m >= c, "orthonormalize_columns needs rows >= cols");

    // column-major working copy
    let mut w: Vec<Vec<f64>> = (0..c).map(|j| a.column(j)).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(c);

    for j in 0..c {
        let x = &w[j][j..];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = x.to_vec();
        if norm == 0.0 {
            v.iter_mut().for_each(|e| *e = 0.0);
            v[0] = 1.0;
        } else {
            let alpha = if v[0] >= 0.0 { norm } else { -norm };
            v[0] += alpha;
            let vn = v.iter().map(|e| e * e).sum::<f64>().sqrt();
            v.iter_mut().for_each(|e| *e /= vn);
        }
        for col in w.iter_mut().skip(j) {
            reflect(&v, &mut col[j..]);
        }
        reflectors.push(v);
    }

    // Q = H_0 H_1 ... H_{c-1} [I_c; 0]
    let mut q = DenseMatrix::zeros(m, c);
    for (k, e) in (0..c).map(|k| (k, unit(m, k))) {
        let mut col = e;
        for (j, v) in reflectors.iter().enumerate().rev() {
            reflect(v, &mut col[j..]);
        }
        for (i, &val) in col.iter().enumerate() {
            q[(i, k)] = val;
        }
    }
    q
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

#[inline]
fn reflect(v: &[f64], x: &mut [f64]) {
    let d = 2.0 * v.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= d * vi;
    }
}
