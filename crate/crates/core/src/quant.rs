//! Symmetric linear quantization and integer GEMM.
//!
//! A matrix with largest magnitude `a_max` is mapped to signed integers with
//! `q = round(λ·a)`, `λ = (2^{d−1} − 1) / a_max`, using round-half-to-even
//! and clamping to the symmetric range `±(2^{d−1} − 1)`. Bit budgets from 2
//! to 24 are simulated in `i32` storage; products accumulate in `i64`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::{self, DenseMatrix, DTYPE_I32, HEADER_LEN};

pub const MIN_BITS: u32 = 2;
pub const MAX_BITS: u32 = 24;

/// Largest representable magnitude for a bit budget, `2^{d−1} − 1`.
#[inline]
pub fn levels(bits: u32) -> i64 {
    (1i64 << (bits - 1)) - 1
}

pub fn check_bits(bits: u32) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::param(format!(
            "bit budget {bits} outside [{MIN_BITS}, {MAX_BITS}]"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    rows: usize,
    cols: usize,
    bits: u32,
    scale: f64,
    data: Vec<i32>,
}

impl QuantizedMatrix {
    /// Assembles a quantized matrix from raw parts, checking every invariant.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        bits: u32,
        scale: f64,
        data: Vec<i32>,
    ) -> Result<Self> {
        check_bits(bits)?;
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} values for a {rows}x{cols} quantized matrix",
                data.len()
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param(format!("scale must be positive, got {scale}")));
        }
        let max = levels(bits);
        if let Some(bad) = data.iter().find(|&&q| i64::from(q).abs() > max) {
            return Err(Error::param(format!(
                "entry {bad} outside ±{max} for {bits} bits"
            )));
        }
        Ok(Self {
            rows,
            cols,
            bits,
            scale,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// λ: multiply a real value by this to land on the integer grid.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    /// Serializes into the `LRMM` container (dtype 2) with the bits/scale trailer.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len() + 12);
        matcore::write_header(&mut out, DTYPE_I32, self.rows, self.cols);
        for q in &self.data {
            out.extend_from_slice(&q.to_le_bytes());
        }
        out.extend_from_slice(&self.bits.to_le_bytes());
        out.extend_from_slice(&self.scale.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (rows, cols) = matcore::read_header(bytes, DTYPE_I32)?;
        let count = rows * cols;
        let trailer = HEADER_LEN + 4 * count;
        matcore::require_len(bytes, trailer, "payload")?;
        matcore::require_len(bytes, trailer + 12, "trailer")?;
        if bytes.len() != trailer + 12 {
            return Err(Error::format(
                (trailer + 12) as u64,
                "trailing bytes after trailer",
            ));
        }
        let data = (0..count)
            .map(|i| {
                let off = HEADER_LEN + 4 * i;
                i32::from_le_bytes(bytes[off..off + 4].try_into().expect("4 bytes"))
            })
            .collect();
        let bits = matcore::u32_at(bytes, trailer);
        let scale = f64::from_le_bytes(bytes[trailer + 4..trailer + 12].try_into().expect("8"));
        Self::from_parts(rows, cols, bits, scale, data)
            .map_err(|e| Error::format(trailer as u64, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }
}

/// Quantizes `a` to a `bits`-bit symmetric grid.
///
/// An all-zero input yields an all-zero payload with scale 1.
pub fn quantize(a: &DenseMatrix, bits: u32) -> Result<QuantizedMatrix> {
    check_bits(bits)?;
    if !a.is_finite() {
        return Err(Error::param("cannot quantize non-finite entries"));
    }
    let max = levels(bits);
    let a_max = a.max_abs();
    let scale = if a_max == 0.0 {
        1.0
    } else {
        max as f64 / a_max
    };
    let limit = max as f64;
    let data = a
        .data()
        .iter()
        .map(|&v| (scale * v).round_ties_even().clamp(-limit, limit) as i32)
        .collect();
    Ok(QuantizedMatrix {
        rows: a.rows(),
        cols: a.cols(),
        bits,
        scale,
        data,
    })
}

pub fn dequantize(q: &QuantizedMatrix) -> DenseMatrix {
    let data = q.data.iter().map(|&v| f64::from(v) / q.scale).collect();
    DenseMatrix::from_vec(q.rows, q.cols, data).expect("shape preserved")
}

/// `dequantize(quantize(a, bits))`.
pub fn fake_quantize(a: &DenseMatrix, bits: u32) -> Result<DenseMatrix> {
    Ok(dequantize(&quantize(a, bits)?))
}

/// Row-major matrix of exact 64-bit integer products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

/// Exact integer product of two quantized payloads.
pub fn integer_matmul(qa: &QuantizedMatrix, qb: &QuantizedMatrix) -> Result<IntMatrix> {
    if qa.cols != qb.rows {
        return Err(Error::shape(format!(
            "integer matmul inner dimensions differ: {}x{} * {}x{}",
            qa.rows, qa.cols, qb.rows, qb.cols
        )));
    }
    check_accumulator(qa.cols, qa.bits, qb.bits)?;
    let (k, n) = (qa.cols, qb.cols);
    let mut out = vec![0i64; qa.rows * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, acc)| {
        let arow = &qa.data[i * k..(i + 1) * k];
        for (l, &ail) in arow.iter().enumerate() {
            if ail == 0 {
                continue;
            }
            let ail = i64::from(ail);
            let brow = &qb.data[l * n..(l + 1) * n];
            for (o, &blj) in acc.iter_mut().zip(brow) {
                *o += ail * i64::from(blj);
            }
        }
    });
    Ok(IntMatrix {
        rows: qa.rows,
        cols: n,
        data: out,
    })
}

/// Rejects inner dimensions whose worst-case dot product could leave `i64`.
pub fn check_accumulator(k: usize, bits_a: u32, bits_b: u32) -> Result<()> {
    let worst = k as u128 * levels(bits_a) as u128 * levels(bits_b) as u128;
    if worst >= 1u128 << 63 {
        return Err(Error::OverflowRisk { k, bits_a, bits_b });
    }
    Ok(())
}

/// Quantized GEMM: `alpha · deq(Q(a) · Q(b)) + beta · c`.
pub fn qgemm(
    a: &DenseMatrix,
    b: &DenseMatrix,
    bits_a: u32,
    bits_b: u32,
    alpha: f64,
    beta: f64,
    c: Option<&DenseMatrix>,
) -> Result<DenseMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::shape(format!(
            "qgemm inner dimensions differ: {}x{} * {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if let Some(c) = c {
        if c.shape() != (a.rows(), b.cols()) {
            return Err(Error::shape(format!(
                "qgemm addend is {}x{}, expected {}x{}",
                c.rows(),
                c.cols(),
                a.rows(),
                b.cols()
            )));
        }
    }
    check_bits(bits_a)?;
    check_bits(bits_b)?;
    check_accumulator(a.cols(), bits_a, bits_b)?;
    let qa = quantize(a, bits_a)?;
    let qb = quantize(b, bits_b)?;
    let prod = integer_matmul(&qa, &qb)?;
    let inv = 1.0 / (qa.scale * qb.scale);
    let data = prod
        .data
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            let d = v as f64 * inv;
            match c {
                Some(c) => alpha * d + beta * c.data()[idx],
                None => alpha * d,
            }
        })
        .collect();
    DenseMatrix::from_vec(prod.rows, prod.cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{qgemm_bound, BoundInputs};
    use crate::matcore::{
        frobenius_norm, gemm, generate, oracle_svd, relative_error, Distribution,
    };
    use proptest::prelude::*;

    fn m(rows: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn extremes_map_to_levels() {
        let q = quantize(&m(&[vec![1.0, -1.0]]), 8).unwrap();
        assert_eq!(q.scale(), 127.0);
        assert_eq!(q.data(), &[127, -127]);
    }

    #[test]
    fn scale_from_max() {
        let q = quantize(&m(&[vec![2.0, 0.0]]), 4).unwrap();
        assert_eq!(q.scale(), 3.5);
        assert_eq!(q.data(), &[7, 0]);
    }

    #[test]
    fn zero_sentinel() {
        let q = quantize(&DenseMatrix::zeros(2, 2), 8).unwrap();
        assert_eq!(q.scale(), 1.0);
        assert_eq!(q.data(), &[0; 4]);
        assert_eq!(dequantize(&q), DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn ties_go_to_even() {
        // λ = 7/3.5 = 2 → 0.25·2 = 0.5 → 0, 0.75·2 = 1.5 → 2
        let q = quantize(&m(&[vec![3.5, 0.25, 0.75, -0.25]]), 4).unwrap();
        assert_eq!(q.data(), &[7, 0, 2, 0]);
    }

    #[test]
    fn bits_out_of_range() {
        let a = m(&[vec![1.0]]);
        assert!(matches!(quantize(&a, 1), Err(Error::Parameter(_))));
        assert!(matches!(quantize(&a, 25), Err(Error::Parameter(_))));
        assert!(quantize(&a, 2).is_ok() && quantize(&a, 24).is_ok());
    }

    #[test]
    fn dequantize_examples() {
        let q = QuantizedMatrix::from_parts(1, 1, 8, 127.0, vec![127]).unwrap();
        assert_eq!(dequantize(&q).data(), &[1.0]);
        let q = QuantizedMatrix::from_parts(1, 1, 4, 3.5, vec![7]).unwrap();
        assert_eq!(dequantize(&q).data(), &[2.0]);
    }

    #[test]
    fn from_parts_rejects_out_of_range() {
        assert!(QuantizedMatrix::from_parts(1, 1, 4, 1.0, vec![8]).is_err());
        assert!(QuantizedMatrix::from_parts(1, 1, 4, 1.0, vec![-8]).is_err());
        assert!(QuantizedMatrix::from_parts(1, 1, 4, 0.0, vec![1]).is_err());
        assert!(QuantizedMatrix::from_parts(1, 2, 4, 1.0, vec![1]).is_err());
    }

    #[test]
    fn round_trip_per_element() {
        let a = generate(16, 16, Distribution::Uniform01, 3).unwrap();
        let q = quantize(&a, 8).unwrap();
        let back = dequantize(&q);
        let tol = 0.5 / q.scale();
        for (x, y) in a.data().iter().zip(back.data()) {
            assert!((x - y).abs() <= tol * (1.0 + 1e-12), "{x} vs {y}");
        }
    }

    #[test]
    fn integer_matmul_examples() {
        let a = QuantizedMatrix::from_parts(1, 2, 8, 1.0, vec![1, 2]).unwrap();
        let b = QuantizedMatrix::from_parts(2, 1, 8, 1.0, vec![3, 4]).unwrap();
        assert_eq!(integer_matmul(&a, &b).unwrap().data, vec![11]);
        let z = QuantizedMatrix::from_parts(2, 2, 8, 1.0, vec![0; 4]).unwrap();
        let x = QuantizedMatrix::from_parts(2, 3, 8, 1.0, vec![5, -7, 1, 2, 3, 127]).unwrap();
        assert_eq!(integer_matmul(&z, &x).unwrap().data, vec![0; 6]);
        assert!(matches!(integer_matmul(&a, &a), Err(Error::Shape(_))));
    }

    #[test]
    fn integer_matmul_matches_naive() {
        let mut s = 12345u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((s >> 33) % 255) as i32 - 127
        };
        let a: Vec<i32> = (0..64).map(|_| next()).collect();
        let b: Vec<i32> = (0..64).map(|_| next()).collect();
        let qa = QuantizedMatrix::from_parts(8, 8, 8, 1.0, a.clone()).unwrap();
        let qb = QuantizedMatrix::from_parts(8, 8, 8, 1.0, b.clone()).unwrap();
        let got = integer_matmul(&qa, &qb).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let mut acc = 0i64;
                for l in 0..8 {
                    acc += i64::from(a[i * 8 + l]) * i64::from(b[l * 8 + j]);
                }
                assert_eq!(got.data[i * 8 + j], acc);
            }
        }
    }

    #[test]
    fn qgemm_exact_cases() {
        let one = m(&[vec![1.0]]);
        assert_eq!(
            qgemm(&one, &one, 8, 8, 1.0, 0.0, None).unwrap().data(),
            &[1.0]
        );
        // grid-aligned b: entries are multiples of a_max/127
        let b = m(&[vec![127.0, -64.0], vec![3.0, 0.0]]).scale(1.0 / 127.0);
        let d = qgemm(&DenseMatrix::identity(2), &b, 8, 8, 1.0, 0.0, None).unwrap();
        let exact = b.data().to_vec();
        for (x, y) in d.data().iter().zip(&exact) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn qgemm_alpha_beta() {
        let a = DenseMatrix::identity(2);
        let c = m(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let d = qgemm(&a, &a, 8, 8, 2.0, 3.0, Some(&c)).unwrap();
        assert_eq!(d.data(), &[5.0, 3.0, 3.0, 5.0]);
    }

    #[test]
    fn qgemm_errors() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            qgemm(&a, &a, 8, 8, 1.0, 0.0, None),
            Err(Error::Shape(_))
        ));
        let b = DenseMatrix::zeros(3, 2);
        assert!(matches!(
            qgemm(&a, &b, 8, 30, 1.0, 0.0, None),
            Err(Error::Parameter(_))
        ));
        // (2^23 − 1)² · k ≥ 2^63 once k > 2^17
        assert!(check_accumulator(1 << 17, 24, 24).is_ok());
        assert!(matches!(
            check_accumulator((1 << 17) + 1, 24, 24),
            Err(Error::OverflowRisk { .. })
        ));
    }

    #[test]
    fn qgemm_within_error_bound() {
        let a = generate(64, 64, Distribution::Uniform01, 21).unwrap();
        let b = generate(64, 64, Distribution::Uniform01, 22).unwrap();
        let d = qgemm(&a, &b, 8, 8, 1.0, 0.0, None).unwrap();
        let exact = gemm(&a, &b, 1.0, 0.0, None).unwrap();
        let err = frobenius_norm(&d.sub(&exact).unwrap());
        let inputs = BoundInputs {
            m: 64,
            n: 64,
            k: 64,
            sigma1: oracle_svd(&a).unwrap().sigma[0],
            gamma1: oracle_svd(&b).unwrap().sigma[0],
            lambdas: [
                quantize(&a, 8).unwrap().scale(),
                quantize(&b, 8).unwrap().scale(),
                1.0,
            ],
            ..BoundInputs::default()
        };
        assert!(err <= qgemm_bound(&inputs), "{err}");
    }

    #[test]
    fn qgemm_24_bit_is_near_exact() {
        let a = generate(256, 200, Distribution::Uniform01, 5)
            .unwrap()
            .map(|v| 2.0 * v - 1.0);
        let b = generate(200, 40, Distribution::Uniform01, 6)
            .unwrap()
            .map(|v| 2.0 * v - 1.0);
        let d = qgemm(&a, &b, 24, 24, 1.0, 0.0, None).unwrap();
        let exact = gemm(&a, &b, 1.0, 0.0, None).unwrap();
        assert!(relative_error(&d, &exact).unwrap() <= 1e-5);
    }

    #[test]
    fn scalar_error_statistics() {
        // symmetric inputs on [−M, M]
        let big_m = 3.0;
        let x = generate(100, 100, Distribution::Uniform01, 77)
            .unwrap()
            .map(|v| big_m * (2.0 * v - 1.0));
        for bits in [4, 8, 12] {
            let q = quantize(&x, bits).unwrap();
            let back = dequantize(&q);
            let errs: Vec<f64> = back
                .data()
                .iter()
                .zip(x.data())
                .map(|(a, b)| a - b)
                .collect();
            let n = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / n;
            let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() <= 1e-3 * big_m, "bits {bits}: mean {mean}");
            let bound = big_m * big_m / (levels(bits) as f64).powi(2);
            assert!(var <= bound, "bits {bits}: var {var} > {bound}");
        }
    }

    #[test]
    fn more_bits_lower_median_error() {
        let mut e4 = Vec::new();
        let mut e8 = Vec::new();
        for seed in 0..30 {
            let a = generate(128, 128, Distribution::Uniform01, 2 * seed).unwrap();
            let b = generate(128, 128, Distribution::Uniform01, 2 * seed + 1).unwrap();
            let exact = gemm(&a, &b, 1.0, 0.0, None).unwrap();
            e4.push(relative_error(&qgemm(&a, &b, 4, 4, 1.0, 0.0, None).unwrap(), &exact).unwrap());
            e8.push(relative_error(&qgemm(&a, &b, 8, 8, 1.0, 0.0, None).unwrap(), &exact).unwrap());
        }
        assert!(crate::stats::median(&e8) < crate::stats::median(&e4));
    }

    #[test]
    fn encode_decode() {
        let a = generate(5, 3, Distribution::Normal01, 4).unwrap();
        let q = quantize(&a, 6).unwrap();
        let bytes = q.encode();
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(QuantizedMatrix::decode(&bytes).unwrap(), q);
        assert!(matches!(
            QuantizedMatrix::decode(&bytes[..bytes.len() - 4]),
            Err(Error::Format { .. })
        ));
        let f64_file = matcore::encode_matrix(&a);
        assert!(matches!(
            QuantizedMatrix::decode(&f64_file),
            Err(Error::Format { offset: 8, .. })
        ));
    }

    proptest! {
        #[test]
        fn quantizer_invariants(
            vals in proptest::collection::vec(-1e3f64..1e3, 1..60),
            bits in 2u32..=24,
        ) {
            let a = DenseMatrix::from_vec(1, vals.len(), vals.clone()).unwrap();
            let q = quantize(&a, bits).unwrap();
            let max = levels(bits);
            prop_assert!(q.data().iter().all(|&v| i64::from(v).abs() <= max));
            let back = dequantize(&q);
            let tol = 0.5 / q.scale();
            for (x, y) in vals.iter().zip(back.data()) {
                prop_assert!((x - y).abs() <= tol * (1.0 + 1e-9) + 1e-300);
            }
            let fro = frobenius_norm(&back.sub(&a).unwrap());
            prop_assert!(fro <= 0.5 * (vals.len() as f64).sqrt() / q.scale() * (1.0 + 1e-9));
        }
    }
}
