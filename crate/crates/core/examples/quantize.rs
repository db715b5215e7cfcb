// Symmetric linear quantization of a matrix and its round-trip error.

use lramm::matcore::{frobenius_norm, generate, Distribution};
use lramm::quant::{dequantize, quantize};

pub fn run_example() -> lramm::Result<()> {
    let a = generate(32, 24, Distribution::Normal01, 7)?;
    for bits in [4, 8, 16] {
        let q = quantize(&a, bits)?;
        let err = frobenius_norm(&a.sub(&dequantize(&q))?);
        let limit = 0.5 * ((a.rows() * a.cols()) as f64).sqrt() / q.scale();
        println!(
            "d={bits:>2}  λ={:>12.3}  ‖A−Ã‖_F={err:.3e}  limit={limit:.3e}",
            q.scale()
        );
        assert!(err <= limit);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
