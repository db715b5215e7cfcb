// Integer GEMM on quantized operands versus the exact product.

use lramm::matcore::{gemm, generate, relative_error, Distribution};
use lramm::quant::qgemm;

pub fn run_example() -> lramm::Result<()> {
    let a = generate(96, 64, Distribution::Uniform01, 1)?;
    let b = generate(64, 80, Distribution::Uniform01, 2)?;
    let exact = gemm(&a, &b, 1.0, 0.0, None)?;
    let mut last = f64::INFINITY;
    for bits in [4, 8, 12] {
        let approx = qgemm(&a, &b, bits, bits, 1.0, 0.0, None)?;
        let e = relative_error(&approx, &exact)?;
        println!("qgemm d={bits:>2}: relative error {e:.3e}");
        assert!(e < last);
        last = e;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
