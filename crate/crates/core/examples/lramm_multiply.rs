// Low-rank mixed-bit multiply under each preset, compared with direct
// 4- and 8-bit quantized GEMM.

use lramm::lramm::{lramm, Preset};
use lramm::matcore::{gemm, generate, relative_error, Distribution};
use lramm::quant::qgemm;

pub fn run_example() -> lramm::Result<()> {
    let dist = Distribution::LowRankPlusNoise {
        rank: 12,
        noise_sigma: 1e-3,
    };
    let a = generate(160, 128, dist, 10)?;
    let b = generate(128, 144, dist, 11)?;
    let exact = gemm(&a, &b, 1.0, 0.0, None)?;
    for bits in [4, 8] {
        let e = relative_error(&qgemm(&a, &b, bits, bits, 1.0, 0.0, None)?, &exact)?;
        println!("direct qgemm d={bits}: {e:.3e}");
    }
    for preset in Preset::ALL {
        let params = preset.params(16).seed(1);
        let out = lramm(&a, &b, &params, None)?;
        let e = relative_error(&out.d, &exact)?;
        println!(
            "lramm {preset:<12} bits={:?}: {e:.3e}  modeled MACs {:.3e}  wall {} µs",
            params.bits,
            out.timings.macs.total,
            out.timings.wall_ns.total / 1000
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
