// Per-stage cost shares of one multiply as the rank grows.

use lramm::bench::{profile, trial_operands};
use lramm::lramm::LrammParams;
use lramm::matcore::Distribution;

pub fn run_example() -> lramm::Result<()> {
    let (a, b) = trial_operands(Distribution::Uniform01, (192, 192, 192), 0)?;
    for r in [8, 32, 96] {
        let p = profile(&a, &b, &LrammParams::new(r), 64)?;
        let s = p.mac_shares;
        println!(
            "r={r:>3}  MAC shares: rsvd {:.3} scaling {:.3} gemm1 {:.3} gemm2 {:.3} gemm3 {:.3}",
            s.rsvd, s.scaling, s.gemm1, s.gemm2, s.gemm3
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
