// Bit-width-weighted MAC model: where the low-rank multiply pays off.

use lramm::lramm::cost_model;

pub fn run_example() -> lramm::Result<()> {
    println!(
        "{:>6} {:>14} {:>14} {:>8}",
        "r", "lramm MACs", "qgemm MACs", "speedup"
    );
    for r in [16, 64, 256, 1024, 4096] {
        let c = cost_model(4096, 4096, 4096, r, 32, 8, 8, 8)?;
        println!(
            "{r:>6} {:>14.3e} {:>14.3e} {:>8.2}",
            c.total(),
            c.qgemm_baseline,
            c.speedup_vs_qgemm()
        );
    }
    let wide = cost_model(8192, 8192, 1024, 50, 64, 16, 16, 16)?;
    println!(
        "8192x8192x1024 at r=50, 16 bits: {:.2}x",
        wide.speedup_vs_qgemm()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
