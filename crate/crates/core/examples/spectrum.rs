// Singular spectra: non-negative inputs carry one dominant singular value.

use lramm::bench::spectrum;
use lramm::matcore::{generate, Distribution};

pub fn run_example() -> lramm::Result<()> {
    for dist in [
        Distribution::Uniform01,
        Distribution::Exponential1,
        Distribution::Binary01,
        Distribution::Normal01,
    ] {
        let s = spectrum(&generate(100, 100, dist, 4)?)?;
        println!(
            "{dist:<12} σ₁={:>8.3} σ₂={:>7.3} σ₁/σ₂={:>6.2} σ₁₀₀={:.2e}",
            s[0],
            s[1],
            s[0] / s[1],
            s[99]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
