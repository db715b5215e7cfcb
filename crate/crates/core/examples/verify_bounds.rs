// Seeded bound checks, followed by a run with a deliberately wrong λ.

use lramm::bench::{verify_bounds, VerifyConfig};

pub fn run_example() -> lramm::Result<()> {
    let report = verify_bounds(&VerifyConfig::default())?;
    print!("{}", report.csv());
    assert!(report.passed);

    let faulty = VerifyConfig {
        lambda_fault: 2.0,
        ..VerifyConfig::default()
    };
    let report = verify_bounds(&faulty)?;
    println!("with λ doubled: passed = {}", report.passed);
    assert!(!report.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
