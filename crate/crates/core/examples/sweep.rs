// Rank sweep over several input distributions, written as CSV.

use lramm::bench::{run_sweep, sweep_csv, SweepSpec};

pub fn run_example() -> lramm::Result<()> {
    let spec = SweepSpec::from_json(
        r#"{
            "dists": ["uniform", "normal", "lowrank:8:0.001"],
            "dims": [[64, 64, 64]],
            "ranks": [2, 4, 8, 16],
            "bits": [[8, 8, 4]],
            "seeds": [0, 1]
        }"#,
    )?;
    let rows = run_sweep(&spec)?;
    print!("{}", sweep_csv(&rows, false));
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
