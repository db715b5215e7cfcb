//! Experiment harness: strategy dispatch with error reports, parameter
//! sweeps, singular spectra, stage profiles and bound verification.
//!
//! Wall-clock figures are reported for information only; cost comparisons
//! rest on the bit-width-weighted MAC model.

mod profile;
mod strategy;
mod sweep;
mod verify;

pub use profile::{profile, profile_model, spectrum, spectrum_csv, ProfileReport};
pub use strategy::{run_mm, ErrorReport, MmOptions, MmOutcome, Strategy};
pub use sweep::{
    operand_seeds, parse_json, run_experiment, run_sweep, sweep_csv, trial_operands,
    ExperimentSpec, SweepRow, SweepSpec, SWEEP_CSV_HEADER,
};
pub use verify::{verify_bounds, BoundCheck, VerifyConfig, VerifyReport};

use crate::error::{Error, Result};

/// Runs `f` on a dedicated rayon pool of `threads` workers, or on the
/// global pool when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Parameter("thread count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
