// Randomized SVD with and without power iterations against the exact SVD.

use lramm::bounds::rsvd_error_bound;
use lramm::matcore::{generate, oracle_svd, spectral_norm, Distribution};
use lramm::rsvd::{rsvd, RsvdParams};

pub fn run_example() -> lramm::Result<()> {
    let a = generate(120, 100, Distribution::Uniform01, 3)?;
    let sigma = oracle_svd(&a)?.sigma;
    let r = 10;
    for q in [0, 1, 2] {
        let f = rsvd(&a, &RsvdParams::new(r).power_iters(q).seed(5))?;
        let err = spectral_norm(&a.sub(&f.reconstruct())?);
        let bound = rsvd_error_bound(sigma[r], 100, r, q)?;
        println!(
            "q={q}: σ̂₁={:.4} (exact {:.4})  ‖A−A_r‖₂={err:.4}  σ_(r+1)={:.4}  bound={bound:.4}",
            f.sigma[0], sigma[0], sigma[r]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
