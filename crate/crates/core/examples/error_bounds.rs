// Closed-form error bounds evaluated from exact singular values, next to the
// measured errors they cover.

use lramm::bounds::{general_l_terms, lramm_specific_bound, BoundInputs};
use lramm::lramm::{lramm, LrammParams};
use lramm::matcore::{frobenius_norm, gemm, generate, oracle_svd, Distribution};

pub fn run_example() -> lramm::Result<()> {
    let (m, n, k, r) = (96, 96, 96, 12);
    let a = generate(m, k, Distribution::Exponential1, 20)?;
    let b = generate(k, n, Distribution::Exponential1, 21)?;
    let (sa, sb) = (oracle_svd(&a)?.sigma, oracle_svd(&b)?.sigma);
    let params = LrammParams::new(r).seed(3);
    let inp = BoundInputs {
        m,
        n,
        k,
        r,
        p: k,
        sigma1: sa[0],
        sigma_r1: sa[r],
        gamma1: sb[0],
        gamma_r1: sb[r],
        ..BoundInputs::default()
    }
    .with_bits(params.bits);
    let terms = general_l_terms(&inp);
    let exact = gemm(&a, &b, 1.0, 0.0, None)?;
    let err = frobenius_norm(&lramm(&a, &b, &params, None)?.d.sub(&exact)?);
    println!("L-terms: {terms:?}");
    println!(
        "measured ‖C'−C‖_F = {err:.4}, combined bound = {:.4}",
        terms.combine()
    );
    assert!(err <= terms.combine());

    let [d1, d2, d3] = inp.levels;
    let symmetric = lramm_specific_bound(k, r, sa[0], inp.f_r(), d1, d2, d3);
    println!("symmetric closed form with σ = γ: {symmetric:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
