// LRMM binary and CSV round trips, plus saving SVD factors with a manifest.

use lramm::matcore::{
    decode_matrix, encode_matrix, generate, oracle_svd, read_csv, write_csv, Distribution,
    SvdFactors,
};
use lramm::quant::{quantize, QuantizedMatrix};

pub fn run_example() -> lramm::Result<()> {
    let a = generate(5, 4, Distribution::Exponential1, 9)?;
    let bytes = encode_matrix(&a);
    assert_eq!(decode_matrix(&bytes)?, a);
    println!("f64 LRMM: {} bytes", bytes.len());

    let q = quantize(&a, 8)?;
    assert_eq!(QuantizedMatrix::decode(&q.encode())?, q);
    println!("int LRMM: {} bytes, λ = {:.3}", q.encode().len(), q.scale());

    let mut csv = Vec::new();
    write_csv(&a, &mut csv)?;
    assert_eq!(read_csv(std::str::from_utf8(&csv).unwrap())?, a);

    let dir = std::env::temp_dir().join(format!("lramm-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let manifest = dir.join("factors.json");
    let f = oracle_svd(&a)?;
    f.save(&manifest)?;
    assert_eq!(SvdFactors::load(&manifest)?, f);
    println!("{}", std::fs::read_to_string(&manifest)?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> lramm::Result<()> {
    run_example()
}
