//! Low-rank approximate matrix multiplication (LRAMM) with mixed-bit
//! quantized GEMMs, together with the dense, quantization and randomized
//! SVD primitives it is built from, analytic error bounds and a benchmark
//! harness.
//!
//! ```
//! use lramm::lramm::{lramm, LrammParams};
//! use lramm::matcore::{gemm, generate, relative_error, Distribution};
//!
//! let a = generate(64, 48, Distribution::Uniform01, 1)?;
//! let b = generate(48, 40, Distribution::Uniform01, 2)?;
//! let out = lramm(&a, &b, &LrammParams::new(8).bits(8, 8, 4), None)?;
//! let exact = gemm(&a, &b, 1.0, 0.0, None)?;
//! assert!(relative_error(&out.d, &exact)? < 0.5);
//! # Ok::<(), lramm::Error>(())
//! ```

pub mod bench;
pub mod bounds;
pub mod error;
pub mod lramm;
pub mod matcore;
pub mod quant;
pub mod rsvd;
pub mod stats;

pub use error::{Error, Result};
pub use lramm::{
    cost_model, lramm, preset, CostModel, LrammOutput, LrammParams, Preset, StageTimings, Stages,
};
pub use matcore::{gemm, generate, DenseMatrix, Distribution};
pub use quant::{dequantize, qgemm, quantize, QuantizedMatrix};
pub use rsvd::{rsvd, RsvdParams};
