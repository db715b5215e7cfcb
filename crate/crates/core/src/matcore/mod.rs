//! Dense matrix foundation: storage, reference GEMM, norms, seeded
//! generators, the Jacobi SVD oracle and file formats.

mod dense;
mod io;
mod qr;
mod random;
mod svd;

pub use dense::{frobenius_norm, gemm, relative_error, spectral_norm, DenseMatrix};
pub use io::{
    decode_matrix, encode_matrix, load_matrix, read_csv, save_matrix, write_csv, DTYPE_F64,
    DTYPE_I32, HEADER_LEN, MAGIC, VERSION,
};
pub(crate) use io::{read_header, require_len, u32_at, write_header};
pub use qr::orthonormalize_columns;
pub(crate) use random::{gaussian, TAG_SKETCH};
pub use random::{generate, Distribution};
pub use svd::{oracle_svd, SvdFactors, SvdManifest, SvdPaths, ORACLE_MAX_MIN_DIM};
