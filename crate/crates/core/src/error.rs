//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite sample at node {node:?}, component {component}")]
    NonFinite { node: Vec<usize>, component: usize },

    #[error("scale {scale} is not an integer multiple of the grid spacing {spacing}")]
    ScaleMisaligned { scale: f64, spacing: f64 },

    #[error("kernel scale {scale} too small: need at least two spacings per axis")]
    KernelTooSmall { scale: f64 },

    #[error("kernel scale {scale} too large: 2*scale must stay below the domain length {limit}")]
    KernelTooLarge { scale: f64, limit: f64 },

    #[error(
        "traces failed to converge at {failed} of {total} samples \
         (first failing sample indices: {examples:?})"
    )]
    UnconvergedTraces {
        failed: usize,
        total: usize,
        examples: Vec<usize>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad magic bytes: expected \"ONSF\"")]
    BadMagic,

    #[error("unsupported field-format version {0}")]
    VersionMismatch(u32),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
