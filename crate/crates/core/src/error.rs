use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("face {face} is not bipartite")]
    NonBipartiteFace { face: usize },
    #[error("edge {edge} appears {count} times in face lists")]
    EdgeMultiplicity { edge: usize, count: usize },
    #[error("Euler characteristic is {found}, expected {expected}")]
    Euler { found: i64, expected: i64 },
    #[error("invalid weight on edge {edge}: {value}")]
    InvalidWeight { edge: usize, value: f64 },
    #[error("face {face} violates the Kasteleyn condition (imaginary part {imag:e})")]
    NotKasteleyn { face: usize, imag: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("no canonical gauge found (best residual {best_residual:e})")]
    NoGauge { best_residual: f64 },
    #[error("path-dependent integration (mismatch {0:e})")]
    PathDependent(f64),
    #[error("angle condition violated (holonomy mismatch {0:e})")]
    AngleCondition(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("not liquid phase: {0}")]
    NotLiquid(String),
    #[error("aliasing in coefficient recovery (residual {0:e})")]
    Aliasing(f64),
    #[error("incidence violated (residual {0:e})")]
    Incidence(f64),
    #[error("central move failed at face {face}: {reason}")]
    CentralMove { face: usize, reason: String },
    #[error("invalid Y-variable {0}")]
    InvalidY(f64),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported document version {0}")]
    UnsupportedVersion(u32),
    #[error("empty document")]
    EmptyDocument,
}

pub type Result<T> = std::result::Result<T, Error>;
