//! Discrete de Rham complex on polytopal meshes, its conforming lifting, and
//! verification studies.
//!
//! Polynomial forms are expressed in each cell's frame coordinates and every
//! algorithm is generic over [`scalar::Scalar`], so structural identities run in
//! exact rational arithmetic while smooth-data studies use binary64.

pub mod cochain;
pub mod ddr;
pub mod exterior;
pub mod harness;
pub mod lifting;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod scalar;
pub mod spaces;

pub use scalar::{Rat, Scalar};

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("schema violation at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("compatibility condition '{condition}' violated (defect {defect:e})")]
    Compatibility { condition: String, defect: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
