//! Coherence protection for quantum information by repeated coding, decoding
//! and projection (a multidimensional Zeno cycle), together with the numerical
//! machinery needed to realize it: search for code spaces orthogonal to a set
//! of error generators, synthesis of non-holonomic control timing sequences,
//! cycle simulation with baselines, and random-coding suppression sweeps for
//! many-qubit systems.

pub mod cli;
pub mod code_search;
pub mod config;
pub mod control;
pub mod error_model;
pub mod fit;
pub mod quantum;
pub mod random_coding;
pub mod records;
pub mod rng;
pub mod zeno;

pub use quantum::{C64, Operator, OperatorKind, SpectralDecomposition, StateVector, Tolerances};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian: max |A - A^dag| entry = {deviation:.3e} (tolerance {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("matrix is not unitary: max |A^dag A - I| entry = {deviation:.3e} (tolerance {tolerance:.1e})")]
    NotUnitary { deviation: f64, tolerance: f64 },
    #[error("basis is not orthonormal: max Gram deviation = {deviation:.3e} (tolerance {tolerance:.1e})")]
    NotOrthonormal { deviation: f64, tolerance: f64 },
    #[error("state is not normalized: |norm - 1| = {deviation:.3e} (tolerance {tolerance:.1e})")]
    NotNormalized { deviation: f64, tolerance: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("generators are not linearly independent: smallest Gram eigenvalue {smallest:.3e} (threshold {threshold:.1e})")]
    DependentGenerators { smallest: f64, threshold: f64 },
    #[error("supervector block {block} collapsed during the update (norm {norm:.3e}); restart from a fresh random supervector")]
    RestartRequired { block: usize, norm: f64 },
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("basis completion failed after {attempts} attempts")]
    CompletionFailed { attempts: usize },
    #[error("projection onto the information subspace failed at cycle {cycle} (survival probability {survival:.6})")]
    ProjectionFailed { cycle: usize, survival: f64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
