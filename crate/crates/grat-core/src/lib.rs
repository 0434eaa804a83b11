//! Reference engine for grouped structured sparse attention on 2D/3D token
//! grids.
//!
//! The pipeline: [`grid`] partitions a token lattice into contiguous groups
//! and relayouts tensors group-major; [`maskplan`] builds attendable-set
//! plans (surrounding blocks, criss-cross, and baseline token-level schemes);
//! [`attn`] executes attention through a dense masked oracle and a grouped
//! block-sparse streaming-softmax path; [`metrics`] computes pair counts,
//! FLOPs sparsity, farthest-token distances, and attention-mass-by-distance
//! histograms; [`bench`] times the executors against each other; [`tensorio`]
//! provides the `.grt` binary tensor interchange format.
//!
//! Numeric kernels are generic over the scalar payload via [`Scalar`]
//! (f32 or f64); storage defaults to f32 with f64 accumulation.

pub mod attn;
pub mod bench;
pub mod error;
pub mod grid;
pub mod maskplan;
pub mod metrics;
pub mod scalar;
pub mod tensor;
pub mod tensorio;

pub use error::{Error, Result};
pub use grid::{GridShape, GroupGrid, GroupShape, TokenCoord};
pub use maskplan::{AttentionPlan, SchemeConfig, TokenMask};
pub use scalar::Scalar;
pub use tensor::Tensor;

/// Tensor with the engine's standard 32-bit storage.
pub type Tensor32 = Tensor<f32>;
/// Tensor with 64-bit storage, for double-precision checks.
pub type Tensor64 = Tensor<f64>;
