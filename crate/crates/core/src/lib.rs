//! Hierarchical Kolmogorov-Arnold networks trained by closed-form least squares.
//!
//! Every layer is fitted once, front to back. A node owns one block per input
//! column; each block is a ridge-weighted sum of fixed basis functions fitted
//! directly to the target, and the node combines its blocks with a
//! least-squares h-function. No gradient descent is involved.

pub mod basis;
pub mod blocks;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod evaluation;
pub mod linsolve;
pub mod network;
pub mod registry;
pub mod search;

#[cfg(test)]
mod testutil;

pub use basis::{BafKind, BafParams, PlacementStrategy};
pub use datasets::{Dataset, NormStats, Scaling, TargetFunction};
pub use error::{Error, Result};
pub use network::{fit_hkan, predict, train, HkanConfig, HkanModel, LayerConfig};
