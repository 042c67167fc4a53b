//! Mellin-analysis toolkit for generalized and Kantorovich sampling series.
//!
//! All computation happens in the logarithmic coordinate `v = log x`.

pub mod analysis;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod mellin;
pub mod operators;
pub mod quadrature;
pub mod registry;
pub mod report;

pub use error::{Error, Result};
pub use grid::GridSpec;
pub use kernels::{KernelDescriptor, KernelSpec, Truncation};
pub use mellin::{PositiveReal, TestFunction};
