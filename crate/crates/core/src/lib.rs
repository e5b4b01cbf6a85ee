//! Additive Gaussian fields `f(x, y) = g₁(x) + g₂(y)` on grids, their
//! excursion sets, crossing events and the extreme-value limits that govern
//! them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extremes;
pub mod field;
pub mod harness;
pub mod kernels;
pub mod percolation;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use extremes::{ExtremeSummary, GumbelRef};
pub use field::{AdditiveField, ExcursionMask, Side, Window};
pub use harness::{ExperimentConfig, ExperimentKind, Report, ResultRow};
pub use kernels::{Grid1D, KernelFamily, KernelSpec};
pub use percolation::{BlockingCertificate, Connectivity, Direction};
pub use sampler::{CirculantSampler, ProcessPath};
