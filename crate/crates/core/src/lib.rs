//! Exact Casimir realizations of `osp(1,2)^{⊗n}` and the spectral data of
//! the Bannai–Ito algebra they generate.
//!
//! The exact layer ([`linalg`], [`osp`], [`tensor`], [`relations`]) works over
//! arbitrary-precision rationals. The spectral layer ([`spectral`],
//! [`connection`]) moves to `f64` in an orthonormal gauge.

pub mod connection;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod osp;
pub mod relations;
pub mod spectral;
pub mod subset;
pub mod tensor;

pub use error::{BiError, Result};
pub use exec::Execution;
pub use linalg::{Rational, SparseRatMatrix};
pub use subset::SubsetLabel;
pub use tensor::{LeveledOperator, SpaceConfig, TensorSpace};
