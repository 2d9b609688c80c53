//! Weakly stable solvers for Toeplitz systems and least squares problems.
//!
//! The Cholesky factor `R` of `AᵀA` (optionally `AᵀA + αI`) of an `m × n`
//! Toeplitz matrix is generated row by row by the BBH lattice: one plane
//! update and two mixed downdates per row, `7n² + O(n)` multiplications plus
//! `mn` for the first row. Systems are then solved through the semi-normal
//! equations `RᵀRx = Aᵀb`, with dense, `O(n)` and `O(n log n)` storage modes
//! and optional iterative refinement.
//!
//! ```
//! use toeplitz_bbh::{seminormal, SolveOptions, ToeplitzSpec};
//!
//! let t = ToeplitzSpec::new(vec![2.0, 1.0, 0.0], vec![2.0, 1.0, 0.0]).unwrap();
//! let rep = seminormal::solve(&t, &[3.0, 4.0, 3.0], &SolveOptions::default()).unwrap();
//! assert!(rep.x.iter().all(|v| (v - 1.0).abs() < 1e-14));
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod io;
pub mod lattice;
pub mod oracles;
pub mod rotations;
pub mod seminormal;
pub mod tally;
pub mod toeplitz;

pub use error::{Error, Result};
pub use lattice::{factor, factor_streaming, regenerate_reverse, FactorOptions, RFactor, RotationLog};
pub use seminormal::{SolveOptions, SolveReport, StorageMode};
pub use tally::{StorageMeter, Tally};
pub use toeplitz::{hankel_adapter, HankelSpec, ToeplitzSpec};

/// Unit roundoff of `f64` arithmetic, `2⁻⁵³`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
