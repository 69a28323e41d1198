//! Computable invariants for finitely generated operator systems.
//!
//! The crate works entirely with concrete matrices. Operator systems are spans
//! of matrices in `M_k`, unitaries are classified through their spectra on the
//! circle, finite point sets in `C^n` through degree-1 maps, and finite metric
//! structures through correspondence search and sentence evaluation.
//!
//! Module map:
//!
//! - [`linalg`]: dense complex matrices, norms, normal eigendecomposition,
//!   span membership and numerical rank.
//! - [`opsys`]: operator systems as matrix spans, matrix amplifications and the
//!   minimal operator-space quantization of a polyhedral normed space.
//! - [`unitary`]: spectra, rigid-motion canonical forms and complete order
//!   isomorphism decisions for systems generated by one unitary.
//! - [`degree1`]: degree-1 maps and homeomorphisms of finite subsets of `C^n`.
//! - [`osdist`]: the level-`n` distance between operator systems, its weighted
//!   sum, and the `W_t` families.
//! - [`metricgh`]: finite metric structures, approximate isometries,
//!   Gromov-Hausdorff style distances and universal sentence fingerprints.

pub mod decision;
pub mod degree1;
mod error;
mod exec;
pub mod linalg;
pub mod metricgh;
pub mod opsys;
pub mod optim;
pub mod osdist;
pub mod sample;
pub mod unitary;

pub use decision::{Certificate, CoisDecision, Method, Verdict};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};

/// Default numerical tolerance, applied relative to the norm of the input.
pub const TOL_NUM: f64 = 1e-9;
