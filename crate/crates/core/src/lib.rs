//! Quartic eigenvalue solver.
//!
//! Solves `(λ⁴A + λ³B + λ²C + λD + E)x = 0` through a 4n×4n linearization
//! built on a grade-2 quadratification. Zero and infinite eigenvalues are
//! split off by structured rank-revealing deflation before the generalized
//! Schur stage, and every eigenpair is reported with its backward errors.
//!
//! The pipeline lives in [`solver`]; the individual stages are usable on
//! their own.

pub mod deflate;
pub mod diagnostics;
pub mod eigvec;
pub mod error;
pub mod gevp;
pub mod numkit;
pub mod pencil;
pub mod probio;
pub mod scaling;
mod serde_real;
pub mod solver;

pub use error::{Error, Result};
pub use numkit::{CMat, CVec, C64};
pub use pencil::{EigClass, HomogeneousEig, LinearPencil, QuarticPencil};
pub use solver::{solve, EigenSolution, SolveConfig};
