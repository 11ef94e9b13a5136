//! Thick-restart Lanczos eigensolvers for Hermitian J-symmetric matrices.
//!
//! A Hermitian matrix `A` is J-symmetric when `J A J^{-1} = A^T` for a real
//! skew-symmetric orthogonal `J`. Every eigenvalue of such a matrix is
//! doubly degenerate: with `A x = lambda x` also `A (J x*) = lambda (J x*)`
//! and the two vectors are orthogonal. [`restart::trlan_jsym`] exploits
//! this by keeping the Krylov basis orthogonal to its image under
//! `v -> J v*`, so only one vector of each pair is ever computed.

pub mod cg;
pub mod error;
pub mod harness;
pub mod lanczos;
pub mod linalg;
pub mod matrix_gen;
pub mod mmio;
pub mod operator;
pub mod restart;
pub mod tek;

pub use error::{Error, Result};
